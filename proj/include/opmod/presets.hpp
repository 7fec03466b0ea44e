#ifndef OPMOD_PRESETS_HPP
#define OPMOD_PRESETS_HPP

#include <string>
#include <vector>

#include "opmod/moments.hpp"
#include "opmod/quadrature.hpp"

namespace opmod {

// Named weights wired to their moment generators, mirroring the weight
// table: each preset can produce m moments and, for cross-checks, expose
// the weight itself to the quadrature oracle.
struct WeightPreset {
    std::string name;
    Family family;
    std::function<MomentVector(int m)> moments;
    quadrature::SingularWeight weight;  // for oracle comparisons
    std::string description;
};

// name grammar: "clenshaw-curtis", "log-chebyshev", "abs-x", "log",
// "jacobi A B", "delta-sqrt D", "algebraic [t1:g1,t2:g2,...]",
// "laguerre-step".  The bare "algebraic" uses the four-factor default.
WeightPreset make_weight_preset(const std::string& spec);

std::vector<std::string> weight_preset_names();

// Initial moments for an ODE recurrence, by the quadrature oracle.
Eigen::VectorXd initial_moments_by_quadrature(const Family& family,
                                              const quadrature::SingularWeight& w, int count);

}  // namespace opmod

#endif
