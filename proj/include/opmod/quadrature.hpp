#ifndef OPMOD_QUADRATURE_HPP
#define OPMOD_QUADRATURE_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "opmod/families.hpp"

namespace opmod::quadrature {

// Integrand with cancellation-free distances to the active interval's
// endpoints: f(x, dl, dr) with dl = x - a, dr = b - x.
using Integrand = std::function<double(double x, double dl, double dr)>;

// Weight function with a list of integrable singular points.  eval receives
// a distance oracle: dist(s) is |x - s|, computed without cancellation when
// s is an endpoint of the active subinterval.
struct SingularWeight {
    std::function<double(double x, const std::function<double(double)>& dist)> eval;
    std::vector<double> singularities;
};

// Adaptive tanh-sinh on (a, b); refines until successive level estimates
// agree to tol relative.
double integrate(const Integrand& f, double a, double b, double tol = 1e-13);

// Half-line integral for exponentially decaying integrands (Laguerre-type);
// f(x, dl) with dl = x - a.
double integrate_halfline(const std::function<double(double, double)>& f, double a,
                          double tol = 1e-13);

// Splits [a, b] at the interior singular points and sums subintegrals.
double integrate_split(const SingularWeight& w, const std::function<double(double)>& smooth,
                       double a, double b, double tol = 1e-13);

// Modified moments mu_n = int p_n(x) w(x) dx for n < m by quadrature,
// splitting at the weight's singular points.  The family's own classical
// weight is NOT included; w is the full modification weight.
Eigen::VectorXd moments(const Family& family, const SingularWeight& w, int m,
                        double tol = 1e-13);

}  // namespace opmod::quadrature

#endif
