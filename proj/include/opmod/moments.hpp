#ifndef OPMOD_MOMENTS_HPP
#define OPMOD_MOMENTS_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "opmod/banded.hpp"
#include "opmod/families.hpp"
#include "opmod/polynomial.hpp"

namespace opmod {

enum class Provenance { ClosedForm, OdeRecurrence, SimpleFunction, External };

// Modified OP moments mu_n = int p_n(x) w(x) dx, the seed of the pipeline.
struct MomentVector {
    Family family;
    Eigen::VectorXd values;
    Provenance provenance = Provenance::External;

    MomentVector(Family f, Eigen::VectorXd v, Provenance p);

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int k) const { return values[k]; }
};

// a(x) (sigma w)' + b(x) w = c(x); rhs holds the modified moments of c.
struct WeightOde {
    Family family;
    Polynomial a, b;
    MomentVector rhs;  // moments of c; zero vector for homogeneous equations

    int structural_bandwidth() const {
        return std::max(a.degree() + 1, b.degree());
    }
};

// Piecewise-constant weight on breakpoints x_0 < ... < x_n; the last
// breakpoint may be +inf for Laguerre-type use.
struct SimpleFunction {
    Eigen::VectorXd breakpoints;  // size n+1
    Eigen::VectorXd values;       // size n

    SimpleFunction(Eigen::VectorXd bp, Eigen::VectorXd v);
    int intervals() const { return static_cast<int>(values.size()); }
};

// The assembled recurrence operator M {a(X)[L D + tau(X)] + b(X)} M^{-1}
// on an N x N section, plus its numerically effective bandwidths (outer
// bands can cancel exactly).
struct OdeOperator {
    BandedSection A;
    int lower = 0, upper = 0;  // effective bandwidths
};

OdeOperator assemble_ode_operator(const WeightOde& ode, int N);

// Solves the banded recurrence row by row for the highest-index unknown.
// initial must supply at least (effective upper bandwidth) leading moments.
MomentVector moments_from_ode(const WeightOde& ode, const Eigen::VectorXd& initial, int m);

// Downward-stable variant: trailing supplies the final moments
// mu_{m-k}, ..., mu_{m-1} with k >= effective lower bandwidth; solves for
// decreasing index.  No producer of trailing moments is shipped.
MomentVector moments_from_ode_downward(const WeightOde& ode, const Eigen::VectorXd& trailing,
                                       int m);

// Closed forms (ChebyshevT family unless noted).
MomentVector moments_clenshaw_curtis(int m);         // w = 1
MomentVector moments_log_chebyshev(int m);           // w = log(2/(1-x))/sqrt(1-x^2)
MomentVector moments_abs_x(int m);                   // w = |x|
MomentVector moments_log_weight(int m);              // w = log(2/(1-x))
MomentVector moments_one_plus_x(int m);              // w = 1 + x
MomentVector moments_delta_sqrt(double delta, int m);  // Legendre, w = 1/sqrt(1+delta-x)

// Theorem-style simple-function moments.
MomentVector moments_simple_function(const SimpleFunction& s, const Family& family, int m);
MomentVector moments_weighted_simple_function(const SimpleFunction& s, const Family& family,
                                              int m);

// Bounded-variation moment bounds.
double moment_bound_bv(double sup_w, double total_variation_w, int n);
double moment_bound_bv2(double sup_w, double sup_dw, double total_variation_dw, int n);

// Weight-ODE constructors for the shipped weight table.  All convert to the
// a(x)(sigma w)' + b(x) w = c(x) normal form via (sigma w)' = sigma w' + sigma' w.
WeightOde ode_jacobi_power(const Family& family, double alpha, double beta, int m);
WeightOde ode_jacobi_log(const Family& family, double alpha, double beta, int m);
WeightOde ode_algebraic_factors(const Family& family, const std::vector<double>& t,
                                const std::vector<double>& gamma, int m);
WeightOde ode_laguerre_power(double alpha, int m);
WeightOde ode_laguerre_log(double t, double alpha, int m);
WeightOde ode_laguerre_algebraic(const std::vector<double>& t, const std::vector<double>& gamma,
                                 double alpha, int m);

}  // namespace opmod

#endif
