#ifndef OPMOD_FAMILIES_HPP
#define OPMOD_FAMILIES_HPP

#include <Eigen/Dense>
#include <array>
#include <string>

#include "opmod/banded.hpp"
#include "opmod/errors.hpp"
#include "opmod/polynomial.hpp"

namespace opmod {

enum class FamilyKind { ChebyshevT, ChebyshevU, Legendre, Jacobi, Laguerre };

// A classical orthogonal polynomial family in its classical (DLMF)
// normalization, p_0 = 1.  Carries the Pearson data sigma, tau with
// (sigma w_c)' = tau w_c.
class Family {
  public:
    static Family chebyshev_t() { return Family(FamilyKind::ChebyshevT, 0, 0); }
    static Family chebyshev_u() { return Family(FamilyKind::ChebyshevU, 0, 0); }
    static Family legendre() { return Family(FamilyKind::Legendre, 0, 0); }
    static Family jacobi(double alpha, double beta) {
        if (!(alpha > -1.0) || !(beta > -1.0))
            throw InvalidParameter("jacobi: requires alpha, beta > -1");
        return Family(FamilyKind::Jacobi, alpha, beta);
    }
    static Family laguerre(double alpha) {
        if (!(alpha > -1.0)) throw InvalidParameter("laguerre: requires alpha > -1");
        return Family(FamilyKind::Laguerre, alpha, 0);
    }

    FamilyKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    bool bounded() const { return kind_ != FamilyKind::Laguerre; }
    double domain_left() const { return bounded() ? -1.0 : 0.0; }
    double domain_right() const;  // +inf for Laguerre

    Polynomial sigma() const;
    Polynomial tau() const;

    // Classical weight; dl = x - a and dr = b - x give the distances to the
    // endpoints without cancellation (dr is ignored on unbounded domains).
    double weight(double x, double dl, double dr) const;
    double weight(double x) const { return weight(x, x - domain_left(), domain_right() - x); }

    // Antiderivative of the classical weight from the left endpoint.
    double weight_cdf(double x) const;

    std::string name() const;

    bool operator==(const Family& o) const {
        return kind_ == o.kind_ && alpha_ == o.alpha_ && beta_ == o.beta_;
    }

  private:
    Family(FamilyKind k, double a, double b) : kind_(k), alpha_(a), beta_(b) {}
    FamilyKind kind_;
    double alpha_, beta_;
};

// n x n section of the multiplication matrix X_P (irreducible tridiagonal).
TridiagonalSection multiplication_matrix(const Family& family, int n);

// Diagonal mass matrix M_P of squared norms, as a 0-bandwidth section.
BandedSection mass_matrix(const Family& family, int n);

// Section of D_P^{P'}; upper bandwidth 1, zero elsewhere.
BandedSection differentiation_matrix(const Family& family, int n);

// Section of R_P^{P'} with P(x) = P'(x) R; upper bandwidth deg(sigma).
BandedSection raising_matrix(const Family& family, int n);

// Section of L_{P'}^P with sigma P'(x) = P(x) L; lower bandwidth deg(sigma).
BandedSection weighted_lowering_matrix(const Family& family, int n);

// p_0(x), ..., p_{n-1}(x) by the forward three-term recurrence.
Eigen::VectorXd evaluate(const Family& family, int n, double x);

// Evaluations of the internal derivative family P' (the target of
// differentiation_matrix), needed for boundary terms of weighted moments.
Eigen::VectorXd evaluate_derivative_family(const Family& family, int n, double x);

// Row-vector product v D^+ with the Moore-Penrose pseudoinverse of the
// banded differentiation matrix.
Eigen::VectorXd apply_diff_pseudoinverse(const Family& family, const Eigen::VectorXd& v);

// Squared norm of p_k under the classical weight.
double classical_norm_squared(const Family& family, int k);

// Squared norm of p'_k (the derivative family) under its classical weight
// sigma w_c.
double derivative_family_norm_squared(const Family& family, int k);

// Superdiagonal entry D[k-1,k] of the differentiation matrix, k >= 1.
double differentiation_superdiagonal(const Family& family, int k);

}  // namespace opmod

#endif
