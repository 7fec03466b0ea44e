#ifndef OPMOD_CONNECTION_HPP
#define OPMOD_CONNECTION_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "opmod/displacement.hpp"
#include "opmod/gram.hpp"
#include "opmod/hodlr.hpp"
#include "opmod/moments.hpp"

namespace opmod {

enum class Backend { Auto, DenseCholesky, DisplacementCholesky, HodlrCholesky };

struct ConnectionProblem {
    Family family;
    MomentVector moments;
    int n;
    Backend backend = Backend::Auto;
    double tol = 1e-12;        // HODLR truncation
    std::uint64_t seed = 0;    // HODLR sketches
    int leaf_size = 64;

    ConnectionProblem(MomentVector m, int n_, Backend b = Backend::Auto)
        : family(m.family), moments(std::move(m)), n(n_), backend(b) {
        if (moments.size() < 2 * n - 1)
            throw InsufficientMoments("ConnectionProblem: need 2n-1 moments");
    }
};

// Upper-triangular connection coefficients R with P(x) = Q(x) R, produced
// by the selected factorization backend.
class ConnectionResult {
  public:
    explicit ConnectionResult(TriangularFactor f) : factor_(std::move(f)) {}
    explicit ConnectionResult(HodlrCholesky h) : hodlr_(std::move(h)) {}

    bool hierarchical() const { return hodlr_.has_value(); }
    const TriangularFactor& factor() const { return *factor_; }
    const HodlrCholesky& hodlr() const { return *hodlr_; }
    int size() const { return hierarchical() ? hodlr_->n : factor_->size(); }

    Eigen::VectorXd apply_R(const Eigen::VectorXd& v) const;             // R v
    Eigen::VectorXd solve_R(const Eigen::VectorXd& v) const;             // R^{-1} v
    Eigen::VectorXd solve_R_transposed(const Eigen::VectorXd& v) const;  // R^{-T} v
    void upper_band(Eigen::VectorXd& diag, Eigen::VectorXd& super) const;
    Eigen::MatrixXd to_dense_upper() const;

  private:
    std::optional<TriangularFactor> factor_;
    std::optional<HodlrCholesky> hodlr_;
};

Backend select_backend(const ConnectionProblem& p);
ConnectionResult connection_coefficients(const ConnectionProblem& p);

// (n-1)-section of the modified multiplication matrix X_Q, together with
// the measured off-tridiagonal mass of the computed section.
struct ModifiedJacobiSection {
    TridiagonalSection tridiagonal;
    double off_tridiagonal_max = 0.0;  // max |entry| outside the tridiagonal
    double entry_max = 0.0;            // max |entry| overall
    bool off_tridiagonal_measured = false;
};

// X_Q from R X_P = X_Q R.  Dense/banded factors solve row by row against
// the R section (no explicit inverse) and measure the off-tridiagonal
// residue; the hierarchical path uses the symmetric band formulas drawn
// from R's diagonal and first superdiagonal.
ModifiedJacobiSection modified_jacobi(const ConnectionResult& R, const TridiagonalSection& X_P);

// Coefficient transforms: q = R p and p = R^{-1} q.
Eigen::VectorXd convert_to_modified(const ConnectionResult& R, const Eigen::VectorXd& p_coeffs);
Eigen::VectorXd convert_to_known(const ConnectionResult& R, const Eigen::VectorXd& q_coeffs);

// Values of q_k on a grid: back-substitution of R against evaluated P(x).
Eigen::VectorXd synthesize(const ConnectionResult& R, const Family& family, int k,
                           const Eigen::VectorXd& grid);

}  // namespace opmod

#endif
