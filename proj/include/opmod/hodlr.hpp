#ifndef OPMOD_HODLR_HPP
#define OPMOD_HODLR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opmod/linop.hpp"

namespace opmod {

// Off-diagonal block stored as U diag(S) V^T with orthonormal U, V and
// nonincreasing singular values.
struct LowRankBlock {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;

    int rank() const { return static_cast<int>(S.size()); }
    Eigen::MatrixXd to_dense() const { return U * S.asDiagonal() * V.transpose(); }
};

// Node of a symmetric HODLR matrix (or of its upper Cholesky factor).  A
// branch stores the upper off-diagonal block once; the lower one is its
// transpose for the matrix, and empty for a factor.
struct HodlrNode {
    int r0 = 0, size = 0, level = 0;
    Eigen::MatrixXd dense;  // leaf payload (symmetric block or upper factor)
    std::unique_ptr<HodlrNode> first, second;
    LowRankBlock off;

    bool is_leaf() const { return !first; }
};

struct HodlrMatrix {
    std::unique_ptr<HodlrNode> root;
    int n = 0, leaf_size = 0, levels = 0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    double sigma_root = 0.0;  // largest singular value of the root off-diagonal

    Eigen::MatrixXd to_dense() const;
};

struct HodlrCholesky {
    std::unique_ptr<HodlrNode> root;
    int n = 0;

    Eigen::MatrixXd to_dense_upper() const;
    double upper_entry(int i, int j) const;  // entries of R (band probes)
};

struct HodlrOptions {
    double tol = 1e-12;
    int leaf_size = 64;
    std::uint64_t seed = 0;
    int oversampling = 8;
    int power_iterations = 2;
    // Test hook: after each downdate, record the smallest eigenvalue of the
    // downdated diagonal block (dense eigensolve; small problems only).
    std::function<void(int level, double min_eigenvalue)>* spd_probe = nullptr;
};

// Randomized HODLR compression through subblock products.  Every discarded
// singular value is below tol * sigma_root.
HodlrMatrix hodlr_compress(const LinearBlockOperator& op, const HodlrOptions& opts);

// Recursive block Cholesky with per-level recompression of the low-rank
// pieces, after Benner-Mach; the partial-SVD downdate keeps the trailing
// block positive definite.
HodlrCholesky hodlr_cholesky(const HodlrMatrix& W, const HodlrOptions& opts);

Eigen::VectorXd hodlr_matvec(const HodlrMatrix& A, const Eigen::VectorXd& v);

// y = R x or R^T x with the upper factor.
Eigen::VectorXd hodlr_apply_upper(const HodlrCholesky& R, const Eigen::VectorXd& x,
                                  bool transposed);
// Solves R x = b (or R^T x = b when transposed).
Eigen::VectorXd hodlr_solve_triangular(const HodlrCholesky& R, const Eigen::VectorXd& b,
                                       bool transposed);

// Main diagonal and first superdiagonal of the upper factor.
void hodlr_upper_band(const HodlrCholesky& R, Eigen::VectorXd& diag, Eigen::VectorXd& super);

struct RankReportRow {
    int level, block_row, block_col, rows, cols, rank;
};
std::vector<RankReportRow> rank_report(const HodlrMatrix& A);
std::vector<RankReportRow> rank_report(const HodlrCholesky& R);

// Closed-form rank bound for algebraically decaying Chebyshev moments,
// evaluated verbatim; the value can come out nonpositive for small n, in
// which case usable says so and callers fall back to measured ranks.
struct RankBoundResult {
    double r;
    double z;
    double per_term_ratio;  // 2 alpha e z / (1 - z)
    bool usable;
};
RankBoundResult rank_bound(double alpha, double eps, int n);

// Deterministic counter-based standard normal stream used for the sketches.
double gaussian_sample(std::uint64_t seed, std::uint64_t key, std::uint64_t index);

}  // namespace opmod

#endif
