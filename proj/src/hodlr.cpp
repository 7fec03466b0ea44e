#include "opmod/hodlr.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "opmod/errors.hpp"

namespace opmod {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(key ^ splitmix64(index)));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double gaussian_sample(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
    const double u1 = uniform01(seed, key, 2 * index);
    const double u2 = uniform01(seed, key, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

namespace {

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed, std::uint64_t key) {
    Eigen::MatrixXd O(rows, cols);
    std::uint64_t idx = 0;
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) O(i, j) = gaussian_sample(seed, key, idx++);
    return O;
}

struct BlockRef {
    const LinearBlockOperator* op;
    int r0, nr, c0, nc;

    Eigen::MatrixXd multiply(const Eigen::MatrixXd& M, bool transpose) const {
        Eigen::MatrixXd Y(transpose ? nc : nr, M.cols());
        for (int j = 0; j < M.cols(); ++j)
            Y.col(j) = op->apply_block(r0, nr, c0, nc, M.col(j), transpose);
        return Y;
    }
};

// Range finder with oversampling and power iterations, then a small SVD of
// Q^T A.  Rank doubles until the sketch captures everything above the
// threshold with oversampling to spare.
LowRankBlock compress_block(const BlockRef& A, double abs_threshold, double* sigma_max_out,
                            const HodlrOptions& opts, std::uint64_t key) {
    const int maxr = std::min(A.nr, A.nc);
    int r = std::min(16, maxr);
    int round = 0;
    for (;;) {
        const int s = std::min(r + opts.oversampling, maxr);
        Eigen::MatrixXd Omega = gaussian_matrix(A.nc, s, opts.seed, key ^ (0x5851F42DULL * round));
        Eigen::MatrixXd Y = A.multiply(Omega, false);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.nr, s);
        for (int it = 0; it < opts.power_iterations; ++it) {
            Eigen::MatrixXd Z = A.multiply(Q, true);
            Eigen::HouseholderQR<Eigen::MatrixXd> qz(Z);
            Z = qz.householderQ() * Eigen::MatrixXd::Identity(A.nc, s);
            Y = A.multiply(Z, false);
            Eigen::HouseholderQR<Eigen::MatrixXd> qy(Y);
            Q = qy.householderQ() * Eigen::MatrixXd::Identity(A.nr, s);
        }
        Eigen::MatrixXd B = A.multiply(Q, true).transpose();  // s x nc
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        if (sigma_max_out) *sigma_max_out = sv.size() ? sv[0] : 0.0;
        const double thresh =
            abs_threshold > 0 ? abs_threshold : opts.tol * (sv.size() ? sv[0] : 0.0);

        int rank = 0;
        while (rank < sv.size() && sv[rank] > thresh) ++rank;
        if (rank < s || s == maxr) {
            LowRankBlock blk;
            blk.U = Q * svd.matrixU().leftCols(rank);
            blk.S = sv.head(rank);
            blk.V = svd.matrixV().leftCols(rank);
            if (rank > maxr / 2 && maxr > 2 * opts.leaf_size)
                throw RankExceedsHalfBlock(
                    "hodlr_compress: block rank exceeds half the block size");
            return blk;
        }
        if (r >= maxr) {
            LowRankBlock blk;  // everything significant: keep the full sketch
            blk.U = Q * svd.matrixU();
            blk.S = sv;
            blk.V = svd.matrixV();
            return blk;
        }
        r = std::min(2 * r, maxr);
        ++round;
    }
}

std::uint64_t block_key(int r0, int c0) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r0)) << 32) ^
           static_cast<std::uint32_t>(c0);
}

std::unique_ptr<HodlrNode> compress_node(const LinearBlockOperator& op, int r0, int size,
                                         int level, const HodlrOptions& opts, double& sigma_root,
                                         int& levels) {
    auto node = std::make_unique<HodlrNode>();
    node->r0 = r0;
    node->size = size;
    node->level = level;
    if (size <= opts.leaf_size) {
        node->dense = op.dense_block(r0, size, r0, size);
        return node;
    }
    levels = std::max(levels, level + 1);
    const int h = (size + 1) / 2;
    BlockRef off{&op, r0, h, r0 + h, size - h};
    double sigma = 0.0;
    const double abs_threshold = sigma_root > 0 ? opts.tol * sigma_root : 0.0;
    node->off = compress_block(off, abs_threshold, &sigma, opts, block_key(r0, r0 + h));
    if (sigma_root == 0.0) {
        sigma_root = sigma;
        // Re-truncate the root block against its own scale.
        int rank = 0;
        while (rank < node->off.S.size() && node->off.S[rank] > opts.tol * sigma_root) ++rank;
        node->off.U.conservativeResize(Eigen::NoChange, rank);
        node->off.S.conservativeResize(rank);
        node->off.V.conservativeResize(Eigen::NoChange, rank);
    }
    node->first = compress_node(op, r0, h, level + 1, opts, sigma_root, levels);
    node->second = compress_node(op, r0 + h, size - h, level + 1, opts, sigma_root, levels);
    return node;
}

}  // namespace

HodlrMatrix hodlr_compress(const LinearBlockOperator& op, const HodlrOptions& opts) {
    HodlrMatrix A;
    A.n = op.size();
    A.leaf_size = opts.leaf_size;
    A.tol = opts.tol;
    A.seed = opts.seed;
    A.sigma_root = 0.0;
    A.levels = 0;
    A.root = compress_node(op, 0, A.n, 0, opts, A.sigma_root, A.levels);
    return A;
}

namespace {

void matvec_node(const HodlrNode* node, const double* x, double* y) {
    if (node->is_leaf()) {
        Eigen::Map<const Eigen::VectorXd> xv(x, node->size);
        Eigen::Map<Eigen::VectorXd> yv(y, node->size);
        yv.noalias() += node->dense * xv;
        return;
    }
    const int h = node->first->size;
    matvec_node(node->first.get(), x, y);
    matvec_node(node->second.get(), x + h, y + h);
    const LowRankBlock& B = node->off;
    Eigen::Map<const Eigen::VectorXd> x1(x, h), x2(x + h, node->size - h);
    Eigen::Map<Eigen::VectorXd> y1(y, h), y2(y + h, node->size - h);
    if (B.rank() > 0) {
        y1.noalias() += B.U * (B.S.asDiagonal() * (B.V.transpose() * x2));
        y2.noalias() += B.V * (B.S.asDiagonal() * (B.U.transpose() * x1));
    }
}

Eigen::MatrixXd node_to_dense(const HodlrNode* node, bool factor) {
    if (node->is_leaf()) return node->dense;
    const int h = node->first->size, s = node->size;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(s, s);
    A.topLeftCorner(h, h) = node_to_dense(node->first.get(), factor);
    A.bottomRightCorner(s - h, s - h) = node_to_dense(node->second.get(), factor);
    if (node->off.rank() > 0) {
        A.topRightCorner(h, s - h) = node->off.to_dense();
        if (!factor) A.bottomLeftCorner(s - h, h) = A.topRightCorner(h, s - h).transpose();
    }
    return A;
}

}  // namespace

Eigen::MatrixXd HodlrMatrix::to_dense() const { return node_to_dense(root.get(), false); }
Eigen::MatrixXd HodlrCholesky::to_dense_upper() const { return node_to_dense(root.get(), true); }

Eigen::VectorXd hodlr_matvec(const HodlrMatrix& A, const Eigen::VectorXd& v) {
    if (v.size() != A.n) throw DimensionMismatch("hodlr_matvec: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(A.n);
    matvec_node(A.root.get(), v.data(), y.data());
    return y;
}

namespace {

// Truncated SVD recompression of [U1 S1 V1^T + A D B^T] where the second
// term need not be orthonormal.  Deterministic dense QR + small SVD.
LowRankBlock recompress_sum(const Eigen::MatrixXd& U1, const Eigen::VectorXd& S1,
                            const Eigen::MatrixXd& V1, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& D, const Eigen::MatrixXd& B,
                            double abs_threshold) {
    const int m = static_cast<int>(U1.rows() ? U1.rows() : A.rows());
    const int n = static_cast<int>(V1.rows() ? V1.rows() : B.rows());
    const int k1 = static_cast<int>(S1.size()), k2 = static_cast<int>(D.size());
    const int k = k1 + k2;
    if (k == 0) return LowRankBlock{Eigen::MatrixXd(m, 0), Eigen::VectorXd(0), Eigen::MatrixXd(n, 0)};

    Eigen::MatrixXd Uc(m, k), Vc(n, k);
    if (k1) {
        Uc.leftCols(k1) = U1;
        Vc.leftCols(k1) = V1;
    }
    if (k2) {
        Uc.rightCols(k2) = A;
        Vc.rightCols(k2) = B;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qu(Uc), qv(Vc);
    Eigen::MatrixXd Qu = qu.householderQ() * Eigen::MatrixXd::Identity(m, std::min(m, k));
    Eigen::MatrixXd Qv = qv.householderQ() * Eigen::MatrixXd::Identity(n, std::min(n, k));
    Eigen::MatrixXd Ru = qu.matrixQR().topRows(std::min(m, k)).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rv = qv.matrixQR().topRows(std::min(n, k)).triangularView<Eigen::Upper>();

    Eigen::VectorXd mid(k);
    if (k1) mid.head(k1) = S1;
    if (k2) mid.tail(k2) = D;
    Eigen::MatrixXd core = Ru * mid.asDiagonal() * Rv.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv[rank] > abs_threshold) ++rank;

    LowRankBlock out;
    out.U = Qu * svd.matrixU().leftCols(rank);
    out.S = sv.head(rank);
    out.V = Qv * svd.matrixV().leftCols(rank);
    return out;
}

struct CholeskyContext {
    double abs_threshold;
    const HodlrOptions* opts;
};

// W <- W - A D A^T restricted to the node's row range (A indexed by the
// node-local rows), keeping the tree shape and recompressing touched
// off-diagonal blocks.
void downdate_node(HodlrNode* node, const Eigen::MatrixXd& A, const Eigen::VectorXd& D,
                   const CholeskyContext& ctx) {
    if (D.size() == 0) return;
    if (node->is_leaf()) {
        node->dense.noalias() -= A * D.asDiagonal() * A.transpose();
        return;
    }
    const int h = node->first->size;
    downdate_node(node->first.get(), A.topRows(h), D, ctx);
    downdate_node(node->second.get(), A.bottomRows(node->size - h), D, ctx);
    node->off = recompress_sum(node->off.U, node->off.S, node->off.V, A.topRows(h), -D,
                               A.bottomRows(node->size - h), ctx.abs_threshold);
}

// Solves R11^T Z = Y columnwise for the hierarchical factor (forward).
void solve_transposed_columns(const HodlrNode* R, Eigen::MatrixXd& Y);

std::unique_ptr<HodlrNode> factor_node(std::unique_ptr<HodlrNode> W, const CholeskyContext& ctx) {
    if (W->is_leaf()) {
        Eigen::LLT<Eigen::MatrixXd> llt(W->dense);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite(W->r0, "hodlr_cholesky: leaf at row " +
                                                 std::to_string(W->r0) +
                                                 " is not positive definite");
        auto R = std::make_unique<HodlrNode>();
        R->r0 = W->r0;
        R->size = W->size;
        R->level = W->level;
        R->dense = llt.matrixU();
        return R;
    }
    const int h = W->first->size;
    auto R = std::make_unique<HodlrNode>();
    R->r0 = W->r0;
    R->size = W->size;
    R->level = W->level;

    // R11 from the leading block.
    R->first = factor_node(std::move(W->first), ctx);

    // R12 = R11^{-T} U S V^T; re-orthonormalize the solved columns.
    const LowRankBlock& B = W->off;
    if (B.rank() > 0) {
        Eigen::MatrixXd Uh = B.U;
        solve_transposed_columns(R->first.get(), Uh);
        R->off = recompress_sum(Eigen::MatrixXd(h, 0), Eigen::VectorXd(0),
                                Eigen::MatrixXd(B.V.rows(), 0), Uh, B.S, B.V,
                                ctx.abs_threshold);
    } else {
        R->off = LowRankBlock{Eigen::MatrixXd(h, 0), Eigen::VectorXd(0),
                              Eigen::MatrixXd(W->size - h, 0)};
    }

    // Downdate the trailing block by R12^T R12 = V (S U^T U S) V^T.
    if (R->off.rank() > 0) {
        const Eigen::MatrixXd& U = R->off.U;
        Eigen::MatrixXd T = R->off.S.asDiagonal() * (U.transpose() * U) * R->off.S.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
        Eigen::MatrixXd Adown = R->off.V * eig.eigenvectors();
        downdate_node(W->second.get(), Adown, eig.eigenvalues(), ctx);
    }
    if (ctx.opts->spd_probe && *ctx.opts->spd_probe) {
        Eigen::MatrixXd dd = node_to_dense(W->second.get(), false);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dd);
        (*ctx.opts->spd_probe)(W->second->level, eig.eigenvalues().minCoeff());
    }

    R->second = factor_node(std::move(W->second), ctx);
    return R;
}

void apply_upper_node(const HodlrNode* R, const double* x, double* y, bool transposed) {
    if (R->is_leaf()) {
        Eigen::Map<const Eigen::VectorXd> xv(x, R->size);
        Eigen::Map<Eigen::VectorXd> yv(y, R->size);
        if (transposed)
            yv.noalias() += R->dense.transpose() * xv;
        else
            yv.noalias() += R->dense * xv;
        return;
    }
    const int h = R->first->size;
    apply_upper_node(R->first.get(), x, y, transposed);
    apply_upper_node(R->second.get(), x + h, y + h, transposed);
    if (R->off.rank() > 0) {
        Eigen::Map<const Eigen::VectorXd> x1(x, h), x2(x + h, R->size - h);
        Eigen::Map<Eigen::VectorXd> y1(y, h), y2(y + h, R->size - h);
        if (transposed)
            y2.noalias() += R->off.V * (R->off.S.asDiagonal() * (R->off.U.transpose() * x1));
        else
            y1.noalias() += R->off.U * (R->off.S.asDiagonal() * (R->off.V.transpose() * x2));
    }
}

void solve_upper_node(const HodlrNode* R, Eigen::Ref<Eigen::VectorXd> b) {
    // R x = b in place.
    if (R->is_leaf()) {
        R->dense.triangularView<Eigen::Upper>().solveInPlace(b);
        return;
    }
    const int h = R->first->size;
    solve_upper_node(R->second.get(), b.tail(R->size - h));
    if (R->off.rank() > 0)
        b.head(h).noalias() -=
            R->off.U * (R->off.S.asDiagonal() * (R->off.V.transpose() * b.tail(R->size - h)));
    solve_upper_node(R->first.get(), b.head(h));
}

void solve_upper_transposed_node(const HodlrNode* R, Eigen::Ref<Eigen::VectorXd> b) {
    // R^T x = b in place.
    if (R->is_leaf()) {
        R->dense.transpose().triangularView<Eigen::Lower>().solveInPlace(b);
        return;
    }
    const int h = R->first->size;
    solve_upper_transposed_node(R->first.get(), b.head(h));
    if (R->off.rank() > 0)
        b.tail(R->size - h).noalias() -=
            R->off.V * (R->off.S.asDiagonal() * (R->off.U.transpose() * b.head(h)));
    solve_upper_transposed_node(R->second.get(), b.tail(R->size - h));
}

void solve_transposed_columns(const HodlrNode* R, Eigen::MatrixXd& Y) {
    for (int j = 0; j < Y.cols(); ++j) {
        Eigen::VectorXd col = Y.col(j);
        solve_upper_transposed_node(R, col);
        Y.col(j) = col;
    }
}

}  // namespace

HodlrCholesky hodlr_cholesky(const HodlrMatrix& W, const HodlrOptions& opts) {
    CholeskyContext ctx{opts.tol * W.sigma_root, &opts};
    if (ctx.abs_threshold <= 0.0) ctx.abs_threshold = opts.tol;
    // Factor a working copy; the downdates mutate it level by level.
    std::function<std::unique_ptr<HodlrNode>(const HodlrNode*)> clone =
        [&](const HodlrNode* src) {
            auto dst = std::make_unique<HodlrNode>();
            dst->r0 = src->r0;
            dst->size = src->size;
            dst->level = src->level;
            dst->dense = src->dense;
            dst->off = src->off;
            if (src->first) dst->first = clone(src->first.get());
            if (src->second) dst->second = clone(src->second.get());
            return dst;
        };
    HodlrCholesky R;
    R.n = W.n;
    auto work = clone(W.root.get());
    R.root = factor_node(std::move(work), ctx);
    return R;
}

namespace {

void extract_band_node(const HodlrNode* R, Eigen::VectorXd& diag, Eigen::VectorXd& super) {
    if (R->is_leaf()) {
        for (int k = 0; k < R->size; ++k) {
            diag[R->r0 + k] = R->dense(k, k);
            if (k + 1 < R->size) super[R->r0 + k] = R->dense(k, k + 1);
        }
        return;
    }
    const int h = R->first->size;
    extract_band_node(R->first.get(), diag, super);
    extract_band_node(R->second.get(), diag, super);
    // The boundary superdiagonal entry lives in the off-diagonal block.
    double v = 0.0;
    if (R->off.rank() > 0)
        v = (R->off.U.row(h - 1) * R->off.S.asDiagonal() * R->off.V.row(0).transpose())(0, 0);
    super[R->r0 + h - 1] = v;
}

}  // namespace

void hodlr_upper_band(const HodlrCholesky& R, Eigen::VectorXd& diag, Eigen::VectorXd& super) {
    diag.resize(R.n);
    super.resize(R.n - 1);
    extract_band_node(R.root.get(), diag, super);
}

Eigen::VectorXd hodlr_apply_upper(const HodlrCholesky& R, const Eigen::VectorXd& x,
                                  bool transposed) {
    if (x.size() != R.n) throw DimensionMismatch("hodlr_apply_upper: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(R.n);
    apply_upper_node(R.root.get(), x.data(), y.data(), transposed);
    return y;
}

Eigen::VectorXd hodlr_solve_triangular(const HodlrCholesky& R, const Eigen::VectorXd& b,
                                       bool transposed) {
    if (b.size() != R.n) throw DimensionMismatch("hodlr_solve_triangular: size mismatch");
    Eigen::VectorXd x = b;
    if (transposed)
        solve_upper_transposed_node(R.root.get(), x);
    else
        solve_upper_node(R.root.get(), x);
    return x;
}

double HodlrCholesky::upper_entry(int i, int j) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    apply_upper_node(root.get(), e.data(), col.data(), false);
    return col[i];
}

namespace {

void report_node(const HodlrNode* node, std::vector<RankReportRow>& rows) {
    if (node->is_leaf()) return;
    const int h = node->first->size;
    rows.push_back({node->level, node->r0, node->r0 + h, h, node->size - h, node->off.rank()});
    report_node(node->first.get(), rows);
    report_node(node->second.get(), rows);
}

}  // namespace

std::vector<RankReportRow> rank_report(const HodlrMatrix& A) {
    std::vector<RankReportRow> rows;
    report_node(A.root.get(), rows);
    return rows;
}

std::vector<RankReportRow> rank_report(const HodlrCholesky& R) {
    std::vector<RankReportRow> rows;
    report_node(R.root.get(), rows);
    return rows;
}

RankBoundResult rank_bound(double alpha, double eps, int n) {
    if (n < 4) throw InvalidParameter("rank_bound: n >= 4 required");
    const double s = std::floor(n / 2.0);
    const double z = (s - 1.0) / (s + 1.0 + 2.0 * std::sqrt(s));
    const double ratio = 2.0 * alpha * std::exp(1.0) * z / (1.0 - z);
    const double num = std::log(eps / 2.0 * std::pow((s - 1.0) * (1.0 - z) * (1.0 - z) / (4.0 * z),
                                                     alpha));
    const double den = std::log(ratio);
    const double r = num / den;
    return RankBoundResult{r, z, ratio, ratio < 1.0 && r > 0.0};
}

}  // namespace opmod
