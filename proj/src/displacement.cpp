#include "opmod/displacement.hpp"

#include <lapacke.h>
#include <cmath>

#include "opmod/errors.hpp"

namespace opmod {

TriangularFactor::TriangularFactor(int n, bool banded, int bw) : n_(n), banded_(banded), bw_(bw) {
    if (banded_)
        data_.assign(static_cast<std::size_t>(n) * (bw + 1), 0.0);
    else
        data_.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
}

TriangularFactor TriangularFactor::dense(int n) { return TriangularFactor(n, false, n - 1); }
TriangularFactor TriangularFactor::banded(int n, int bw) { return TriangularFactor(n, true, bw); }

double TriangularFactor::lower(int i, int j) const {
    if (i < j || i >= n_) return 0.0;
    if (banded_) return (i - j <= bw_) ? data_[offset(j) + (i - j)] : 0.0;
    return data_[offset(j) + (i - j)];
}

Eigen::VectorXd TriangularFactor::solve_upper(const Eigen::VectorXd& b) const {
    // R x = b with R = L^T: back substitution, R[j, j+k] = L(j+k, j).
    Eigen::VectorXd x = b;
    for (int j = n_ - 1; j >= 0; --j) {
        const double* col = column(j);
        const int len = column_length(j);
        double acc = x[j];
        for (int k = 1; k < len; ++k) acc -= col[k] * x[j + k];
        x[j] = acc / col[0];
    }
    return x;
}

Eigen::VectorXd TriangularFactor::solve_upper_transposed(const Eigen::VectorXd& b) const {
    // R^T x = L x = b: forward substitution over columns.
    Eigen::VectorXd x = b;
    for (int j = 0; j < n_; ++j) {
        const double* col = column(j);
        const int len = column_length(j);
        x[j] /= col[0];
        const double xj = x[j];
        for (int k = 1; k < len; ++k) x[j + k] -= col[k] * xj;
    }
    return x;
}

Eigen::VectorXd TriangularFactor::apply_upper(const Eigen::VectorXd& x) const {
    // y = R x: y[j] = sum_k L(j+k, j) x[j+k].
    Eigen::VectorXd y(n_);
    for (int j = 0; j < n_; ++j) {
        const double* col = column(j);
        const int len = column_length(j);
        double acc = 0.0;
        for (int k = 0; k < len; ++k) acc += col[k] * x[j + k];
        y[j] = acc;
    }
    return y;
}

Eigen::VectorXd TriangularFactor::apply_upper_transposed(const Eigen::VectorXd& x) const {
    // y = L x.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        const double* col = column(j);
        const int len = column_length(j);
        const double xj = x[j];
        for (int k = 0; k < len; ++k) y[j + k] += col[k] * xj;
    }
    return y;
}

Eigen::MatrixXd TriangularFactor::to_dense_lower() const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        const double* col = column(j);
        const int len = column_length(j);
        for (int k = 0; k < len; ++k) L(j + k, j) = col[k];
    }
    return L;
}

GeneratorPair build_generators(const Eigen::VectorXd& col_second_last,
                               const Eigen::VectorXd& col_last, const TridiagonalSection& X) {
    const int n = static_cast<int>(col_last.size());
    if (col_second_last.size() != n) throw DimensionMismatch("build_generators: column sizes");
    if (X.n < n) throw DimensionMismatch("build_generators: X section too small");

    // Remark-2.5 form: u = W e_{n-2} X[n-2,n-1] + W e_{n-1} X[n-1,n-1]
    //                      - (section of X^T) W e_{n-1}.
    Eigen::VectorXd u = col_second_last * X.du[n - 2] + col_last * X.d[n - 1];
    for (int i = 0; i < n; ++i) {
        double acc = X.d[i] * col_last[i];
        if (i > 0) acc += X.du[i - 1] * col_last[i - 1];
        if (i + 1 < n) acc += X.dl[i] * col_last[i + 1];
        u[i] -= acc;
    }
    GeneratorPair gen;
    gen.G = Eigen::MatrixXd::Zero(n, 2);
    gen.G(n - 1, 0) = 1.0;
    gen.G.col(1) = u;
    return gen;
}

GeneratorPair build_generators(const GramSection& W, const TridiagonalSection& X) {
    const int n = W.size();
    return build_generators(W.column(n - 2), W.column(n - 1), X);
}

namespace {

// Common elimination for the dense and banded displacement Cholesky.
//
// The step state is the current Schur complement's first column c, the
// first-row correction r with X = T + e_1 r^T, and the generators G kept in
// global row coordinates (row k is the current first row).  With a finite
// band, c and r carry at most band+2 leading entries while G lives in the
// trailing rows; until the two regions meet, the generator row read by the
// step is exactly zero and every update touches O(band) data.
TriangularFactor displacement_cholesky(const Eigen::VectorXd& first_column,
                                       const TridiagonalSection& X, const GeneratorPair& gen,
                                       int band) {
    const int n = static_cast<int>(first_column.size());
    if (n < 1) throw InvalidParameter("fast_cholesky: empty problem");
    if (X.n < n) throw DimensionMismatch("fast_cholesky: X section too small");
    if (gen.G.rows() != n) throw DimensionMismatch("fast_cholesky: generator size");

    const bool banded = band >= 0;
    const int switch_len = banded ? 2 * (band + 2) + 4 : 0;
    TriangularFactor L = banded ? TriangularFactor::banded(n, band) : TriangularFactor::dense(n);

    const double pivot_floor = 1e-14 * first_column.cwiseAbs().maxCoeff();

    Eigen::VectorXd c = first_column;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd chat(n);
    Eigen::MatrixXd G = gen.G;

    for (int k = 0; k < n - 1; ++k) {
        const int len = n - k;
        const double c0 = c[0];
        if (!(c0 > pivot_floor))
            throw NotPositiveDefinite(
                k, "fast_cholesky: nonpositive pivot at step " + std::to_string(k));
        const double gamma = X.dl[k];
        if (gamma == 0.0)
            throw IrreducibilityViolated(
                k, "fast_cholesky: zero subdiagonal at step " + std::to_string(k));

        const double g1a = G(k, 0), g1b = G(k, 1);
        const bool full = !banded || len <= switch_len || g1a != 0.0 || g1b != 0.0;
        const int m = full ? len : band + 2;       // live support of c and r
        const int mh = full ? len : std::min(len, m + 1);  // support of chat

        const double d = std::sqrt(c0);
        double* Lcol = L.column(k);
        const int keep = L.column_length(k);
        for (int i = 0; i < keep; ++i) Lcol[i] = (i < m ? c[i] : 0.0) / d;

        // Second column: chat = ((X^T - X_11 I) c - G J G_{k,:}^T) / gamma,
        // with X_11 = T[0,0] + r[0] and (e_1 r^T)^T c = r c_1.
        const double x11 = X.d[k] + r[0];
        for (int i = 0; i < mh; ++i) {
            double acc = r[i] * c0;
            if (i < m) acc += (X.d[k + i] - x11) * c[i];
            if (i >= 1 && i - 1 < m) acc += X.du[k + i - 1] * c[i - 1];
            if (i + 1 < m) acc += X.dl[k + i] * c[i + 1];
            if (full && (g1a != 0.0 || g1b != 0.0)) acc -= G(k + i, 0) * g1b - G(k + i, 1) * g1a;
            chat[i] = acc / gamma;
        }

        // Generator update (reads the old c): G <- G_{2:,:} - l_{2:} G_{1,:} / d.
        if (g1a != 0.0 || g1b != 0.0) {
            for (int i = 1; i < m; ++i) {
                const double f = c[i] / c0;
                G(k + i, 0) -= f * g1a;
                G(k + i, 1) -= f * g1b;
            }
        }

        // New first-row correction r = -(gamma / c_1) l_{2:} d = -(gamma/c0) c_{2:}.
        const double gfac = gamma / c0;
        const int new_r = std::min(len - 1, m - 1);
        for (int i = 0; i < new_r; ++i) r[i] = -gfac * c[i + 1];
        for (int i = new_r; i < m; ++i) r[i] = 0.0;

        // Next first column c = chat_{2:} - (c_2 / c_1) c_{2:}; ascending
        // writes read only not-yet-overwritten old entries.
        const double c1_ratio = c[1] / c0;
        const int new_c = std::min(len - 1, mh - 1);
        for (int i = 0; i < new_c; ++i)
            c[i] = chat[i + 1] - c1_ratio * (i + 1 < m ? c[i + 1] : 0.0);
        for (int i = new_c; i < m; ++i) c[i] = 0.0;
    }

    if (!(c[0] > pivot_floor))
        throw NotPositiveDefinite(n - 1, "fast_cholesky: nonpositive pivot at final step");
    *L.column(n - 1) = std::sqrt(c[0]);
    return L;
}

}  // namespace

TriangularFactor fast_cholesky(const Eigen::VectorXd& first_column, const TridiagonalSection& X,
                               const GeneratorPair& G) {
    return displacement_cholesky(first_column, X, G, -1);
}

TriangularFactor fast_cholesky_banded(const Eigen::VectorXd& first_column,
                                      const TridiagonalSection& X, const GeneratorPair& G,
                                      int b) {
    if (b < 0) throw InvalidParameter("fast_cholesky_banded: bandwidth must be nonnegative");
    return displacement_cholesky(first_column, X, G, b);
}

TriangularFactor cholesky_dense_reference(Eigen::MatrixXd W) {
    const int n = static_cast<int>(W.rows());
    const int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, W.data(), n);
    if (info > 0)
        throw NotPositiveDefinite(info - 1, "cholesky_dense_reference: not positive definite at " +
                                                std::to_string(info - 1));
    if (info < 0) throw InvalidParameter("cholesky_dense_reference: bad argument to dpotrf");
    TriangularFactor L = TriangularFactor::dense(n);
    for (int j = 0; j < n; ++j) {
        double* col = L.column(j);
        for (int i = j; i < n; ++i) col[i - j] = W(i, j);
    }
    return L;
}

TriangularFactor cholesky_dense_reference(const GramSection& W) {
    if (W.storage() == GramStorage::Banded) return cholesky_banded_reference(W);
    return cholesky_dense_reference(W.to_dense());
}

TriangularFactor cholesky_banded_reference(const GramSection& W) {
    if (W.storage() != GramStorage::Banded)
        throw InvalidParameter("cholesky_banded_reference: banded section required");
    const int n = W.size(), b = W.bandwidth();
    // In-band left-looking elimination, O(b^2 n).
    TriangularFactor L = TriangularFactor::banded(n, b);
    for (int j = 0; j < n; ++j) {
        const int len = L.column_length(j);
        double* col = L.column(j);
        for (int i = 0; i < len; ++i) col[i] = W.banded().at(j + i, j);
        for (int p = std::max(0, j - b); p < j; ++p) {
            const double lpj = L.lower(j, p);
            if (lpj == 0.0) continue;
            const double* pc = L.column(p);
            const int plen = L.column_length(p);
            for (int q = j - p; q < plen; ++q) col[q - (j - p)] -= lpj * pc[q];
        }
        if (!(col[0] > 0.0))
            throw NotPositiveDefinite(j, "cholesky_banded_reference: nonpositive pivot at step " +
                                             std::to_string(j));
        const double d = std::sqrt(col[0]);
        col[0] = d;
        for (int i = 1; i < len; ++i) col[i] /= d;
    }
    return L;
}

double reconstruction_residual(const GramSection& W, const TriangularFactor& L) {
    const int n = W.size();
    double num = 0.0, den = 0.0;
    if (L.is_banded() && W.storage() == GramStorage::Banded) {
        const int b = std::max(L.bandwidth(), W.bandwidth());
        for (int j = 0; j < n; ++j) {
            for (int i = j; i <= std::min(n - 1, j + b); ++i) {
                double acc = 0.0;
                const int k1 = std::min(i, j);
                for (int k = std::max(0, i - L.bandwidth()); k <= k1; ++k)
                    acc += L.lower(i, k) * L.lower(j, k);
                const double w = W.entry(i, j);
                const double dif = w - acc;
                num += (i == j ? 1.0 : 2.0) * dif * dif;
                den += (i == j ? 1.0 : 2.0) * w * w;
            }
        }
    } else {
        Eigen::MatrixXd Wd = W.to_dense();
        Eigen::MatrixXd Ld = L.to_dense_lower();
        Eigen::MatrixXd Rres = Wd - Ld * Ld.transpose();
        num = Rres.squaredNorm();
        den = Wd.squaredNorm();
    }
    return std::sqrt(num / den);
}

}  // namespace opmod
