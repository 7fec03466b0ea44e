#include "opmod/gram.hpp"

#include <fftw3.h>
#include <cmath>

#include "opmod/errors.hpp"

namespace opmod {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Five-term recurrence, 0-based: entry i of column j from columns j-1, j-2.
// The X[i-1,i] term drops at i = 0 and the column j-2 term drops at j = 1.
inline double recurrence_entry(const TridiagonalSection& X, const double* c1, const double* c2,
                               int i, int j, int rows_c1) {
    double acc = X.d[i] * c1[i];
    if (i > 0) acc += X.du[i - 1] * c1[i - 1];
    if (i + 1 < rows_c1) acc += X.dl[i] * c1[i + 1];
    acc -= c1[i] * X.d[j - 1];
    if (j >= 2) acc -= c2[i] * X.du[j - 2];
    return acc / X.dl[j - 1];
}

void warn_if_unbounded(GramSection& W) {
    if (W.family().kind() == FamilyKind::Laguerre && W.size() > 32)
        W.set_warning(
            "laguerre gram fill beyond n = 32 is numerically unstable in double precision");
}

}  // namespace

GramSection::GramSection(MomentVector moments, int n, Eigen::MatrixXd dense)
    : moments_(std::move(moments)), n_(n), storage_(GramStorage::Dense),
      dense_(std::move(dense)) {}

GramSection::GramSection(MomentVector moments, int n, BandedSection banded)
    : moments_(std::move(moments)), n_(n), storage_(GramStorage::Banded),
      banded_(std::move(banded)) {}

GramSection::GramSection(MomentVector moments, int n)
    : moments_(std::move(moments)), n_(n), storage_(GramStorage::ToeplitzPlusHankel) {
    if (moments_.family.kind() != FamilyKind::ChebyshevT)
        throw InvalidParameter("Toeplitz-plus-Hankel storage is a Chebyshev-Gram identity");
    if (moments_.size() < 2 * n_ - 1)
        throw InsufficientMoments("gram_tph: need 2n-1 moments");
}

double GramSection::entry(int i, int j) const {
    switch (storage_) {
        case GramStorage::Dense: return dense_(i, j);
        case GramStorage::Banded: return banded_.at(i, j);
        case GramStorage::ToeplitzPlusHankel:
            return 0.5 * (moments_.values[i + j] + moments_.values[std::abs(i - j)]);
    }
    return 0.0;
}

Eigen::VectorXd GramSection::column(int j) const {
    Eigen::VectorXd c(n_);
    for (int i = 0; i < n_; ++i) c[i] = entry(i, j);
    return c;
}

Eigen::MatrixXd GramSection::to_dense() const {
    if (storage_ == GramStorage::Dense) return dense_;
    Eigen::MatrixXd A(n_, n_);
    for (int j = 0; j < n_; ++j) A.col(j) = column(j);
    return A;
}

double GramSection::frobenius_norm() const {
    if (storage_ == GramStorage::Dense) return dense_.norm();
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += column(j).squaredNorm();
    return std::sqrt(s);
}

GramSection gram_from_moments(const MomentVector& moments, const TridiagonalSection& X, int n) {
    if (moments.size() < 2 * n - 1)
        throw InsufficientMoments("gram_from_moments: need 2n-1 moments");
    if (X.n < 2 * n - 1)
        throw DimensionMismatch("gram_from_moments: X must be at least the (2n-1)-section");

    Eigen::MatrixXd W(n, n);
    // Column j carries 2n-1-j scratch rows; two rolling extended columns.
    Eigen::VectorXd prev = moments.values.head(2 * n - 1), prev2, cur;
    W.col(0) = prev.head(n);
    for (int j = 1; j < n; ++j) {
        const int rows = 2 * n - 1 - j;
        cur.resize(rows);
        for (int i = 0; i < rows; ++i)
            cur[i] = recurrence_entry(X, prev.data(), j >= 2 ? prev2.data() : nullptr, i, j,
                                      rows + 1);
        if (!cur.allFinite()) {
            for (int i = 0; i < rows; ++i)
                if (!std::isfinite(cur[i]))
                    throw NonFiniteEntry(i, j, "gram_from_moments: non-finite entry at (" +
                                                   std::to_string(i) + "," + std::to_string(j) +
                                                   ")");
        }
        W.col(j).head(std::min(n, rows)) = cur.head(std::min(n, rows));
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
    // Mirror the strict lower triangle for exact symmetry.
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i) W(j, i) = W(i, j);

    GramSection out(moments, n, std::move(W));
    warn_if_unbounded(out);
    return out;
}

double gram_fill_streaming(const MomentVector& moments, const TridiagonalSection& X, int n) {
    if (moments.size() < 2 * n - 1)
        throw InsufficientMoments("gram_fill_streaming: need 2n-1 moments");
    Eigen::VectorXd prev = moments.values.head(2 * n - 1), prev2, cur;
    double checksum = prev[0];
    for (int j = 1; j < n; ++j) {
        const int rows = 2 * n - 1 - j;
        cur.resize(rows);
        for (int i = 0; i < rows; ++i)
            cur[i] = recurrence_entry(X, prev.data(), j >= 2 ? prev2.data() : nullptr, i, j,
                                      rows + 1);
        checksum += cur[j];
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
    return checksum;
}

int moment_band_limit(const MomentVector& moments) {
    const double drop = 1e-15 * moments.values.cwiseAbs().maxCoeff();
    int b = moments.size() - 1;
    while (b > 0 && std::fabs(moments.values[b]) <= drop) --b;
    return b;
}

GramSection gram_banded_from_moments(const MomentVector& moments, const TridiagonalSection& X,
                                     int n, int b) {
    const double drop = 1e-15 * moments.values.cwiseAbs().maxCoeff();
    for (int k = b + 1; k < moments.size(); ++k)
        if (std::fabs(moments.values[k]) > drop)
            throw MomentsNotBandLimited("gram_banded_from_moments: |mu_" + std::to_string(k) +
                                        "| exceeds drop_tol for bandwidth " + std::to_string(b));
    if (X.n < n + b + 1)
        throw DimensionMismatch("gram_banded_from_moments: X section must reach n + b + 1");

    // Fill the full band of the leading columns on an extended section so
    // rows past n-1 feed the recurrence; entries outside the band are
    // exactly zero, which closes the recurrence in O(b n).
    const int n_ext = n + b + 1;
    BandedSection Wb(n_ext, b, b);
    for (int i = 0; i <= std::min(b, n_ext - 1); ++i)
        Wb.set(i, 0, i < moments.size() ? moments.values[i] : 0.0);
    for (int j = 1; j < n; ++j) {
        const int i0 = std::max(0, j - b), i1 = std::min(n_ext - 1, j + b);
        for (int i = i0; i <= i1; ++i) {
            double acc = X.d[i] * Wb.at(i, j - 1);
            if (i > 0) acc += X.du[i - 1] * Wb.at(i - 1, j - 1);
            acc += X.dl[i] * Wb.at(i + 1, j - 1);
            acc -= Wb.at(i, j - 1) * X.d[j - 1];
            if (j >= 2) acc -= Wb.at(i, j - 2) * X.du[j - 2];
            acc /= X.dl[j - 1];
            if (!std::isfinite(acc))
                throw NonFiniteEntry(i, j, "gram_banded_from_moments: non-finite entry");
            Wb.set(i, j, acc);
        }
    }
    BandedSection Wn(n, b, b);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i <= std::min(n - 1, j + b); ++i) {
            const double v = Wb.at(i, j);
            Wn.set(i, j, v);
            if (i != j) Wn.set(j, i, v);
        }
    }
    GramSection out(moments, n, std::move(Wn));
    warn_if_unbounded(out);
    return out;
}

GramSection gram_from_moments_downward(const MomentVector& moments, const TridiagonalSection& X,
                                       int n, const Eigen::MatrixXd& last_two_columns) {
    if (last_two_columns.rows() != n || last_two_columns.cols() != 2)
        throw DimensionMismatch("gram_from_moments_downward: need n x 2 trailing columns");
    if (X.n < n) throw DimensionMismatch("gram_from_moments_downward: X section too small");

    Eigen::MatrixXd W(n, n);
    W.col(n - 2) = last_two_columns.col(0);
    W.col(n - 1) = last_two_columns.col(1);
    // Solve the five-term recurrence for the left neighbour: about column
    // j+1, W[i,j] X[j,j+1] = (X^T row terms) - W[i,j+2] X[j+2,j+1] - W[i,j+1] X[j+1,j+1].
    for (int j = n - 3; j >= 0; --j) {
        const int jc = j + 1;  // recurrence centred on column jc
        for (int i = 0; i < n - 1; ++i) {
            double acc = X.d[i] * W(i, jc);
            if (i > 0) acc += X.du[i - 1] * W(i - 1, jc);
            acc += X.dl[i] * W(i + 1, jc);
            acc -= W(i, jc) * X.d[jc];
            acc -= W(i, jc + 1) * X.dl[jc];
            W(i, j) = acc / X.du[j];
        }
        W(n - 1, j) = W.col(n - 1)[j];  // symmetry against the given column
    }
    GramSection out(moments, n, std::move(W));
    warn_if_unbounded(out);
    return out;
}

GramSection gram_tph(const MomentVector& moments, int n) { return GramSection(moments, n); }

void fill_tph_dense(const MomentVector& moments, int n, Eigen::MatrixXd& out) {
    if (moments.family.kind() != FamilyKind::ChebyshevT)
        throw InvalidParameter("fill_tph_dense: Chebyshev-Gram identity only");
    if (moments.size() < 2 * n - 1) throw InsufficientMoments("fill_tph_dense: need 2n-1 moments");
    out.resize(n, n);
    const double* mu = moments.values.data();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out(i, j) = 0.5 * (mu[i + j] + mu[std::abs(i - j)]);
}

// ---------------------------------------------------------------------------
// FFT machinery for the Toeplitz-plus-Hankel products.

namespace {

struct FftPlans {
    std::mutex mutex;
    std::unordered_map<int, fftw_plan> fwd, bwd;
    std::unordered_map<int, fftw_complex*> buf;

    fftw_complex* buffer(int L) {
        auto it = buf.find(L);
        if (it != buf.end()) return it->second;
        fftw_complex* p = fftw_alloc_complex(L);
        buf[L] = p;
        return p;
    }
    fftw_plan plan(int L, bool forward) {
        auto& m = forward ? fwd : bwd;
        auto it = m.find(L);
        if (it != m.end()) return it->second;
        fftw_complex* p = buffer(L);
        fftw_plan pl = fftw_plan_dft_1d(L, p, p, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                        FFTW_ESTIMATE);
        m[L] = pl;
        return pl;
    }
};

FftPlans& plans() {
    static FftPlans p;
    return p;
}

int fft_length(int m) {
    int L = 1;
    while (L < m) L <<= 1;
    return L;
}

// In-place FFT of v (length L); the shared plans and scratch buffer are
// serialized internally.
void run_fft(std::vector<std::complex<double>>& v, bool forward) {
    const int L = static_cast<int>(v.size());
    FftPlans& P = plans();
    std::lock_guard<std::mutex> lock(P.mutex);
    fftw_complex* buf = P.buffer(L);
    for (int i = 0; i < L; ++i) {
        buf[i][0] = v[i].real();
        buf[i][1] = v[i].imag();
    }
    fftw_execute(P.plan(L, forward));
    for (int i = 0; i < L; ++i) v[i] = {buf[i][0], buf[i][1]};
}

}  // namespace

ChebyshevGramOperator::ChebyshevGramOperator(MomentVector moments, int n)
    : moments_(std::move(moments)), mu_(moments_.values), n_(n) {
    if (moments_.family.kind() != FamilyKind::ChebyshevT)
        throw InvalidParameter("ChebyshevGramOperator: ChebyshevT moments required");
    if (mu_.size() < 2 * n - 1)
        throw InsufficientMoments("ChebyshevGramOperator: need 2n-1 moments");
}

const ChebyshevGramOperator::Cvec& ChebyshevGramOperator::symbol_fft(bool hankel, long start,
                                                                     int len, int L) const {
    // L is a function of len, so (hankel, start, len) identifies the symbol.
    const unsigned long long key = (static_cast<unsigned long long>(hankel) << 62) ^
                                   (static_cast<unsigned long long>(start + (1L << 24)) << 32) ^
                                   static_cast<unsigned long long>(len);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }
    auto sym = std::make_shared<Cvec>(L, std::complex<double>(0, 0));
    for (int k = 0; k < len; ++k) {
        const long idx = start + k;
        (*sym)[k] = 0.5 * mu_[hankel ? idx : std::labs(idx)];
    }
    run_fft(*sym, true);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(sym));
    return *it->second;
}

Eigen::VectorXd ChebyshevGramOperator::apply_block(int r0, int nr, int c0, int nc,
                                                   const Eigen::VectorXd& v,
                                                   bool transpose) const {
    if (transpose) return apply_block(c0, nc, r0, nr, v, false);  // W symmetric
    if (v.size() != nc) throw DimensionMismatch("tph_matvec: vector length mismatch");
    if (r0 < 0 || c0 < 0 || r0 + nr + c0 + nc - 2 > mu_.size() - 1)
        throw ConfigError("tph_matvec: range out of moment coverage");

    if (static_cast<long>(nr) * nc <= 8192) {  // direct product for small blocks
        Eigen::VectorXd y = Eigen::VectorXd::Zero(nr);
        for (int j = 0; j < nc; ++j) {
            const double vj = v[j];
            if (vj == 0.0) continue;
            for (int i = 0; i < nr; ++i) y[i] += entry(r0 + i, c0 + j) * vj;
        }
        return y;
    }

    // y_T[i] = sum_j t[i-j] v[j] pairs the Toeplitz symbol with v itself;
    // y_H[i] = sum_j h[i+j] v[j] pairs the Hankel symbol with reversed v,
    // whose transform is a twiddled conjugate of V for real input.
    const int len = nr + nc - 1;
    const int L = fft_length(len);
    const Cvec& tsym = symbol_fft(false, static_cast<long>(r0) - c0 - (nc - 1), len, L);
    const Cvec& hsym = symbol_fft(true, static_cast<long>(r0) + c0, len, L);

    Cvec vf(L, std::complex<double>(0, 0));
    for (int j = 0; j < nc; ++j) vf[j] = v[j];
    run_fft(vf, true);
    Cvec prod(L);
    for (int k = 0; k < L; ++k) {
        const long phase = (static_cast<long>(k) * (nc - 1)) % L;  // exact mod-L phase
        const double ang = -kTwoPi * phase / L;
        const std::complex<double> twiddle(std::cos(ang), std::sin(ang));
        prod[k] = tsym[k] * vf[k] + hsym[k] * twiddle * std::conj(vf[k]);
    }
    run_fft(prod, false);

    Eigen::VectorXd y(nr);
    for (int i = 0; i < nr; ++i) y[i] = prod[i + nc - 1].real() / L;
    return y;
}

Eigen::MatrixXd ChebyshevGramOperator::dense_block(int r0, int nr, int c0, int nc) const {
    Eigen::MatrixXd B(nr, nc);
    for (int j = 0; j < nc; ++j)
        for (int i = 0; i < nr; ++i) B(i, j) = entry(r0 + i, c0 + j);
    return B;
}

Eigen::VectorXd tph_matvec(const ChebyshevGramOperator& op, int r0, int nr, int c0, int nc,
                           const Eigen::VectorXd& v) {
    return op.apply_block(r0, nr, c0, nc, v, false);
}

std::unique_ptr<LinearBlockOperator> make_block_operator(const GramSection& W) {
    if (W.storage() == GramStorage::ToeplitzPlusHankel)
        return std::make_unique<ChebyshevGramOperator>(W.moments(), W.size());
    return std::make_unique<DenseBlockOperator>(W.to_dense());
}

}  // namespace opmod
