#ifndef OPMOD_GRAM_HPP
#define OPMOD_GRAM_HPP

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "opmod/banded.hpp"
#include "opmod/linop.hpp"
#include "opmod/moments.hpp"

namespace opmod {

enum class GramStorage { Dense, Banded, ToeplitzPlusHankel };

// Symmetric positive-definite principal section of the Gram matrix W_P.
class GramSection {
  public:
    GramSection(MomentVector moments, int n, Eigen::MatrixXd dense);
    GramSection(MomentVector moments, int n, BandedSection banded);
    GramSection(MomentVector moments, int n);  // ToeplitzPlusHankel (ChebyshevT)

    int size() const { return n_; }
    GramStorage storage() const { return storage_; }
    const Family& family() const { return moments_.family; }
    const MomentVector& moments() const { return moments_; }
    const Eigen::MatrixXd& dense() const { return dense_; }
    const BandedSection& banded() const { return banded_; }
    int bandwidth() const { return banded_.lower_bandwidth(); }
    const std::string& warning() const { return warning_; }
    void set_warning(std::string w) { warning_ = std::move(w); }

    double entry(int i, int j) const;
    Eigen::VectorXd column(int j) const;
    Eigen::VectorXd first_column() const { return column(0); }
    Eigen::MatrixXd to_dense() const;
    double frobenius_norm() const;

  private:
    MomentVector moments_;
    int n_;
    GramStorage storage_;
    Eigen::MatrixXd dense_;
    BandedSection banded_;
    std::string warning_;
};

// Dense O(n^2) fill by the five-term recurrence; needs 2n-1 moments and an
// X section of at least that size.
GramSection gram_from_moments(const MomentVector& moments, const TridiagonalSection& X, int n);

// O(b n) banded fill; the moments must vanish past index b relative to
// drop_tol = 1e-15 max|mu|.
GramSection gram_banded_from_moments(const MomentVector& moments, const TridiagonalSection& X,
                                     int n, int b);

// Downward fill from caller-supplied final two columns (columns n-2, n-1 of
// the accurate section); no producer for those columns is shipped.
GramSection gram_from_moments_downward(const MomentVector& moments, const TridiagonalSection& X,
                                       int n, const Eigen::MatrixXd& last_two_columns);

// Toeplitz-plus-Hankel view of the Chebyshev-Gram matrix (no fill).
GramSection gram_tph(const MomentVector& moments, int n);

// Smallest b such that |mu_k| <= 1e-15 max|mu| for all k > b (n-1 if none).
int moment_band_limit(const MomentVector& moments);

// Runs the dense recurrence with rolling column buffers and returns a
// checksum; used to time the fill at sizes where storing W is pointless.
double gram_fill_streaming(const MomentVector& moments, const TridiagonalSection& X, int n);

// Fills the dense Chebyshev-Gram section entrywise from the
// Toeplitz-plus-Hankel identity.
void fill_tph_dense(const MomentVector& moments, int n, Eigen::MatrixXd& out);

// Fast subblock products with the Chebyshev-Gram matrix via FFT convolution
// of the Toeplitz and Hankel symbols; O(N log N) per product, with the
// fixed moment-symbol transforms cached per block geometry.
class ChebyshevGramOperator final : public LinearBlockOperator {
  public:
    explicit ChebyshevGramOperator(MomentVector moments, int n);

    int size() const override { return n_; }
    Eigen::VectorXd apply_block(int r0, int nr, int c0, int nc, const Eigen::VectorXd& v,
                                bool transpose) const override;
    Eigen::MatrixXd dense_block(int r0, int nr, int c0, int nc) const override;

    double entry(int i, int j) const {
        return 0.5 * (mu_[i + j] + mu_[std::abs(i - j)]);
    }

  private:
    using Cvec = std::vector<std::complex<double>>;
    const Cvec& symbol_fft(bool hankel, long start, int len, int L) const;

    MomentVector moments_;
    Eigen::VectorXd mu_;
    int n_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<unsigned long long, std::shared_ptr<Cvec>> cache_;
};

// tph_matvec: product of the contiguous subblock W_T[r0:r0+nr, c0:c0+nc]
// with v, through a shared operator instance.
Eigen::VectorXd tph_matvec(const ChebyshevGramOperator& op, int r0, int nr, int c0, int nc,
                           const Eigen::VectorXd& v);

std::unique_ptr<LinearBlockOperator> make_block_operator(const GramSection& W);

}  // namespace opmod

#endif
