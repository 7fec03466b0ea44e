#ifndef OPMOD_BANDED_HPP
#define OPMOD_BANDED_HPP

#include <Eigen/Dense>

#include "opmod/errors.hpp"
#include "opmod/polynomial.hpp"

namespace opmod {

// Finite section of a multiplication matrix X_P.  Column k holds the
// three-term recurrence for x p_k:  X[k+1,k] = dl[k], X[k,k] = d[k],
// X[k-1,k] = du[k-1].
struct TridiagonalSection {
    int n = 0;
    Eigen::VectorXd dl, d, du;  // lengths n-1, n, n-1

    TridiagonalSection() = default;
    TridiagonalSection(Eigen::VectorXd dl_, Eigen::VectorXd d_, Eigen::VectorXd du_)
        : n(static_cast<int>(d_.size())), dl(std::move(dl_)), d(std::move(d_)), du(std::move(du_)) {
        if (dl.size() != n - 1 || du.size() != n - 1)
            throw DimensionMismatch("tridiagonal section: off-diagonal lengths must be n-1");
    }

    double at(int i, int j) const {
        if (i == j) return d[i];
        if (i == j + 1) return dl[j];
        if (i + 1 == j) return du[i];
        return 0.0;
    }

    bool irreducible() const {
        for (int k = 0; k + 1 < n; ++k)
            if (dl[k] == 0.0 || du[k] == 0.0) return false;
        return true;
    }

    // y = X v
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd y = d.cwiseProduct(v);
        for (int i = 0; i + 1 < n; ++i) {
            y[i] += du[i] * v[i + 1];
            y[i + 1] += dl[i] * v[i];
        }
        return y;
    }

    // y = X^T v
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
        Eigen::VectorXd y = d.cwiseProduct(v);
        for (int i = 0; i + 1 < n; ++i) {
            y[i] += dl[i] * v[i + 1];
            y[i + 1] += du[i] * v[i];
        }
        return y;
    }

    TridiagonalSection head(int m) const {
        return TridiagonalSection(dl.head(m - 1), d.head(m), du.head(m - 1));
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) A(i, i) = d[i];
        for (int i = 0; i + 1 < n; ++i) {
            A(i + 1, i) = dl[i];
            A(i, i + 1) = du[i];
        }
        return A;
    }
};

// Square banded section with explicit bandwidths, column-major band storage.
// Entries outside the band are exactly zero.
class BandedSection {
  public:
    BandedSection() = default;
    BandedSection(int n, int lower_bw, int upper_bw)
        : n_(n), lb_(lower_bw), ub_(upper_bw),
          data_(Eigen::MatrixXd::Zero(lower_bw + upper_bw + 1, n)) {}

    static BandedSection identity(int n) {
        BandedSection I(n, 0, 0);
        I.data_.setOnes();
        return I;
    }

    static BandedSection from_tridiagonal(const TridiagonalSection& X) {
        BandedSection A(X.n, 1, 1);
        for (int j = 0; j < X.n; ++j) A.set(j, j, X.d[j]);
        for (int j = 0; j + 1 < X.n; ++j) {
            A.set(j + 1, j, X.dl[j]);
            A.set(j, j + 1, X.du[j]);
        }
        return A;
    }

    int size() const { return n_; }
    int lower_bandwidth() const { return lb_; }
    int upper_bandwidth() const { return ub_; }

    bool in_band(int i, int j) const {
        int k = i - j;
        return k >= -ub_ && k <= lb_;
    }

    double at(int i, int j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_ || !in_band(i, j)) return 0.0;
        return data_(ub_ + i - j, j);
    }

    void set(int i, int j, double v) { data_(ub_ + i - j, j) = v; }
    void add(int i, int j, double v) { data_(ub_ + i - j, j) += v; }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
        for (int j = 0; j < n_; ++j) {
            const int i0 = std::max(0, j - ub_), i1 = std::min(n_ - 1, j + lb_);
            for (int i = i0; i <= i1; ++i) y[i] += data_(ub_ + i - j, j) * v[j];
        }
        return y;
    }

    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
        for (int j = 0; j < n_; ++j) {
            const int i0 = std::max(0, j - ub_), i1 = std::min(n_ - 1, j + lb_);
            for (int i = i0; i <= i1; ++i) y[j] += data_(ub_ + i - j, j) * v[i];
        }
        return y;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
        for (int j = 0; j < n_; ++j) {
            const int i0 = std::max(0, j - ub_), i1 = std::min(n_ - 1, j + lb_);
            for (int i = i0; i <= i1; ++i) A(i, j) = data_(ub_ + i - j, j);
        }
        return A;
    }

    friend BandedSection multiply(const BandedSection& A, const BandedSection& B) {
        if (A.n_ != B.n_) throw DimensionMismatch("banded multiply: size mismatch");
        const int n = A.n_;
        BandedSection C(n, std::min(n - 1, A.lb_ + B.lb_), std::min(n - 1, A.ub_ + B.ub_));
        for (int j = 0; j < n; ++j) {
            const int k0 = std::max(0, j - B.ub_), k1 = std::min(n - 1, j + B.lb_);
            for (int k = k0; k <= k1; ++k) {
                const double bkj = B.data_(B.ub_ + k - j, j);
                if (bkj == 0.0) continue;
                const int i0 = std::max(0, k - A.ub_), i1 = std::min(n - 1, k + A.lb_);
                for (int i = i0; i <= i1; ++i) C.add(i, j, A.data_(A.ub_ + i - k, k) * bkj);
            }
        }
        return C;
    }

    friend BandedSection add(const BandedSection& A, const BandedSection& B) {
        if (A.n_ != B.n_) throw DimensionMismatch("banded add: size mismatch");
        BandedSection C(A.n_, std::max(A.lb_, B.lb_), std::max(A.ub_, B.ub_));
        for (int j = 0; j < A.n_; ++j) {
            const int i0 = std::max(0, j - C.ub_), i1 = std::min(A.n_ - 1, j + C.lb_);
            for (int i = i0; i <= i1; ++i) C.set(i, j, A.at(i, j) + B.at(i, j));
        }
        return C;
    }

    friend BandedSection scale(double s, const BandedSection& A) {
        BandedSection C = A;
        C.data_ *= s;
        return C;
    }

  private:
    int n_ = 0, lb_ = 0, ub_ = 0;
    Eigen::MatrixXd data_;
};

// p(X) for a tridiagonal section, by Horner's rule in banded arithmetic.
inline BandedSection polynomial_of(const Polynomial& p, const TridiagonalSection& X) {
    const int deg = p.degree();
    BandedSection B = scale(p.c[deg], BandedSection::identity(X.n));
    const BandedSection Xb = BandedSection::from_tridiagonal(X);
    for (int k = deg - 1; k >= 0; --k) {
        B = multiply(B, Xb);
        B = add(B, scale(p.c[k], BandedSection::identity(X.n)));
    }
    return B;
}

}  // namespace opmod

#endif
