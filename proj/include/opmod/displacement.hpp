#ifndef OPMOD_DISPLACEMENT_HPP
#define OPMOD_DISPLACEMENT_HPP

#include <Eigen/Dense>
#include <vector>

#include "opmod/banded.hpp"
#include "opmod/gram.hpp"

namespace opmod {

// Rank-2 skew generators of X^T W - W X = G J G^T with J = ((0,1),(-1,0)).
// Column 0 of G is the last canonical vector at construction time.
struct GeneratorPair {
    Eigen::MatrixXd G;  // n x 2

    static Eigen::Matrix2d J() {
        Eigen::Matrix2d j;
        j << 0, 1, -1, 0;
        return j;
    }

    Eigen::MatrixXd skew_product() const {  // G J G^T
        return G.col(0) * G.col(1).transpose() - G.col(1) * G.col(0).transpose();
    }
};

// Lower-triangular Cholesky factor L (R = L^T), packed dense columns or
// banded storage with strictly positive diagonal.
class TriangularFactor {
  public:
    static TriangularFactor dense(int n);
    static TriangularFactor banded(int n, int bandwidth);

    int size() const { return n_; }
    bool is_banded() const { return banded_; }
    int bandwidth() const { return bw_; }

    double lower(int i, int j) const;     // L(i,j), zero above the diagonal
    double upper(int i, int j) const { return lower(j, i); }  // R = L^T
    double diagonal(int k) const { return lower(k, k); }

    double* column(int j) { return data_.data() + offset(j); }
    const double* column(int j) const { return data_.data() + offset(j); }
    int column_length(int j) const { return banded_ ? std::min(bw_ + 1, n_ - j) : n_ - j; }

    // Solves with the upper factor R = L^T: R x = b or R^T x = b.
    Eigen::VectorXd solve_upper(const Eigen::VectorXd& b) const;
    Eigen::VectorXd solve_upper_transposed(const Eigen::VectorXd& b) const;
    // y = R x and y = R^T x.
    Eigen::VectorXd apply_upper(const Eigen::VectorXd& x) const;
    Eigen::VectorXd apply_upper_transposed(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd to_dense_lower() const;

  private:
    TriangularFactor(int n, bool banded, int bw);
    std::size_t offset(int j) const {
        if (banded_) return static_cast<std::size_t>(j) * (bw_ + 1);
        return static_cast<std::size_t>(j) * n_ - static_cast<std::size_t>(j) * (j - 1) / 2;
    }
    int n_;
    bool banded_;
    int bw_;
    std::vector<double> data_;
};

// Generators from the last two columns of the n x n section only.
GeneratorPair build_generators(const GramSection& W, const TridiagonalSection& X);
GeneratorPair build_generators(const Eigen::VectorXd& col_second_last,
                               const Eigen::VectorXd& col_last, const TridiagonalSection& X);

// Fast O(n^2) displacement Cholesky from the first column, the
// multiplication section and the generators.
TriangularFactor fast_cholesky(const Eigen::VectorXd& first_column, const TridiagonalSection& X,
                               const GeneratorPair& G);

// O(b n) banded variant; vectors are truncated at b + 2 (one guard
// diagonal) and the factor is stored with bandwidth b.
TriangularFactor fast_cholesky_banded(const Eigen::VectorXd& first_column,
                                      const TridiagonalSection& X, const GeneratorPair& G, int b);

// Reference factorizations: dense LAPACK Cholesky and the direct O(b^2 n)
// banded elimination.  Oracles for the displacement algorithms and the
// baseline for timing comparisons.
TriangularFactor cholesky_dense_reference(const GramSection& W);
TriangularFactor cholesky_dense_reference(Eigen::MatrixXd W);
TriangularFactor cholesky_banded_reference(const GramSection& W);

// ||W - L L^T||_F / ||W||_F without forming dense products when banded.
double reconstruction_residual(const GramSection& W, const TriangularFactor& L);

}  // namespace opmod

#endif
