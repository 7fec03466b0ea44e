#ifndef OPMOD_LINOP_HPP
#define OPMOD_LINOP_HPP

#include <Eigen/Dense>

namespace opmod {

// Abstract access to contiguous subblocks of a symmetric matrix: products
// and (where cheap) dense extraction.  This is what the hierarchical
// compression consumes.
class LinearBlockOperator {
  public:
    virtual ~LinearBlockOperator() = default;
    virtual int size() const = 0;

    // y = B v (or B^T v) for the block B = A[r0 : r0+nr, c0 : c0+nc].
    virtual Eigen::VectorXd apply_block(int r0, int nr, int c0, int nc, const Eigen::VectorXd& v,
                                        bool transpose) const = 0;

    virtual Eigen::MatrixXd dense_block(int r0, int nr, int c0, int nc) const {
        Eigen::MatrixXd B(nr, nc);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nc);
        for (int j = 0; j < nc; ++j) {
            e[j] = 1.0;
            B.col(j) = apply_block(r0, nr, c0, nc, e, false);
            e[j] = 0.0;
        }
        return B;
    }
};

class DenseBlockOperator final : public LinearBlockOperator {
  public:
    explicit DenseBlockOperator(Eigen::MatrixXd A) : A_(std::move(A)) {}
    int size() const override { return static_cast<int>(A_.rows()); }
    Eigen::VectorXd apply_block(int r0, int nr, int c0, int nc, const Eigen::VectorXd& v,
                                bool transpose) const override {
        if (transpose) return A_.block(r0, c0, nr, nc).transpose() * v;
        return A_.block(r0, c0, nr, nc) * v;
    }
    Eigen::MatrixXd dense_block(int r0, int nr, int c0, int nc) const override {
        return A_.block(r0, c0, nr, nc);
    }

  private:
    Eigen::MatrixXd A_;
};

}  // namespace opmod

#endif
