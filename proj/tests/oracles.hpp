#ifndef OPMOD_TESTS_ORACLES_HPP
#define OPMOD_TESTS_ORACLES_HPP

// Shared test oracles: quadrature references, dense linear-algebra checks
// and the impractical Lemma-2.4 generator form that needs the (n+1)-section.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "opmod/connection.hpp"
#include "opmod/displacement.hpp"
#include "opmod/families.hpp"
#include "opmod/gram.hpp"
#include "opmod/hodlr.hpp"
#include "opmod/presets.hpp"
#include "opmod/quadrature.hpp"

namespace opmod::test {

// max |a - b| / max(scale, ||b||_inf)
inline double vec_rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          double scale = 1.0) {
    const Eigen::Index n = std::min(a.size(), b.size());
    return (a.head(n) - b.head(n)).cwiseAbs().maxCoeff() /
           std::max(scale, b.head(n).cwiseAbs().maxCoeff());
}

inline Eigen::VectorXd gaussian_vector(int n, std::uint64_t key) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian_sample(0xBADC0FFEULL, key, i);
    return v;
}

// Generators in the Lemma-2.4 form, which needs column n of the
// (n+1)-section; test-only by design.
inline GeneratorPair generators_extended(const GramSection& W_np1,
                                         const TridiagonalSection& X_np1) {
    const int n = W_np1.size() - 1;
    GeneratorPair gen;
    gen.G = Eigen::MatrixXd::Zero(n, 2);
    gen.G(n - 1, 0) = 1.0;
    gen.G.col(1) = -W_np1.column(n).head(n) * X_np1.dl[n - 1];
    return gen;
}

inline double displacement_residual(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                                    const GeneratorPair& G) {
    return (X.transpose() * W - W * X - G.skew_product()).norm();
}

// Numerical rank of a dense matrix at an absolute threshold.
inline int svd_rank(const Eigen::MatrixXd& A, double threshold_rel) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    int r = 0;
    while (r < sv.size() && sv[r] > threshold_rel * sv[0]) ++r;
    return r;
}

}  // namespace opmod::test

#endif
