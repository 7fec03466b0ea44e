#include "opmod/connection.hpp"

#include <cmath>

#include "opmod/errors.hpp"

namespace opmod {

Eigen::VectorXd ConnectionResult::apply_R(const Eigen::VectorXd& v) const {
    return hierarchical() ? hodlr_apply_upper(*hodlr_, v, false) : factor_->apply_upper(v);
}

Eigen::VectorXd ConnectionResult::solve_R(const Eigen::VectorXd& v) const {
    return hierarchical() ? hodlr_solve_triangular(*hodlr_, v, false) : factor_->solve_upper(v);
}

Eigen::VectorXd ConnectionResult::solve_R_transposed(const Eigen::VectorXd& v) const {
    return hierarchical() ? hodlr_solve_triangular(*hodlr_, v, true)
                          : factor_->solve_upper_transposed(v);
}

void ConnectionResult::upper_band(Eigen::VectorXd& diag, Eigen::VectorXd& super) const {
    if (hierarchical()) {
        hodlr_upper_band(*hodlr_, diag, super);
        return;
    }
    const int n = factor_->size();
    diag.resize(n);
    super.resize(n - 1);
    for (int k = 0; k < n; ++k) diag[k] = factor_->diagonal(k);
    for (int k = 0; k + 1 < n; ++k) super[k] = factor_->upper(k, k + 1);
}

Eigen::MatrixXd ConnectionResult::to_dense_upper() const {
    if (hierarchical()) return hodlr_->to_dense_upper();
    return factor_->to_dense_lower().transpose();
}

Backend select_backend(const ConnectionProblem& p) {
    if (p.backend != Backend::Auto) return p.backend;
    const int b = moment_band_limit(p.moments);
    if (b + 1 < p.n / 4) return Backend::DisplacementCholesky;  // banded route
    if (p.family.kind() == FamilyKind::ChebyshevT && p.n >= 1024) return Backend::HodlrCholesky;
    return Backend::DisplacementCholesky;
}

ConnectionResult connection_coefficients(const ConnectionProblem& p) {
    const Backend backend = select_backend(p);
    const int n = p.n;
    switch (backend) {
        case Backend::DenseCholesky: {
            GramSection W = p.family.kind() == FamilyKind::ChebyshevT
                                ? gram_tph(p.moments, n)
                                : gram_from_moments(p.moments, multiplication_matrix(p.family,
                                                                                     2 * n - 1),
                                                    n);
            return ConnectionResult(cholesky_dense_reference(W));
        }
        case Backend::DisplacementCholesky: {
            const int b = moment_band_limit(p.moments);
            if (b + 1 < n / 4) {
                const TridiagonalSection X = multiplication_matrix(p.family, n + b + 2);
                GramSection W = gram_banded_from_moments(p.moments, X, n, b);
                GeneratorPair G = build_generators(W, X.head(n));
                return ConnectionResult(fast_cholesky_banded(W.first_column(), X, G, b));
            }
            const TridiagonalSection X = multiplication_matrix(p.family, 2 * n - 1);
            GramSection W = p.family.kind() == FamilyKind::ChebyshevT
                                ? gram_tph(p.moments, n)
                                : gram_from_moments(p.moments, X, n);
            GeneratorPair G = build_generators(W, X.head(n));
            return ConnectionResult(fast_cholesky(W.first_column(), X, G));
        }
        case Backend::HodlrCholesky: {
            HodlrOptions opts;
            opts.tol = p.tol;
            opts.seed = p.seed;
            opts.leaf_size = p.leaf_size;
            std::unique_ptr<LinearBlockOperator> op;
            if (p.family.kind() == FamilyKind::ChebyshevT) {
                op = std::make_unique<ChebyshevGramOperator>(p.moments, n);
            } else {
                GramSection W =
                    gram_from_moments(p.moments, multiplication_matrix(p.family, 2 * n - 1), n);
                op = std::make_unique<DenseBlockOperator>(W.to_dense());
            }
            HodlrMatrix Wh = hodlr_compress(*op, opts);
            return ConnectionResult(hodlr_cholesky(Wh, opts));
        }
        case Backend::Auto: break;
    }
    throw InvalidParameter("connection_coefficients: unresolved backend");
}

ModifiedJacobiSection modified_jacobi(const ConnectionResult& R, const TridiagonalSection& X_P) {
    const int n = R.size();
    if (X_P.n < n) throw DimensionMismatch("modified_jacobi: X_P section too small");
    Eigen::VectorXd rd, rs;
    R.upper_band(rd, rs);
    for (int k = 0; k < n; ++k)
        if (rd[k] == 0.0) throw NumericalError("modified_jacobi: singular R diagonal");

    ModifiedJacobiSection out;
    const int m = n - 1;

    if (!R.hierarchical()) {
        // B = R X_P on the needed columns, then solve X_Q R = B row by row;
        // the full rows expose the off-tridiagonal roundoff mass.
        const TriangularFactor& F = R.factor();
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                // column j of X_P: X[j-1,j] = du[j-1], X[j,j] = d[j], X[j+1,j] = dl[j]
                double acc = 0.0;
                if (j > 0) acc += F.upper(i, j - 1) * X_P.du[j - 1];
                acc += F.upper(i, j) * X_P.d[j];
                if (j + 1 < n) acc += F.upper(i, j + 1) * X_P.dl[j];
                B(i, j) = acc;
            }
        Eigen::MatrixXd XQ(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                double acc = B(i, j);
                const int k0 = std::max(0, j - (F.is_banded() ? F.bandwidth() : j));
                for (int k = k0; k < j; ++k) acc -= XQ(i, k) * F.upper(k, j);
                XQ(i, j) = acc / rd[j];
            }
        }
        Eigen::VectorXd dl(m - 1), d(m), du(m - 1);
        for (int k = 0; k < m; ++k) d[k] = XQ(k, k);
        for (int k = 0; k + 1 < m; ++k) {
            dl[k] = XQ(k + 1, k);
            du[k] = XQ(k, k + 1);
        }
        out.tridiagonal = TridiagonalSection(std::move(dl), std::move(d), std::move(du));
        out.entry_max = XQ.cwiseAbs().maxCoeff();
        double off = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (std::abs(i - j) > 1) off = std::max(off, std::fabs(XQ(i, j)));
        out.off_tridiagonal_max = off;
        out.off_tridiagonal_measured = true;
        return out;
    }

    // Hierarchical factor: band formulas from R X_P = X_Q R with symmetric
    // X_Q (Q is orthonormal).
    Eigen::VectorXd dl(m - 1), d(m), du(m - 1);
    Eigen::VectorXd sub(m);
    for (int k = 0; k + 1 < n; ++k) sub[k] = rd[k + 1] * X_P.dl[k] / rd[k];
    for (int k = 0; k < m; ++k) {
        double acc = rd[k] * X_P.d[k] + rs[k] * X_P.dl[k];
        if (k > 0) acc -= sub[k - 1] * rs[k - 1];  // X_Q[k,k-1] = sub[k-1]
        d[k] = acc / rd[k];
        if (k + 1 < m) {
            dl[k] = sub[k];
            du[k] = sub[k];  // symmetric section
        }
    }
    out.tridiagonal = TridiagonalSection(std::move(dl), std::move(d), std::move(du));
    out.entry_max = out.tridiagonal.d.cwiseAbs().maxCoeff();
    if (m > 1) out.entry_max = std::max(out.entry_max, out.tridiagonal.dl.cwiseAbs().maxCoeff());
    return out;
}

Eigen::VectorXd convert_to_modified(const ConnectionResult& R, const Eigen::VectorXd& p_coeffs) {
    return R.apply_R(p_coeffs);
}

Eigen::VectorXd convert_to_known(const ConnectionResult& R, const Eigen::VectorXd& q_coeffs) {
    return R.solve_R(q_coeffs);
}

Eigen::VectorXd synthesize(const ConnectionResult& R, const Family& family, int k,
                           const Eigen::VectorXd& grid) {
    const int n = R.size();
    if (k >= n) throw InvalidParameter("synthesize: degree exceeds section size");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1.0;
    const Eigen::VectorXd y = R.solve_R(e);  // column k of R^{-1}
    Eigen::VectorXd vals(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const Eigen::VectorXd p = evaluate(family, k + 1, grid[g]);
        vals[g] = p.dot(y.head(k + 1));
    }
    return vals;
}

}  // namespace opmod
