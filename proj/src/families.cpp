#include "opmod/families.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

namespace opmod {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Recurrence/mass data shared by the public families and the internal
// derivative-side families (ultraspherical C^(lambda), shifted Jacobi and
// Laguerre).  Column k of X: sub = X[k+1,k], diag = X[k,k], sup = X[k-1,k].
struct Basis {
    enum class Kind { ChebyshevT, Ultraspherical, Jacobi, Laguerre } kind;
    double lam = 0;     // ultraspherical
    double a = 0, b = 0;  // jacobi (a,b) or laguerre (a)

    double x_sub(int k) const {
        switch (kind) {
            case Kind::ChebyshevT: return k == 0 ? 1.0 : 0.5;
            case Kind::Ultraspherical: return (k + 1) / (2.0 * (k + lam));
            case Kind::Jacobi:
                if (k == 0) return 2.0 / (a + b + 2.0);
                return 2.0 * (k + 1) * (k + a + b + 1) /
                       ((2 * k + a + b + 1) * (2 * k + a + b + 2));
            case Kind::Laguerre: return -(k + 1.0);
        }
        return 0;
    }
    double x_diag(int k) const {
        switch (kind) {
            case Kind::ChebyshevT:
            case Kind::Ultraspherical: return 0.0;
            case Kind::Jacobi:
                if (k == 0) return (b - a) / (a + b + 2.0);
                return (b - a) * (b + a) / ((2 * k + a + b) * (2 * k + a + b + 2));
            case Kind::Laguerre: return 2.0 * k + a + 1.0;
        }
        return 0;
    }
    double x_sup(int k) const {  // k >= 1
        switch (kind) {
            case Kind::ChebyshevT: return 0.5;
            case Kind::Ultraspherical: return (k + 2 * lam - 1) / (2.0 * (k + lam));
            case Kind::Jacobi:
                return 2.0 * (k + a) * (k + b) / ((2 * k + a + b) * (2 * k + a + b + 1));
            case Kind::Laguerre: return -(k + a);
        }
        return 0;
    }

    double mass(int k) const {
        switch (kind) {
            case Kind::ChebyshevT: return k == 0 ? kPi : kPi / 2.0;
            case Kind::Ultraspherical: {
                // pi 2^{1-2l} Gamma(k+2l) / ((k+l) Gamma(l)^2 k!), with the
                // half-integer orders used by the shipped families kept in
                // closed form.
                if (lam == 0.5) return 2.0 / (2.0 * k + 1.0);
                if (lam == 1.0) return kPi / 2.0;
                if (lam == 1.5) return 2.0 * (k + 1.0) * (k + 2.0) / (2.0 * k + 3.0);
                if (lam == 2.0) return kPi * (k + 1.0) * (k + 3.0) / 8.0;
                double lg = std::lgamma(k + 2 * lam) - 2 * std::lgamma(lam) - std::lgamma(k + 1.0);
                return kPi * std::exp2(1 - 2 * lam) * std::exp(lg) / (k + lam);
            }
            case Kind::Jacobi: {
                if (k == 0) {
                    double lg = std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 2);
                    return std::exp2(a + b + 1) * std::exp(lg);
                }
                double lg = std::lgamma(k + a + 1) + std::lgamma(k + b + 1) -
                            std::lgamma(k + a + b + 1) - std::lgamma(k + 1.0);
                return std::exp2(a + b + 1) * std::exp(lg) / (2 * k + a + b + 1);
            }
            case Kind::Laguerre:
                if (a == 0.0) return 1.0;
                if (a == 1.0) return k + 1.0;
                return std::exp(std::lgamma(k + a + 1) - std::lgamma(k + 1.0));
        }
        return 0;
    }
};

Basis basis_of(const Family& f) {
    switch (f.kind()) {
        case FamilyKind::ChebyshevT: return {Basis::Kind::ChebyshevT};
        case FamilyKind::ChebyshevU: return {Basis::Kind::Ultraspherical, 1.0};
        case FamilyKind::Legendre: return {Basis::Kind::Ultraspherical, 0.5};
        case FamilyKind::Jacobi: return {Basis::Kind::Jacobi, 0, f.alpha(), f.beta()};
        case FamilyKind::Laguerre: return {Basis::Kind::Laguerre, 0, f.alpha()};
    }
    throw InvalidParameter("unknown family");
}

// Family into which P differentiates: T -> U, C^(l) -> C^(l+1),
// Jacobi(a,b) -> Jacobi(a+1,b+1), Laguerre(a) -> Laguerre(a+1).
Basis derivative_basis_of(const Family& f) {
    switch (f.kind()) {
        case FamilyKind::ChebyshevT: return {Basis::Kind::Ultraspherical, 1.0};
        case FamilyKind::ChebyshevU: return {Basis::Kind::Ultraspherical, 2.0};
        case FamilyKind::Legendre: return {Basis::Kind::Ultraspherical, 1.5};
        case FamilyKind::Jacobi: return {Basis::Kind::Jacobi, 0, f.alpha() + 1, f.beta() + 1};
        case FamilyKind::Laguerre: return {Basis::Kind::Laguerre, 0, f.alpha() + 1};
    }
    throw InvalidParameter("unknown family");
}

int sigma_degree(const Family& f) { return f.bounded() ? 2 : 1; }

// Raising coefficients, column k of R_P^{P'}: p_k = r0 p'_k + r1 p'_{k-1} + r2 p'_{k-2}.
void raising_column(const Family& f, int k, double& r0, double& r1, double& r2) {
    r0 = r1 = r2 = 0;
    switch (f.kind()) {
        case FamilyKind::ChebyshevT:
            r0 = k == 0 ? 1.0 : 0.5;
            r2 = -0.5;
            return;
        case FamilyKind::ChebyshevU:
        case FamilyKind::Legendre: {
            const double lam = f.kind() == FamilyKind::ChebyshevU ? 1.0 : 0.5;
            r0 = lam / (k + lam);
            r2 = -lam / (k + lam);
            return;
        }
        case FamilyKind::Jacobi: {
            const double a = f.alpha(), b = f.beta();
            if (k == 0) {
                r0 = 1.0;
                return;
            }
            r0 = (k + a + b + 1) * (k + a + b + 2) / ((2 * k + a + b + 1) * (2 * k + a + b + 2));
            r1 = (a - b) * (k + a + b + 1) / ((2 * k + a + b) * (2 * k + a + b + 2));
            r2 = -(k + a) * (k + b) / ((2 * k + a + b) * (2 * k + a + b + 1));
            return;
        }
        case FamilyKind::Laguerre:
            r0 = 1.0;
            r1 = -1.0;
            return;
    }
}

Eigen::VectorXd evaluate_basis(const Basis& bs, int n, double x) {
    Eigen::VectorXd p(n);
    if (n == 0) return p;
    p[0] = 1.0;
    if (n == 1) return p;
    p[1] = (x - bs.x_diag(0)) / bs.x_sub(0);
    for (int k = 1; k + 1 < n; ++k)
        p[k + 1] = ((x - bs.x_diag(k)) * p[k] - bs.x_sup(k) * p[k - 1]) / bs.x_sub(k);
    return p;
}

TridiagonalSection section_of_basis(const Basis& bs, int n) {
    Eigen::VectorXd dl(n - 1), d(n), du(n - 1);
    for (int k = 0; k < n; ++k) d[k] = bs.x_diag(k);
    for (int k = 0; k + 1 < n; ++k) {
        dl[k] = bs.x_sub(k);
        du[k] = bs.x_sup(k + 1);
    }
    return TridiagonalSection(std::move(dl), std::move(d), std::move(du));
}

}  // namespace

double Family::domain_right() const {
    return bounded() ? 1.0 : std::numeric_limits<double>::infinity();
}

Polynomial Family::sigma() const {
    return bounded() ? Polynomial{1.0, 0.0, -1.0} : Polynomial{0.0, 1.0};
}

Polynomial Family::tau() const {
    switch (kind_) {
        case FamilyKind::ChebyshevT: return {0.0, -1.0};
        case FamilyKind::ChebyshevU: return {0.0, -3.0};
        case FamilyKind::Legendre: return {0.0, -2.0};
        case FamilyKind::Jacobi: return {beta_ - alpha_, -(alpha_ + beta_ + 2.0)};
        case FamilyKind::Laguerre: return {alpha_ + 1.0, -1.0};
    }
    throw InvalidParameter("unknown family");
}

double Family::weight(double x, double dl, double dr) const {
    switch (kind_) {
        case FamilyKind::ChebyshevT: return 1.0 / std::sqrt(dl * dr);
        case FamilyKind::ChebyshevU: return std::sqrt(dl * dr);
        case FamilyKind::Legendre: return 1.0;
        case FamilyKind::Jacobi: return std::pow(dr, alpha_) * std::pow(dl, beta_);
        case FamilyKind::Laguerre: return std::pow(dl, alpha_) * std::exp(-x);
    }
    throw InvalidParameter("unknown family");
}

double Family::weight_cdf(double x) const {
    switch (kind_) {
        case FamilyKind::ChebyshevT: return std::asin(std::clamp(x, -1.0, 1.0)) + kPi / 2.0;
        case FamilyKind::ChebyshevU: {
            const double xx = std::clamp(x, -1.0, 1.0);
            return 0.5 * (xx * std::sqrt((1 - xx) * (1 + xx)) + std::asin(xx) + kPi / 2.0);
        }
        case FamilyKind::Legendre: return x + 1.0;
        case FamilyKind::Jacobi: {
            const double z = std::clamp((1.0 + x) / 2.0, 0.0, 1.0);
            return std::exp2(alpha_ + beta_ + 1) * boost::math::beta(beta_ + 1, alpha_ + 1, z);
        }
        case FamilyKind::Laguerre:
            if (std::isinf(x)) return boost::math::tgamma(alpha_ + 1);
            return boost::math::tgamma_lower(alpha_ + 1, x);
    }
    throw InvalidParameter("unknown family");
}

std::string Family::name() const {
    switch (kind_) {
        case FamilyKind::ChebyshevT: return "chebyshev-t";
        case FamilyKind::ChebyshevU: return "chebyshev-u";
        case FamilyKind::Legendre: return "legendre";
        case FamilyKind::Jacobi:
            return "jacobi(" + std::to_string(alpha_) + "," + std::to_string(beta_) + ")";
        case FamilyKind::Laguerre: return "laguerre(" + std::to_string(alpha_) + ")";
    }
    return "?";
}

TridiagonalSection multiplication_matrix(const Family& family, int n) {
    if (n < 2) throw InvalidParameter("multiplication_matrix: n >= 2 required");
    return section_of_basis(basis_of(family), n);
}

BandedSection mass_matrix(const Family& family, int n) {
    const Basis bs = basis_of(family);
    BandedSection M(n, 0, 0);
    for (int k = 0; k < n; ++k) M.set(k, k, bs.mass(k));
    return M;
}

double classical_norm_squared(const Family& family, int k) { return basis_of(family).mass(k); }

double derivative_family_norm_squared(const Family& family, int k) {
    return derivative_basis_of(family).mass(k);
}

double differentiation_superdiagonal(const Family& family, int k) {
    switch (family.kind()) {
        case FamilyKind::ChebyshevT: return k;
        case FamilyKind::ChebyshevU: return 2.0;
        case FamilyKind::Legendre: return 1.0;
        case FamilyKind::Jacobi: return (k + family.alpha() + family.beta() + 1) / 2.0;
        case FamilyKind::Laguerre: return -1.0;
    }
    throw InvalidParameter("unknown family");
}

BandedSection differentiation_matrix(const Family& family, int n) {
    BandedSection D(n, 0, 1);
    for (int k = 1; k < n; ++k) D.set(k - 1, k, differentiation_superdiagonal(family, k));
    return D;
}

BandedSection raising_matrix(const Family& family, int n) {
    BandedSection R(n, 0, sigma_degree(family));
    double r0, r1, r2;
    for (int k = 0; k < n; ++k) {
        raising_column(family, k, r0, r1, r2);
        R.set(k, k, r0);
        if (k >= 1 && r1 != 0.0) R.set(k - 1, k, r1);
        if (k >= 2 && family.bounded()) R.set(k - 2, k, r2);
    }
    return R;
}

BandedSection weighted_lowering_matrix(const Family& family, int n) {
    // L = M_P^{-1} R^T M_{P'}: L[m,k] = R[k,m] h'_k / h_m, so column k of L
    // draws on raising columns k, k+1, k+2.
    const Basis bp = basis_of(family), bq = derivative_basis_of(family);
    const int s = sigma_degree(family);
    BandedSection L(n, s, 0);
    double r0, r1, r2;
    for (int k = 0; k < n; ++k) {
        const double hk = bq.mass(k);
        raising_column(family, k, r0, r1, r2);
        L.set(k, k, r0 * hk / bp.mass(k));
        if (k + 1 < n) {
            raising_column(family, k + 1, r0, r1, r2);
            if (r1 != 0.0) L.set(k + 1, k, r1 * hk / bp.mass(k + 1));
        }
        if (k + 2 < n && family.bounded()) {
            raising_column(family, k + 2, r0, r1, r2);
            L.set(k + 2, k, r2 * hk / bp.mass(k + 2));
        }
    }
    return L;
}

Eigen::VectorXd evaluate(const Family& family, int n, double x) {
    return evaluate_basis(basis_of(family), n, x);
}

Eigen::VectorXd evaluate_derivative_family(const Family& family, int n, double x) {
    return evaluate_basis(derivative_basis_of(family), n, x);
}

Eigen::VectorXd apply_diff_pseudoinverse(const Family& family, const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 0; j + 1 < n; ++j) out[j] = v[j + 1] / differentiation_superdiagonal(family, j + 1);
    return out;
}

}  // namespace opmod
