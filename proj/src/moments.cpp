#include "opmod/moments.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "opmod/errors.hpp"

namespace opmod {
namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd check_finite(Eigen::VectorXd v, const char* what) {
    if (v.size() < 1) throw InvalidParameter(std::string(what) + ": needs at least one moment");
    if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite moment value");
    return v;
}

}  // namespace

MomentVector::MomentVector(Family f, Eigen::VectorXd v, Provenance p)
    : family(f), values(check_finite(std::move(v), "MomentVector")), provenance(p) {}

SimpleFunction::SimpleFunction(Eigen::VectorXd bp, Eigen::VectorXd v)
    : breakpoints(std::move(bp)), values(std::move(v)) {
    if (breakpoints.size() != values.size() + 1 || values.size() < 1)
        throw InvalidParameter("SimpleFunction: need n+1 breakpoints for n values");
    for (int k = 0; k + 1 < breakpoints.size(); ++k)
        if (!(breakpoints[k] < breakpoints[k + 1]))
            throw InvalidParameter("SimpleFunction: breakpoints must be strictly increasing");
    if (std::isinf(breakpoints[0]))
        throw InvalidParameter("SimpleFunction: left breakpoint must be finite");
}

OdeOperator assemble_ode_operator(const WeightOde& ode, int N) {
    const Family& fam = ode.family;
    const TridiagonalSection X = multiplication_matrix(fam, N);
    const BandedSection L = weighted_lowering_matrix(fam, N);
    const BandedSection D = differentiation_matrix(fam, N);
    const Polynomial tau = fam.tau();

    BandedSection K = add(multiply(L, D), polynomial_of(tau, X));
    BandedSection A0 = add(multiply(polynomial_of(ode.a, X), K), polynomial_of(ode.b, X));

    // Conjugate by the diagonal mass matrix: A = M A0 M^{-1}.
    const BandedSection M = mass_matrix(fam, N);
    const int lb = A0.lower_bandwidth(), ub = A0.upper_bandwidth();
    BandedSection A(N, lb, ub);
    for (int j = 0; j < N; ++j) {
        const int i0 = std::max(0, j - ub), i1 = std::min(N - 1, j + lb);
        for (int i = i0; i <= i1; ++i) {
            double v = A0.at(i, j);
            if (v != 0.0) A.set(i, j, v * M.at(i, i) / M.at(j, j));
        }
    }

    // Outer bands of the assembled operator can cancel exactly (the
    // structural bound max{deg a + 1, deg b} is not always attained);
    // measure which bands actually carry data, away from the boundary rows.
    auto band_magnitude = [&](int offset) {
        double mx = 0.0;
        for (int i = std::abs(offset); i < N; ++i) {
            int j = i - offset;
            if (j >= 0 && j < N) mx = std::max(mx, std::fabs(A.at(i, j)));
        }
        return mx;
    };
    double scale = 0.0;
    for (int off = -ub; off <= lb; ++off) scale = std::max(scale, band_magnitude(off));
    const double drop = 1e-12 * scale;
    int upper = 0, lower = 0;
    for (int u = ub; u >= 1; --u)
        if (band_magnitude(-u) > drop) {
            upper = u;
            break;
        }
    for (int l = lb; l >= 1; --l)
        if (band_magnitude(l) > drop) {
            lower = l;
            break;
        }
    return OdeOperator{std::move(A), lower, upper};
}

MomentVector moments_from_ode(const WeightOde& ode, const Eigen::VectorXd& initial, int m) {
    const int B = ode.structural_bandwidth();
    const int N = m + B + 8;
    OdeOperator op = assemble_ode_operator(ode, N);
    const int U = op.upper;
    if (U == 0) throw ZeroPivot(0, "moments_from_ode: operator has no superdiagonal band");

    const int k0 = static_cast<int>(initial.size());
    if (k0 < U)
        throw InsufficientInitialMoments("moments_from_ode: " + std::to_string(U) +
                                         " initial moments required, got " + std::to_string(k0));
    if (m <= k0) {
        return MomentVector(ode.family, initial.head(m), Provenance::OdeRecurrence);
    }
    if (ode.rhs.size() < m - U && ode.rhs.values.size() > 0 &&
        ode.rhs.values.cwiseAbs().maxCoeff() > 0)
        throw InsufficientMoments("moments_from_ode: rhs moments cover fewer rows than needed");

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    mu.head(k0) = initial;
    auto rhs_at = [&](int r) { return r < ode.rhs.size() ? ode.rhs[r] : 0.0; };

    for (int k = k0; k < m; ++k) {
        const int r = k - U;  // row whose trailing unknown is mu_k
        double acc = rhs_at(r);
        double row_scale = 0.0;
        const int j0 = std::max(0, r - op.lower);
        for (int j = j0; j < k; ++j) {
            const double a = op.A.at(r, j);
            acc -= a * mu[j];
            row_scale = std::max(row_scale, std::fabs(a));
        }
        const double pivot = op.A.at(r, k);
        row_scale = std::max(row_scale, std::fabs(pivot));
        if (std::fabs(pivot) <= 1e-14 * row_scale)
            throw ZeroPivot(r, "moments_from_ode: vanishing trailing band entry at row " +
                                   std::to_string(r) + "; supply more initial moments");
        mu[k] = acc / pivot;
        if (!std::isfinite(mu[k]))
            throw NumericalError("moments_from_ode: recurrence overflow at index " +
                                 std::to_string(k));
    }
    return MomentVector(ode.family, std::move(mu), Provenance::OdeRecurrence);
}

MomentVector moments_from_ode_downward(const WeightOde& ode, const Eigen::VectorXd& trailing,
                                       int m) {
    const int B = ode.structural_bandwidth();
    const int N = m + B + 8;
    OdeOperator op = assemble_ode_operator(ode, N);
    const int Lo = op.lower;
    if (Lo == 0) throw ZeroPivot(0, "moments_from_ode_downward: operator has no subdiagonal band");
    const int kt = static_cast<int>(trailing.size());
    if (kt < Lo)
        throw InsufficientInitialMoments("moments_from_ode_downward: " + std::to_string(Lo) +
                                         " trailing moments required");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    mu.tail(kt) = trailing;
    auto rhs_at = [&](int r) { return r < ode.rhs.size() ? ode.rhs[r] : 0.0; };

    for (int k = m - kt - 1; k >= 0; --k) {
        const int r = k + Lo;  // row whose leading unknown is mu_k
        double acc = rhs_at(r);
        double row_scale = 0.0;
        const int j1 = std::min(m - 1, r + op.upper);
        for (int j = j1; j > k; --j) {
            const double a = op.A.at(r, j);
            acc -= a * mu[j];
            row_scale = std::max(row_scale, std::fabs(a));
        }
        const double pivot = op.A.at(r, k);
        row_scale = std::max(row_scale, std::fabs(pivot));
        if (std::fabs(pivot) <= 1e-14 * row_scale)
            throw ZeroPivot(r, "moments_from_ode_downward: vanishing leading band entry at row " +
                                   std::to_string(r));
        mu[k] = acc / pivot;
    }
    return MomentVector(ode.family, std::move(mu), Provenance::OdeRecurrence);
}

MomentVector moments_clenshaw_curtis(int m) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    for (int n = 0; n < m; n += 2) mu[n] = 2.0 / (1.0 - double(n) * n);
    return MomentVector(Family::chebyshev_t(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_log_chebyshev(int m) {
    Eigen::VectorXd mu(m);
    mu[0] = 2.0 * kPi * std::log(2.0);
    for (int n = 1; n < m; ++n) mu[n] = kPi / n;
    return MomentVector(Family::chebyshev_t(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_abs_x(int m) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    for (int n = 0; n < m; n += 4) {
        const double h = n / 2.0;
        mu[n] = 1.0 / (1.0 - h * h);
    }
    return MomentVector(Family::chebyshev_t(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_log_weight(int m) {
    // Closed form for w = log(2/(1-x)); the digamma values are carried by
    // the even/odd partial sums of the split two-term recurrences.
    Eigen::VectorXd mu(m);
    if (m > 0) mu[0] = 2.0;
    if (m > 1) mu[1] = 1.0;
    double even_sum = 0.0;  // sum_{k<K} 4(2k+1)/(4-(2k+1)^2)
    double odd_sum = 0.0;   // sum_{k<K} 4(2k+2)/(1-(2k+2)^2)
    for (int K = 1; 2 * K < m || 2 * K + 1 < m; ++K) {
        const double o = 2.0 * K - 1.0;  // odd index entering the even sum
        even_sum += 4.0 * o / (4.0 - o * o);
        const double e = 2.0 * K;
        odd_sum += 4.0 * e / (1.0 - e * e);
        if (2 * K < m) mu[2 * K] = (2.0 - even_sum) / (1.0 - 4.0 * double(K) * K);
        if (2 * K + 1 < m) mu[2 * K + 1] = odd_sum / (2.0 * K * (2.0 * K + 2.0));
    }
    return MomentVector(Family::chebyshev_t(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_one_plus_x(int m) {
    // mu_n[1+x] with mu_n[x] = (mu_{n+1}[1] + mu_{n-1}[1]) / 2.
    auto cc = [](int n) { return (n % 2 == 0) ? 2.0 / (1.0 - double(n) * n) : 0.0; };
    Eigen::VectorXd mu(m);
    for (int n = 0; n < m; ++n) {
        double x_part = (n == 0) ? cc(1) : 0.5 * (cc(n + 1) + cc(n - 1));
        mu[n] = cc(n) + x_part;
    }
    return MomentVector(Family::chebyshev_t(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_delta_sqrt(double delta, int m) {
    if (!(delta > 0)) throw InvalidParameter("moments_delta_sqrt: delta > 0 required");
    const double rho = 1.0 + delta + std::sqrt(delta * delta + 2.0 * delta);
    const double c = std::sqrt(2.0 / rho);
    Eigen::VectorXd mu(m);
    double rpow = 1.0;
    for (int n = 0; n < m; ++n) {
        mu[n] = c * rpow * 2.0 / (2.0 * n + 1.0);
        rpow /= rho;
    }
    return MomentVector(Family::legendre(), std::move(mu), Provenance::ClosedForm);
}

MomentVector moments_simple_function(const SimpleFunction& s, const Family& family, int m) {
    const double a = family.domain_left(), b = family.domain_right();
    if (s.breakpoints[0] < a || s.breakpoints[s.intervals()] > b)
        throw InvalidParameter("moments_simple_function: breakpoint outside family domain");
    if (std::isinf(s.breakpoints[s.intervals()]))
        throw InvalidParameter(
            "moments_simple_function: infinite breakpoint needs the weighted variant");

    // u = sum_k w_k [P(x_k) - P(x_{k-1})], then mu^T = u D^+ R.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m + 1);
    Eigen::VectorXd prev = evaluate(family, m + 1, s.breakpoints[0]);
    for (int k = 0; k < s.intervals(); ++k) {
        Eigen::VectorXd cur = evaluate(family, m + 1, s.breakpoints[k + 1]);
        u += s.values[k] * (cur - prev);
        prev = std::move(cur);
    }
    Eigen::VectorXd v = apply_diff_pseudoinverse(family, u);
    const BandedSection R = raising_matrix(family, m + 1);
    Eigen::VectorXd mu(m);
    for (int n = 0; n < m; ++n) {
        double acc = 0.0;
        for (int i = std::max(0, n - R.upper_bandwidth()); i <= n; ++i) acc += v[i] * R.at(i, n);
        mu[n] = acc;
    }
    return MomentVector(family, std::move(mu), Provenance::SimpleFunction);
}

MomentVector moments_weighted_simple_function(const SimpleFunction& s, const Family& family,
                                              int m) {
    const double a = family.domain_left(), b = family.domain_right();
    if (s.breakpoints[0] < a || (!std::isinf(b) && s.breakpoints[s.intervals()] > b))
        throw InvalidParameter("moments_weighted_simple_function: breakpoint outside domain");

    // Boundary rows g(x) = sigma(x) w_c(x) P'(x); g -> 0 at +inf and at
    // finite endpoints where sigma w_c vanishes.
    const Polynomial sig = family.sigma();
    auto g_row = [&](double x) -> Eigen::VectorXd {
        if (std::isinf(x)) return Eigen::VectorXd::Zero(m + 1);
        return sig.eval(x) * family.weight(x) * evaluate_derivative_family(family, m + 1, x);
    };

    Eigen::VectorXd u = Eigen::VectorXd::Zero(m + 1);
    double mu0 = 0.0;
    Eigen::VectorXd g_prev = g_row(s.breakpoints[0]);
    double cdf_prev = family.weight_cdf(s.breakpoints[0]);
    for (int k = 0; k < s.intervals(); ++k) {
        Eigen::VectorXd g_cur = g_row(s.breakpoints[k + 1]);
        double cdf_cur = family.weight_cdf(s.breakpoints[k + 1]);
        u += s.values[k] * (g_prev - g_cur);
        mu0 += s.values[k] * (cdf_cur - cdf_prev);
        g_prev = std::move(g_cur);
        cdf_prev = cdf_cur;
    }

    // The boundary rows determine the indices >= 1 through
    // -D[sigma w_c p'_n] = w_c p_{n+1} D[n,n+1] h'_n / h_{n+1}; the
    // null-space component mu_0 comes from the weight's antiderivative.
    Eigen::VectorXd mu(m);
    mu[0] = mu0;
    for (int n = 1; n < m; ++n) {
        const double ratio = derivative_family_norm_squared(family, n - 1) /
                             classical_norm_squared(family, n);
        mu[n] = u[n - 1] / (differentiation_superdiagonal(family, n) * ratio);
    }
    return MomentVector(family, std::move(mu), Provenance::SimpleFunction);
}

double moment_bound_bv(double sup_w, double total_variation_w, int n) {
    if (n < 2) throw InvalidParameter("moment_bound_bv: n >= 2 required");
    return 2.0 * sup_w / ((n - 1.0) * (n - 1.0)) + total_variation_w / (n - 1.0);
}

double moment_bound_bv2(double sup_w, double sup_dw, double total_variation_dw, int n) {
    if (n < 3) throw InvalidParameter("moment_bound_bv2: n >= 3 required");
    const double n1 = n - 1.0, n2 = n - 2.0;
    return 2.0 * sup_w / (n1 * n1) + 2.0 * sup_dw / (n2 * n2 * n2) + total_variation_dw / (n2 * n2);
}

namespace {

MomentVector zero_rhs(const Family& family) {
    return MomentVector(family, Eigen::VectorXd::Zero(1), Provenance::ClosedForm);
}

void require_bounded(const Family& family, const char* what) {
    if (!family.bounded())
        throw InvalidParameter(std::string(what) + ": requires a family on (-1, 1)");
}

}  // namespace

WeightOde ode_jacobi_power(const Family& family, double alpha, double beta, int) {
    require_bounded(family, "ode_jacobi_power");
    return WeightOde{family, Polynomial{1.0},
                     Polynomial{alpha - beta, alpha + beta + 2.0}, zero_rhs(family)};
}

WeightOde ode_jacobi_log(const Family& family, double alpha, double beta, int m) {
    require_bounded(family, "ode_jacobi_log");
    // rhs c = (1-x)^alpha (1+x)^{beta+1}: a Jacobi-power weight itself.
    WeightOde inner = ode_jacobi_power(family, alpha, beta + 1, m);
    // Initial moments of c in closed form: mu_0 = 2^{a+b'+1} B(a+1, b'+1),
    // mu_1 = mu_0 - 2^{a+b'+2} B(a+2, b'+1) in the Chebyshev/Legendre case is
    // family-dependent, so seed the inner recurrence by quadrature-free Beta
    // values only when the family is ChebyshevT or Legendre; the general
    // path uses two Beta-integral initials valid for any bounded family via
    // x = 1 - 2u expansions of p_1.
    const double bp = beta + 1;
    const double B0 = std::exp2(alpha + bp + 1) *
                      std::exp(std::lgamma(alpha + 1) + std::lgamma(bp + 1) -
                               std::lgamma(alpha + bp + 2));
    const double B1 = std::exp2(alpha + bp + 2) *
                      std::exp(std::lgamma(alpha + 2) + std::lgamma(bp + 1) -
                               std::lgamma(alpha + bp + 3));
    const double m0 = B0;       // int c dx
    const double mx = B0 - B1;  // int x c dx
    // p_1(x) = (x - X[0,0]) / X[1,0] for the target family.
    const TridiagonalSection X = multiplication_matrix(family, 2);
    Eigen::VectorXd init(2);
    init[0] = m0;
    init[1] = (mx - X.d[0] * m0) / X.dl[0];
    MomentVector rhs = moments_from_ode(inner, init, m);
    return WeightOde{family, Polynomial{1.0},
                     Polynomial{alpha - beta, alpha + beta + 2.0}, std::move(rhs)};
}

WeightOde ode_algebraic_factors(const Family& family, const std::vector<double>& t,
                                const std::vector<double>& gamma, int) {
    require_bounded(family, "ode_algebraic_factors");
    if (t.size() != gamma.size() || t.empty())
        throw InvalidParameter("ode_algebraic_factors: t and gamma must pair up");
    Polynomial a{1.0};
    for (double ti : t) a = a * Polynomial{ti, 1.0};
    Polynomial s{0.0};
    for (size_t i = 0; i < t.size(); ++i) {
        Polynomial pi{gamma[i]};
        for (size_t j = 0; j < t.size(); ++j)
            if (j != i) pi = pi * Polynomial{t[j], 1.0};
        s = s + pi;
    }
    const Polynomial sig = family.sigma();
    Polynomial b = Polynomial{-1.0} * (a * sig.derivative() + sig * s);
    return WeightOde{family, std::move(a), std::move(b), zero_rhs(family)};
}

WeightOde ode_laguerre_power(double alpha, int) {
    Family fam = Family::laguerre(alpha);
    return WeightOde{fam, Polynomial{1.0}, Polynomial{-alpha - 1.0, 1.0}, zero_rhs(fam)};
}

WeightOde ode_laguerre_log(double t, double alpha, int m) {
    if (!(t > 0)) throw InvalidParameter("ode_laguerre_log: t > 0 required");
    Family fam = Family::laguerre(alpha);
    // c = x^{alpha+1} e^{-x}; its Laguerre(alpha) moments are the first
    // column of M X: ((alpha+1) Gamma(alpha+1), -Gamma(alpha+2), 0, ...).
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(std::max(2, m));
    rhs[0] = (alpha + 1) * boost::math::tgamma(alpha + 1);
    rhs[1] = -boost::math::tgamma(alpha + 2);
    return WeightOde{fam, Polynomial{t, 1.0},
                     Polynomial{t, 1.0} * Polynomial{-alpha - 1.0, 1.0},
                     MomentVector(fam, std::move(rhs), Provenance::ClosedForm)};
}

WeightOde ode_laguerre_algebraic(const std::vector<double>& t, const std::vector<double>& gamma,
                                 double alpha, int) {
    if (t.size() != gamma.size() || t.empty())
        throw InvalidParameter("ode_laguerre_algebraic: t and gamma must pair up");
    Family fam = Family::laguerre(alpha);
    Polynomial a{1.0};
    for (double ti : t) a = a * Polynomial{ti, 1.0};
    Polynomial s{0.0};
    for (size_t i = 0; i < t.size(); ++i) {
        Polynomial pi{gamma[i]};
        for (size_t j = 0; j < t.size(); ++j)
            if (j != i) pi = pi * Polynomial{t[j], 1.0};
        s = s + pi;
    }
    // (t+x)(w' + w) = s w with sigma = x gives
    // a = (t+x), b = (x-1)(t+x) - x s, c = 0.
    Polynomial b = Polynomial{-1.0, 1.0} * a - Polynomial{0.0, 1.0} * s;
    return WeightOde{fam, std::move(a), std::move(b), zero_rhs(fam)};
}

}  // namespace opmod
