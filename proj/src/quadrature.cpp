#include "opmod/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>

namespace opmod::quadrature {
namespace {

// boost convention: xc > 0 is the distance to the right endpoint,
// xc < 0 is minus the distance to the left endpoint.
std::pair<double, double> endpoint_distances(double x, double xc, double a, double b) {
    double dl, dr;
    if (xc > 0) {
        dr = xc;
        dl = x - a;
    } else {
        dl = -xc;
        dr = b - x;
    }
    return {dl, dr};
}

double integrate_finite(const Integrand& f, double a, double b, double tol) {
    boost::math::quadrature::tanh_sinh<double> ts(14);
    auto g = [&](double x, double xc) {
        auto [dl, dr] = endpoint_distances(x, xc, a, b);
        return f(x, dl, dr);
    };
    return ts.integrate(g, a, b, tol);
}

}  // namespace

double integrate(const Integrand& f, double a, double b, double tol) {
    return integrate_finite(f, a, b, tol);
}

double integrate_halfline(const std::function<double(double, double)>& f, double a, double tol) {
    // Endpoint behaviour on [a, a+1]; the exponential weight factor makes
    // everything past x = 760 identically zero in double precision.
    boost::math::quadrature::tanh_sinh<double> ts(14);
    auto g = [&](double x, double xc) {
        double dl = (xc < 0) ? -xc : x - a;
        return f(x, dl);
    };
    double head = ts.integrate(g, a, a + 1.0, tol);
    const double cutoff = std::max(a + 2.0, 760.0);
    double tail = ts.integrate([&](double x, double) { return f(x, x - a); }, a + 1.0, cutoff,
                               tol);
    return head + tail;
}

double integrate_split(const SingularWeight& w, const std::function<double(double)>& smooth,
                       double a, double b, double tol) {
    std::vector<double> pts{a};
    for (double s : w.singularities)
        if (s > a && s < b) pts.push_back(s);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    double total = 0.0;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double lo = pts[k], hi = pts[k + 1];
        Integrand f = [&](double x, double dl, double dr) {
            auto dist = [&](double s) {
                if (s == lo) return dl;
                if (s == hi) return dr;
                return std::fabs(x - s);
            };
            return w.eval(x, dist) * smooth(x);
        };
        total += integrate_finite(f, lo, hi, tol);
    }
    return total;
}

namespace {

// Panel boundaries inside [lo, hi] sized so each panel holds only a few
// oscillations of p_n; a fresh tanh-sinh rule can otherwise terminate on
// aliased coarse levels for large degrees.  Bounded families oscillate
// uniformly in acos(x), Laguerre polynomials uniformly in sqrt(x).
std::vector<double> oscillation_panels(const Family& family, double lo, double hi, int degree) {
    constexpr double kOscPerPanel = 5.0;
    constexpr double kPiLocal = 3.14159265358979323846;
    int count = 1;
    std::vector<double> knots;
    if (family.bounded()) {
        const double tl = std::acos(std::clamp(lo, -1.0, 1.0));
        const double th = std::acos(std::clamp(hi, -1.0, 1.0));
        count = std::max(1, static_cast<int>(
                                std::ceil(degree * (tl - th) / (kPiLocal * kOscPerPanel))));
        knots.push_back(lo);
        for (int j = 1; j < count; ++j)
            knots.push_back(std::cos(tl + (th - tl) * j / count));
        knots.push_back(hi);
    } else {
        const double sl = std::sqrt(std::max(0.0, lo)), sh = std::sqrt(hi);
        count = std::max(1, static_cast<int>(std::ceil(
                                2.0 * std::sqrt(std::max(1, degree)) * (sh - sl) /
                                (kPiLocal * kOscPerPanel))));
        knots.push_back(lo);
        for (int j = 1; j < count; ++j) {
            const double s = sl + (sh - sl) * j / count;
            knots.push_back(s * s);
        }
        knots.push_back(hi);
    }
    return knots;
}

}  // namespace

Eigen::VectorXd moments(const Family& family, const SingularWeight& w, int m, double tol) {
    const double a = family.domain_left();
    const double b = family.domain_right();
    // The exponential factor of half-line weights vanishes in double
    // precision past x = 760.
    const double b_eff = std::isinf(b) ? 760.0 : b;

    std::vector<double> pts{a};
    for (double s : w.singularities)
        if (s > a && s < b_eff && std::isfinite(s)) pts.push_back(s);
    pts.push_back(b_eff);
    std::sort(pts.begin(), pts.end());

    Eigen::VectorXd mu(m);
    for (int n = 0; n < m; ++n) {
        auto pn = [&](double x) { return evaluate(family, n + 1, x)[n]; };
        double total = 0.0;
        for (size_t k = 0; k + 1 < pts.size(); ++k) {
            const double lo = pts[k], hi = pts[k + 1];
            const std::vector<double> knots = oscillation_panels(family, lo, hi, n);
            for (size_t q = 0; q + 1 < knots.size(); ++q) {
                const double pa = knots[q], pb = knots[q + 1];
                total += integrate_finite(
                    [&](double x, double dl, double dr) {
                        auto dist = [&](double s) {
                            if (s == pa) return dl;
                            if (s == pb) return dr;
                            return std::fabs(x - s);
                        };
                        return w.eval(x, dist) * pn(x);
                    },
                    pa, pb, tol);
            }
        }
        mu[n] = total;
    }
    return mu;
}

}  // namespace opmod::quadrature
