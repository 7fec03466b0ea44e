#include "opmod/presets.hpp"

#include <cmath>
#include <sstream>

#include "opmod/errors.hpp"

namespace opmod {
namespace {

Eigen::VectorXd preset_initials(const WeightOde& ode, const quadrature::SingularWeight& w) {
    // Probe the assembled operator for the effective recurrence length and
    // seed with (length - 1) = 2 * upper-band moments from the oracle.
    const int probe = 4 * ode.structural_bandwidth() + 16;
    const OdeOperator op = assemble_ode_operator(ode, probe);
    return initial_moments_by_quadrature(ode.family, w, 2 * op.upper);
}

MomentVector ode_preset_moments(const WeightOde& ode, const quadrature::SingularWeight& w,
                                int m) {
    return moments_from_ode(ode, preset_initials(ode, w), m);
}

quadrature::SingularWeight constant_weight() {
    return {[](double, const std::function<double(double)>&) { return 1.0; }, {}};
}

}  // namespace

Eigen::VectorXd initial_moments_by_quadrature(const Family& family,
                                              const quadrature::SingularWeight& w, int count) {
    return quadrature::moments(family, w, count);
}

WeightPreset make_weight_preset(const std::string& spec) {
    std::istringstream ss(spec);
    std::string name;
    ss >> name;

    if (name == "clenshaw-curtis") {
        return WeightPreset{name, Family::chebyshev_t(),
                            [](int m) { return moments_clenshaw_curtis(m); }, constant_weight(),
                            "w(x) = 1 on (-1,1), Chebyshev-T family"};
    }
    if (name == "log-chebyshev") {
        quadrature::SingularWeight w{
            [](double, const std::function<double(double)>& dist) {
                return std::log(2.0 / dist(1.0)) / std::sqrt(dist(1.0) * dist(-1.0));
            },
            {}};
        return WeightPreset{name, Family::chebyshev_t(),
                            [](int m) { return moments_log_chebyshev(m); }, std::move(w),
                            "w(x) = log(2/(1-x)) / sqrt(1-x^2)"};
    }
    if (name == "abs-x") {
        quadrature::SingularWeight w{
            [](double, const std::function<double(double)>& dist) { return dist(0.0); }, {0.0}};
        return WeightPreset{name, Family::chebyshev_t(), [](int m) { return moments_abs_x(m); },
                            std::move(w), "w(x) = |x|"};
    }
    if (name == "log") {
        quadrature::SingularWeight w{
            [](double, const std::function<double(double)>& dist) {
                return std::log(2.0 / dist(1.0));
            },
            {}};
        return WeightPreset{name, Family::chebyshev_t(),
                            [](int m) { return moments_log_weight(m); }, std::move(w),
                            "w(x) = log(2/(1-x))"};
    }
    if (name == "jacobi") {
        double a = 0, b = 0;
        if (!(ss >> a >> b)) throw ConfigError("weight preset: jacobi needs two parameters");
        quadrature::SingularWeight w{
            [a, b](double, const std::function<double(double)>& dist) {
                return std::pow(dist(1.0), a) * std::pow(dist(-1.0), b);
            },
            {}};
        Family fam = Family::chebyshev_t();
        auto gen = [fam, a, b, w](int m) {
            return ode_preset_moments(ode_jacobi_power(fam, a, b, m), w, m);
        };
        return WeightPreset{"jacobi", fam, std::move(gen), std::move(w),
                            "w(x) = (1-x)^a (1+x)^b on Chebyshev-T"};
    }
    if (name == "delta-sqrt") {
        double d = 0;
        if (!(ss >> d) || !(d > 0)) throw ConfigError("weight preset: delta-sqrt needs delta > 0");
        quadrature::SingularWeight w{
            [d](double x, const std::function<double(double)>&) {
                return 1.0 / std::sqrt(1.0 + d - x);
            },
            {}};
        return WeightPreset{"delta-sqrt", Family::legendre(),
                            [d](int m) { return moments_delta_sqrt(d, m); }, std::move(w),
                            "w(x) = 1/sqrt(1+delta-x) on Legendre"};
    }
    if (name == "algebraic") {
        std::vector<double> t{-0.5, -0.25, 0.25, 0.5};
        std::vector<double> g{-0.5, -0.25, 0.25, 0.5};
        std::string pairs;
        if (ss >> pairs) {
            t.clear();
            g.clear();
            std::istringstream ps(pairs);
            std::string item;
            while (std::getline(ps, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("weight preset: algebraic pairs are t:gamma");
                t.push_back(std::stod(item.substr(0, colon)));
                g.push_back(std::stod(item.substr(colon + 1)));
            }
            if (t.empty()) throw ConfigError("weight preset: algebraic needs pairs");
        }
        std::vector<double> sing;
        for (double ti : t) sing.push_back(-ti);
        quadrature::SingularWeight w{
            [t, g](double, const std::function<double(double)>& dist) {
                double v = 1.0;
                for (size_t i = 0; i < t.size(); ++i) v *= std::pow(dist(-t[i]), g[i]);
                return v;
            },
            std::move(sing)};
        Family fam = Family::chebyshev_t();
        auto gen = [fam, t, g, w](int m) {
            return ode_preset_moments(ode_algebraic_factors(fam, t, g, m), w, m);
        };
        return WeightPreset{"algebraic", fam, std::move(gen), std::move(w),
                            "w(x) = prod |t_i + x|^{g_i} on Chebyshev-T"};
    }
    if (name == "laguerre-step") {
        Family fam = Family::laguerre(0.0);
        Eigen::VectorXd bp(3), vals(2);
        bp << 0.0, 4.0, std::numeric_limits<double>::infinity();
        vals << 4096.0, 1.0;
        SimpleFunction s(bp, vals);
        quadrature::SingularWeight w{
            [](double x, const std::function<double(double)>&) {
                return (x < 4.0 ? 4096.0 : 1.0) * std::exp(-x);
            },
            {4.0}};
        auto gen = [fam, s](int m) { return moments_weighted_simple_function(s, fam, m); };
        return WeightPreset{name, fam, std::move(gen), std::move(w),
                            "w(x) = [4096 on [0,4) + 1 on [4,inf)] e^{-x} on Laguerre(0)"};
    }
    throw ConfigError("unknown weight preset: " + name);
}

std::vector<std::string> weight_preset_names() {
    return {"clenshaw-curtis", "log-chebyshev", "abs-x",     "log",
            "jacobi A B",      "delta-sqrt D",  "algebraic", "laguerre-step"};
}

}  // namespace opmod
