// opmod: modified orthogonal polynomials from moments, via structured
// Gram-matrix factorizations.
#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "opmod/connection.hpp"
#include "opmod/io.hpp"
#include "opmod/presets.hpp"
#include "opmod/quadrature.hpp"

namespace {

using namespace opmod;

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Family parse_family(const std::string& spec) {
    std::istringstream ss(spec);
    std::string name;
    ss >> name;
    if (name == "chebyshev-t") return Family::chebyshev_t();
    if (name == "chebyshev-u") return Family::chebyshev_u();
    if (name == "legendre") return Family::legendre();
    if (name == "jacobi") {
        double a, b;
        if (!(ss >> a >> b)) throw ConfigError("family: jacobi needs two parameters");
        return Family::jacobi(a, b);
    }
    if (name == "laguerre") {
        double a;
        if (!(ss >> a)) throw ConfigError("family: laguerre needs a parameter");
        return Family::laguerre(a);
    }
    throw ConfigError("unknown family: " + spec);
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ": expected key=value lines");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

Eigen::VectorXd parse_numbers(const std::string& s) {
    std::vector<double> vals;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "+inf")
            vals.push_back(std::numeric_limits<double>::infinity());
        else
            vals.push_back(std::stod(item));
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Backend parse_backend(const std::string& s) {
    if (s == "auto") return Backend::Auto;
    if (s == "dense") return Backend::DenseCholesky;
    if (s == "displacement") return Backend::DisplacementCholesky;
    if (s == "hodlr") return Backend::HodlrCholesky;
    throw ConfigError("unknown backend: " + s);
}

struct MomentSource {
    std::optional<WeightPreset> preset;
    std::string ode_file, simple_file;

    MomentVector moments(int m) const {
        if (preset) return preset->moments(m);
        if (!ode_file.empty()) {
            auto kv = parse_kv_file(ode_file);
            const Family fam = parse_family(kv.count("family") ? kv["family"] : "chebyshev-t");
            if (!kv.count("a_coeffs") || !kv.count("b_coeffs"))
                throw ConfigError("ode file: a_coeffs and b_coeffs are required");
            Polynomial a(parse_numbers(kv["a_coeffs"])), b(parse_numbers(kv["b_coeffs"]));
            Eigen::VectorXd rhs =
                kv.count("rhs") ? parse_numbers(kv["rhs"]) : Eigen::VectorXd::Zero(1);
            if (!kv.count("initial"))
                throw ConfigError("ode file: initial moments are required");
            WeightOde ode{fam, a, b, MomentVector(fam, rhs, Provenance::External)};
            return moments_from_ode(ode, parse_numbers(kv["initial"]), m);
        }
        if (!simple_file.empty()) {
            auto kv = parse_kv_file(simple_file);
            const Family fam = parse_family(kv.count("family") ? kv["family"] : "legendre");
            if (!kv.count("breakpoints") || !kv.count("values"))
                throw ConfigError("simple file: breakpoints and values are required");
            SimpleFunction s(parse_numbers(kv["breakpoints"]), parse_numbers(kv["values"]));
            const bool weighted = kv.count("weighted") && kv["weighted"] == "true";
            return weighted ? moments_weighted_simple_function(s, fam, m)
                            : moments_simple_function(s, fam, m);
        }
        throw ConfigError("no weight source: pass --weight, --ode or --simple");
    }
};

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write " + path);
    return file;
}

int run(int argc, char** argv) {
    CLI::App app{"modified orthogonal polynomial factorizations"};
    app.require_subcommand(1);

    std::string weight, ode_file, simple_file, out, backend_s = "auto";
    int n = 256, m = 0;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    bool check_quadrature = false, binary = false;

    auto add_common = [&](CLI::App* cmd, bool needs_n) {
        cmd->add_option("--weight", weight, "named weight preset");
        cmd->add_option("--ode", ode_file, "weight ODE description file");
        cmd->add_option("--simple", simple_file, "simple-function description file");
        cmd->add_option("--out", out, "output path ('-' for stdout)");
        if (needs_n) cmd->add_option("--n", n, "section size")->check(CLI::Range(2, 1 << 22));
        cmd->add_option("--tol", tol, "truncation tolerance")
            ->check(CLI::Range(1e-16, 0.999999));
        cmd->add_option("--seed", seed, "random seed (hodlr determinism)");
    };

    auto* cmd_moments = app.add_subcommand("moments", "modified moment tables");
    add_common(cmd_moments, false);
    cmd_moments->add_option("--m", m, "number of moments")->check(CLI::PositiveNumber);
    cmd_moments->add_flag("--check-quadrature", check_quadrature,
                          "add a relative-error column against the quadrature oracle");

    auto* cmd_factor = app.add_subcommand("factor", "factorize a Gram section");
    add_common(cmd_factor, true);
    cmd_factor->add_option("--backend", backend_s, "auto|dense|displacement|hodlr");
    cmd_factor->add_flag("--binary", binary, "write the banded binary factor format");

    auto* cmd_bench = app.add_subcommand("bench", "timing sweeps");
    add_common(cmd_bench, false);
    int nmin = 1 << 10, nmax = 1 << 13;
    std::vector<std::string> algos{"displacement", "dense"};
    cmd_bench->add_option("--nmin", nmin, "smallest size (power of two)");
    cmd_bench->add_option("--nmax", nmax, "largest size");
    cmd_bench->add_option("--algo", algos, "dense|displacement|banded|banded-reference|hodlr");

    auto* cmd_rankmap = app.add_subcommand("rankmap", "hierarchical rank-structure report");
    add_common(cmd_rankmap, true);

    auto* cmd_transform = app.add_subcommand("transform", "coefficient transform roundtrip");
    add_common(cmd_transform, true);
    cmd_transform->add_option("--backend", backend_s, "auto|dense|displacement|hodlr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    MomentSource src;
    if (!weight.empty()) src.preset = make_weight_preset(weight);
    src.ode_file = ode_file;
    src.simple_file = simple_file;

    if (*cmd_moments) {
        if (m <= 0) m = 64;
        MomentVector mu = src.moments(m);
        std::ofstream f;
        std::ostream& os = open_out(f, out);
        if (check_quadrature) {
            if (!src.preset)
                throw ConfigError("--check-quadrature needs a preset weight");
            const int mq = std::min(m, 200);
            Eigen::VectorXd ref = quadrature::moments(src.preset->family, src.preset->weight, mq);
            io::write_moments_csv(os, mu, ref);
        } else {
            io::write_moments_csv(os, mu);
        }
        return 0;
    }

    if (*cmd_factor) {
        const MomentVector mu = src.moments(2 * n);
        const double t0 = now();
        ConnectionProblem p(mu, n, parse_backend(backend_s));
        p.tol = tol;
        p.seed = seed;
        const double t1 = now();
        ConnectionResult R = connection_coefficients(p);
        const double t2 = now();

        double residual;
        if (R.hierarchical()) {
            // Stochastic relative residual ||W v - R^T R v|| / ||W v||.
            ChebyshevGramOperator op(mu, n);
            double worst = 0.0;
            for (int t = 0; t < 4; ++t) {
                Eigen::VectorXd v(n);
                for (int i = 0; i < n; ++i) v[i] = gaussian_sample(seed, 101 + t, i);
                Eigen::VectorXd wv = op.apply_block(0, n, 0, n, v, false);
                Eigen::VectorXd rv = R.apply_R(v);
                rv = hodlr_apply_upper(R.hodlr(), rv, true);
                worst = std::max(worst, (wv - rv).norm() / wv.norm());
            }
            residual = worst;
        } else {
            const int b = moment_band_limit(mu);
            const bool banded_path = b + 1 < n / 4;
            const TridiagonalSection X =
                multiplication_matrix(p.family, banded_path ? n + b + 2 : 2 * n - 1);
            GramSection W = banded_path
                                ? gram_banded_from_moments(mu, X, n, b)
                                : (p.family.kind() == FamilyKind::ChebyshevT
                                       ? gram_tph(mu, n)
                                       : gram_from_moments(mu, X, n));
            residual = reconstruction_residual(W, R.factor());
        }
        if (!out.empty()) {
            std::ofstream f;
            std::ostream& os = open_out(f, out);
            if (R.hierarchical())
                io::write_rank_report_csv(os, rank_report(R.hodlr()));
            else if (binary)
                io::write_factor_binary(os, R.factor());
            else
                io::write_factor_csv(os, R.factor());
        }
        std::cout << "n,fill_seconds,factor_seconds,rel_frobenius_residual\n"
                  << n << ',' << io::format_double(t1 - t0) << ','
                  << io::format_double(t2 - t1) << ',' << io::format_double(residual) << "\n";
        return 0;
    }

    if (*cmd_bench) {
        std::ofstream f;
        std::ostream& os = open_out(f, out);
        os << "n,algo,seconds\n";
        for (int size = nmin; size <= nmax; size *= 2) {
            const MomentVector mu = src.moments(2 * size);
            const int b = moment_band_limit(mu);
            for (const std::string& algo : algos) {
                double secs = 0.0;
                if (algo == "displacement") {
                    const TridiagonalSection X = multiplication_matrix(mu.family, 2 * size - 1);
                    GramSection W = mu.family.kind() == FamilyKind::ChebyshevT
                                        ? gram_tph(mu, size)
                                        : gram_from_moments(mu, X, size);
                    GeneratorPair G = build_generators(W, X.head(size));
                    Eigen::VectorXd c0 = W.first_column();
                    const double t0 = now();
                    TriangularFactor L = fast_cholesky(c0, X, G);
                    secs = now() - t0;
                } else if (algo == "banded") {
                    const TridiagonalSection X = multiplication_matrix(mu.family, size + b + 2);
                    GramSection W = gram_banded_from_moments(mu, X, size, b);
                    GeneratorPair G = build_generators(W, X.head(size));
                    Eigen::VectorXd c0 = W.first_column();
                    const double t0 = now();
                    TriangularFactor L = fast_cholesky_banded(c0, X, G, b);
                    secs = now() - t0;
                } else if (algo == "banded-reference") {
                    const TridiagonalSection X = multiplication_matrix(mu.family, size + b + 2);
                    GramSection W = gram_banded_from_moments(mu, X, size, b);
                    const double t0 = now();
                    TriangularFactor L = cholesky_banded_reference(W);
                    secs = now() - t0;
                } else if (algo == "dense") {
                    Eigen::MatrixXd Wd;
                    if (mu.family.kind() == FamilyKind::ChebyshevT) {
                        fill_tph_dense(mu, size, Wd);
                    } else {
                        const TridiagonalSection X =
                            multiplication_matrix(mu.family, 2 * size - 1);
                        Wd = gram_from_moments(mu, X, size).to_dense();
                    }
                    const double t0 = now();
                    TriangularFactor L = cholesky_dense_reference(std::move(Wd));
                    secs = now() - t0;
                } else if (algo == "hodlr") {
                    HodlrOptions opts;
                    opts.tol = tol;
                    opts.seed = seed;
                    ChebyshevGramOperator op(mu, size);
                    const double t0 = now();
                    HodlrMatrix H = hodlr_compress(op, opts);
                    HodlrCholesky R = hodlr_cholesky(H, opts);
                    secs = now() - t0;
                } else {
                    throw ConfigError("unknown algo: " + algo);
                }
                os << size << ',' << algo << ',' << io::format_double(secs) << '\n';
            }
        }
        return 0;
    }

    if (*cmd_rankmap) {
        const MomentVector mu = src.moments(2 * n);
        HodlrOptions opts;
        opts.tol = tol;
        opts.seed = seed;
        std::unique_ptr<LinearBlockOperator> op;
        if (mu.family.kind() == FamilyKind::ChebyshevT) {
            op = std::make_unique<ChebyshevGramOperator>(mu, n);
        } else {
            GramSection W =
                gram_from_moments(mu, multiplication_matrix(mu.family, 2 * n - 1), n);
            op = std::make_unique<DenseBlockOperator>(W.to_dense());
        }
        HodlrMatrix H = hodlr_compress(*op, opts);
        HodlrCholesky R = hodlr_cholesky(H, opts);
        std::ofstream f;
        std::ostream& os = open_out(f, out);
        io::write_rank_report_csv(os, rank_report(H));
        if (!out.empty() && out != "-") {
            std::ofstream f2(out + ".factor.csv");
            io::write_rank_report_csv(f2, rank_report(R));
        } else {
            io::write_rank_report_csv(std::cout, rank_report(R));
        }
        return 0;
    }

    if (*cmd_transform) {
        const MomentVector mu = src.moments(2 * n);
        ConnectionProblem p(mu, n, parse_backend(backend_s));
        p.tol = tol;
        p.seed = seed;
        ConnectionResult R = connection_coefficients(p);
        Eigen::VectorXd q(n);
        for (int i = 0; i < n; ++i) q[i] = gaussian_sample(seed, 777, i);
        const double t0 = now();
        Eigen::VectorXd pc = convert_to_known(R, q);
        Eigen::VectorXd back = convert_to_modified(R, pc);
        const double secs = now() - t0;
        const double err2 = (back - q).norm() / q.norm();
        const double erri = (back - q).cwiseAbs().maxCoeff() / q.cwiseAbs().maxCoeff();
        if (!out.empty()) {
            std::ofstream f;
            std::ostream& os = open_out(f, out);
            os << "i,q,p,q_roundtrip\n";
            for (int i = 0; i < n; ++i)
                os << i << ',' << io::format_double(q[i]) << ',' << io::format_double(pc[i])
                   << ',' << io::format_double(back[i]) << '\n';
        }
        std::cout << "n,rel2_roundtrip,relinf_roundtrip,seconds\n"
                  << n << ',' << io::format_double(err2) << ',' << io::format_double(erri) << ','
                  << io::format_double(secs) << "\n";
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const opmod::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const opmod::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
