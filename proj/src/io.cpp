#include "opmod/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "opmod/errors.hpp"

namespace opmod::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_moments_csv(std::ostream& os, const MomentVector& mu) {
    os << "n,mu\n";
    for (int n = 0; n < mu.size(); ++n) os << n << ',' << format_double(mu[n]) << '\n';
}

void write_moments_csv(std::ostream& os, const MomentVector& mu,
                       const Eigen::VectorXd& quadrature_reference) {
    os << "n,mu,rel_err_vs_quadrature\n";
    const double scale = std::max(1.0, quadrature_reference.cwiseAbs().maxCoeff());
    for (int n = 0; n < mu.size(); ++n) {
        const double err =
            n < quadrature_reference.size()
                ? std::fabs(mu[n] - quadrature_reference[n]) / scale
                : std::nan("");
        os << n << ',' << format_double(mu[n]) << ',' << format_double(err) << '\n';
    }
}

void write_gram_csv(std::ostream& os, const GramSection& W) {
    if (W.storage() == GramStorage::ToeplitzPlusHankel) {
        write_moments_csv(os, W.moments());
        return;
    }
    os << "i,j,w\n";
    for (int i = 0; i < W.size(); ++i)
        for (int j = 0; j < W.size(); ++j)
            os << i << ',' << j << ',' << format_double(W.entry(i, j)) << '\n';
}

void write_factor_csv(std::ostream& os, const TriangularFactor& L) {
    os << "i,j,l\n";
    for (int j = 0; j < L.size(); ++j) {
        const double* col = L.column(j);
        const int len = L.column_length(j);
        for (int k = 0; k < len; ++k)
            os << (j + k) << ',' << j << ',' << format_double(col[k]) << '\n';
    }
}

void write_jacobi_csv(std::ostream& os, const TridiagonalSection& X) {
    os << "i,j,x\n";
    for (int j = 0; j < X.n; ++j) {
        for (int i = std::max(0, j - 1); i <= std::min(X.n - 1, j + 1); ++i)
            os << i << ',' << j << ',' << format_double(X.at(i, j)) << '\n';
    }
}

void write_rank_report_csv(std::ostream& os, const std::vector<RankReportRow>& rows) {
    os << "level,block_row,block_col,rows,cols,rank\n";
    for (const auto& r : rows)
        os << r.level << ',' << r.block_row << ',' << r.block_col << ',' << r.rows << ','
           << r.cols << ',' << r.rank << '\n';
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(os, v);
}

double get_f64(std::istream& is) {
    std::uint64_t v = get_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

void write_factor_binary(std::ostream& os, const TriangularFactor& L) {
    const int n = L.size();
    const int b = L.is_banded() ? L.bandwidth() : n - 1;
    put_u64(os, static_cast<std::uint64_t>(n));
    put_u64(os, static_cast<std::uint64_t>(b));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k <= b; ++k) put_f64(os, j + k < n && k < L.column_length(j)
                                                     ? L.column(j)[k]
                                                     : 0.0);
    }
}

TriangularFactor read_factor_binary(std::istream& is) {
    const int n = static_cast<int>(get_u64(is));
    const int b = static_cast<int>(get_u64(is));
    if (!is || n <= 0 || b < 0 || b >= n) throw ConfigError("read_factor_binary: bad header");
    TriangularFactor L = b == n - 1 ? TriangularFactor::dense(n) : TriangularFactor::banded(n, b);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k <= b; ++k) {
            const double v = get_f64(is);
            if (k < L.column_length(j)) L.column(j)[k] = v;
        }
    }
    if (!is) throw ConfigError("read_factor_binary: truncated data");
    return L;
}

}  // namespace opmod::io
