#ifndef OPMOD_IO_HPP
#define OPMOD_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "opmod/connection.hpp"
#include "opmod/displacement.hpp"
#include "opmod/gram.hpp"
#include "opmod/hodlr.hpp"
#include "opmod/moments.hpp"

namespace opmod::io {

// All CSV output carries 17 significant digits so repeated runs are
// bit-identical.
std::string format_double(double v);

void write_moments_csv(std::ostream& os, const MomentVector& mu);
void write_moments_csv(std::ostream& os, const MomentVector& mu,
                       const Eigen::VectorXd& quadrature_reference);
void write_gram_csv(std::ostream& os, const GramSection& W);
void write_factor_csv(std::ostream& os, const TriangularFactor& L);
void write_jacobi_csv(std::ostream& os, const TridiagonalSection& X);
void write_rank_report_csv(std::ostream& os, const std::vector<RankReportRow>& rows);

// Compact banded factor format: uint64 n, uint64 b, then the column-major
// (b+1) x n band as 8-byte little-endian doubles.
void write_factor_binary(std::ostream& os, const TriangularFactor& L);
TriangularFactor read_factor_binary(std::istream& is);

}  // namespace opmod::io

#endif
