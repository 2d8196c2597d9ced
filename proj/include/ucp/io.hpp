#pragma once

#include <string>
#include <vector>

#include "ucp/geometry.hpp"
#include "ucp/operators.hpp"
#include "ucp/spectral.hpp"

namespace ucp::io {

// Matrix Market, coordinate real symmetric, lower triangle, 1-based,
// values printed with %.17g so a round trip is bit-exact. The diagonal
// potential is folded into the diagonal entries.
void write_matrix_market(const std::string& path, const SparseSymmetricOperator& op);
SparseSymmetricOperator read_matrix_market(const std::string& path);

// Grid mask: small text header (magic, dim, shape, h, origin) followed by
// the raw node classification bytes in row-major order.
void write_grid_mask(const std::string& path, const GridDiscretization& grid);
GridDiscretization read_grid_mask(const std::string& path); // geometry-only fields

// Ball unions as CSV rows cx,cy,cz,r (one coordinate column per axis).
void write_ball_csv(const std::string& path, const BallUnion& u);
BallUnion read_ball_csv(const std::string& path, int dim);

// Spectral result: one JSON header line, then the eigenvectors as raw
// little-endian float64, one vector after another.
void write_spectral_result(const std::string& path, const spectral::SpectralResult& r);
spectral::SpectralResult read_spectral_result(const std::string& path);

// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace ucp::io
