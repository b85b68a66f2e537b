#pragma once

// Text formats.
//
// Matrix file: a header line "m n", then m lines of n whitespace-separated
// decimals. Lines whose first non-blank character is '#' are comments and
// blank lines are ignored. Coloring file: n whitespace-separated decimals.

#include <optional>
#include <string>

#include "vbal/core.hpp"

namespace vbal {

/// 17 significant digits, so parsing reproduces every entry bit-exactly.
std::string serialize_matrix(const Matrix& a);
std::string serialize_instance(const Instance& inst);

/// Throws Parse on a malformed header, wrong row or column count,
/// unparseable or non-finite entries.
Matrix parse_matrix(const std::string& text);
/// parse_matrix followed by the instance checks (p <= q, sparsity).
Instance parse_instance(const std::string& text, Exponent p, Exponent q,
                        std::optional<int> sparsity_t = std::nullopt);

std::string serialize_coloring(const Vector& x);
Vector parse_coloring(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace vbal
