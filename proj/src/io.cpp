#include "vbal/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace vbal {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::Parse, where + ": not a number: '" + token + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::Parse, where + ": non-finite entry '" + token + "'");
  return v;
}

long parse_count(const std::string& token) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || v < 1) {
    throw Error(ErrorCode::Parse, "malformed header: '" + token + "' is not a positive integer");
  }
  return v;
}

bool is_comment_or_blank(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

std::string serialize_matrix(const Matrix& a) {
  std::string out = std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string serialize_instance(const Instance& inst) {
  std::string out = "# p " + inst.p().to_string() + " q " + inst.q().to_string();
  if (inst.sparsity_t()) out += " t " + std::to_string(*inst.sparsity_t());
  return out + "\n" + serialize_matrix(inst.a());
}

Matrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) {
    if (!is_comment_or_blank(line)) rows.push_back(line);
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, "malformed header: empty input");
  const auto header = tokens(rows[0]);
  if (header.size() != 2) throw Error(ErrorCode::Parse, "malformed header: expected 'm n'");
  const long m = parse_count(header[0]);
  const long n = parse_count(header[1]);
  if (static_cast<long>(rows.size()) - 1 != m) {
    throw Error(ErrorCode::Parse, "wrong row count: header says " + std::to_string(m) +
                                      ", found " + std::to_string(rows.size() - 1));
  }
  Matrix a(m, n);
  for (long i = 0; i < m; ++i) {
    const auto row = tokens(rows[static_cast<std::size_t>(i) + 1]);
    const std::string where = "row " + std::to_string(i + 1);
    if (static_cast<long>(row.size()) != n) {
      throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(n) + " entries, found " +
                                        std::to_string(row.size()));
    }
    for (long j = 0; j < n; ++j) a(i, j) = parse_double(row[static_cast<std::size_t>(j)], where);
  }
  return a;
}

Instance parse_instance(const std::string& text, Exponent p, Exponent q,
                        std::optional<int> sparsity_t) {
  return Instance(parse_matrix(text), p, q, sparsity_t);
}

std::string serialize_coloring(const Vector& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) out += ' ';
    out += format_double(x[i]);
  }
  return out + "\n";
}

Vector parse_coloring(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> values;
  for (std::string line; std::getline(in, line);) {
    if (is_comment_or_blank(line)) continue;
    for (const auto& t : tokens(line)) values.push_back(parse_double(t, "coloring"));
  }
  if (values.empty()) throw Error(ErrorCode::Parse, "coloring: no entries");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for '" + path + "'");
}

}  // namespace vbal
