#pragma once

// Headerless CSV matrices: one row per line, comma-separated decimals.
// Blank lines and lines starting with '#' are skipped.

#include "dppla/matrix.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace dppla {

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline Matrix read_csv_matrix(std::istream& in, const std::string& source = "<stream>") {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    Index count = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = body.find(',', pos);
      const auto field = detail::trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
      double v = 0.0;
      const char* end = field.data() + field.size();
      const auto [ptr, ec] = std::from_chars(field.data(), end, v);
      if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError(source + ":" + std::to_string(lineno) + ": field " + std::to_string(count + 1) +
                         " is not a finite number: '" + std::string(field) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                       " fields, found " + std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw ParseError(source + ": no data rows");
  return Eigen::Map<const Matrix>(values.data(), rows, cols);
}

inline Matrix read_csv_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_csv_matrix(in, path);
}

/// Writes with 17 significant digits so a read reproduces every entry exactly.
inline void write_csv_matrix(std::ostream& out, const Matrix& m) {
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace dppla
