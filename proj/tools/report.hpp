#pragma once

// Tabular reports for the dppla CLI, written as commented CSV or JSON.
// Every report carries the schema version, library version and resolved config.

#include "dppla/matrix.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace dppla::cli {

using Cell = std::variant<std::string, double, std::int64_t, bool>;
using json = nlohmann::ordered_json;

struct Report {
  std::string command;
  json config = json::object();
  json summary = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

inline std::string format_csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string out = "\"";
          for (char ch : v) {
            if (ch == '"') out += '"';
            out += ch;
          }
          return out + '"';
        } else if constexpr (std::is_same_v<T, double>) {
          return format_csv_number(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return std::to_string(v);
        }
      },
      c);
}

inline std::string json_scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_csv_number(v.get<double>());
  return v.dump();
}

inline void write_csv(std::ostream& out, const Report& r) {
  out << "# schema=1\n# version=" << kVersion << "\n# command=" << r.command << '\n';
  for (const auto& [k, v] : r.config.items()) out << "# config." << k << '=' << json_scalar_text(v) << '\n';
  for (const auto& [k, v] : r.summary.items()) out << "# summary." << k << '=' << json_scalar_text(v) << '\n';
  for (std::size_t j = 0; j < r.columns.size(); ++j) out << (j ? "," : "") << r.columns[j];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << csv_cell(row[j]);
    out << '\n';
  }
}

inline json to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      c);
}

inline void write_json(std::ostream& out, const Report& r) {
  json doc;
  doc["schema"] = "1";
  doc["version"] = kVersion;
  doc["command"] = r.command;
  doc["config"] = r.config;
  doc["summary"] = r.summary;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json obj = json::object();
    for (std::size_t j = 0; j < row.size() && j < r.columns.size(); ++j) obj[r.columns[j]] = to_json(row[j]);
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

}  // namespace dppla::cli
