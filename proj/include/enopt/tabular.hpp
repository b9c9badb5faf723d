#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enopt/errors.hpp"

// Small text/csv/json emitters for tables and key-value records. Numbers
// are printed with 9 significant digits in every format so the formats
// encode identical values.

namespace enopt {

enum class OutputFormat { Text, Csv, Json };

inline OutputFormat output_format_from_name(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw validation_error("unknown output format '" + std::string(name) +
                         "' (one of text, csv, json)");
}

/// 9 significant digits; non-finite values print as nan/inf/-inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// One output value: a pre-formatted numeral, a plain token, or empty.
struct Cell {
  std::string text;
  bool numeric = false;

  static Cell number(double v) { return Cell{format_number(v), std::isfinite(v)}; }
  static Cell token(std::string s) { return Cell{std::move(s), false}; }
  static Cell empty() { return Cell{"", false}; }
};

namespace detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline void json_cell(std::ostream& os, const Cell& c) {
  if (c.numeric)
    os << c.text;  // numeral already formatted
  else if (c.text.empty())
    os << "null";
  else
    os << '"' << json_escape(c.text) << '"';
}

}  // namespace detail

/// Columnar output: header plus uniform rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write(std::ostream& os, OutputFormat fmt) const {
    switch (fmt) {
      case OutputFormat::Csv: {
        for (std::size_t c = 0; c < columns.size(); ++c)
          os << (c ? "," : "") << columns[c];
        os << "\n";
        for (const auto& row : rows) {
          for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << row[c].text;
          os << "\n";
        }
        break;
      }
      case OutputFormat::Json: {
        os << "[";
        for (std::size_t r = 0; r < rows.size(); ++r) {
          os << (r ? ",\n " : "\n ") << "{";
          for (std::size_t c = 0; c < rows[r].size(); ++c) {
            os << (c ? ", " : "") << '"' << detail::json_escape(columns[c])
               << "\": ";
            detail::json_cell(os, rows[r][c]);
          }
          os << "}";
        }
        os << "\n]\n";
        break;
      }
      case OutputFormat::Text: {
        std::vector<std::size_t> width(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c)
          width[c] = columns[c].size();
        for (const auto& row : rows)
          for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].text.size());
        const auto pad = [&](const std::string& s, std::size_t w) {
          os << s << std::string(w - s.size(), ' ');
        };
        for (std::size_t c = 0; c < columns.size(); ++c) {
          if (c) os << "  ";
          pad(columns[c], width[c]);
        }
        os << "\n";
        for (const auto& row : rows) {
          for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << "  ";
            pad(row[c].text, width[c]);
          }
          os << "\n";
        }
        break;
      }
    }
  }
};

/// Ordered key-value output for single-result commands.
struct Record {
  std::vector<std::pair<std::string, Cell>> fields;

  void add(std::string key, Cell value) {
    fields.emplace_back(std::move(key), std::move(value));
  }

  void write(std::ostream& os, OutputFormat fmt) const {
    switch (fmt) {
      case OutputFormat::Csv: {
        for (std::size_t i = 0; i < fields.size(); ++i)
          os << (i ? "," : "") << fields[i].first;
        os << "\n";
        for (std::size_t i = 0; i < fields.size(); ++i)
          os << (i ? "," : "") << fields[i].second.text;
        os << "\n";
        break;
      }
      case OutputFormat::Json: {
        os << "{";
        for (std::size_t i = 0; i < fields.size(); ++i) {
          os << (i ? ",\n " : "\n ") << '"'
             << detail::json_escape(fields[i].first) << "\": ";
          detail::json_cell(os, fields[i].second);
        }
        os << "\n}\n";
        break;
      }
      case OutputFormat::Text: {
        std::size_t w = 0;
        for (const auto& [key, _] : fields) w = std::max(w, key.size());
        for (const auto& [key, value] : fields)
          os << key << ":" << std::string(w - key.size() + 1, ' ')
             << value.text << "\n";
        break;
      }
    }
  }
};

}  // namespace enopt
