#pragma once

// Dataset readers (delimited text, sparse "label idx:val" lines) and result
// tables written as CSV or JSON with a manifest.

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "normreg/core/dataset.hpp"
#include "normreg/error.hpp"

namespace normreg::io {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Parses a finite decimal number; the whole token must be consumed.
inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool is_special_token(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "nan" || lower == "inf" || lower == "infinity";
}

inline double parse_cell(std::string_view token, std::size_t line, std::size_t column) {
  const std::string_view t = trim(token);
  if (is_special_token(t)) {
    throw ParseError("non-finite value '" + std::string(t) + "' is not accepted", line, column);
  }
  const auto v = parse_number(t);
  if (!v) throw ParseError("non-numeric value '" + std::string(t) + "'", line, column);
  if (!std::isfinite(*v)) throw ParseError("value '" + std::string(t) + "' overflows a double", line, column);
  return *v;
}

/// Splits one delimited record, honouring double quotes.
inline std::vector<std::string> split_record(std::string_view line, char delim, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string quote_if_needed(const std::string& s, char delim) {
  if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

struct TableSchema {
  char delimiter = ',';
  bool header = true;
  /// Response column: a header name, or a 1-based index when no header. Empty means the last column.
  std::string response;
  /// Explicit kinds by column name; other columns are inferred ({0, 1} only means binary).
  std::map<std::string, FeatureKind> kinds;
};

inline Dataset read_delimited(const std::filesystem::path& path, const TableSchema& schema = {}) {
  const auto lines = detail::read_lines(path);
  std::size_t first = 0;
  while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ParseError("file is empty", 1);

  std::vector<std::string> header;
  std::size_t width = 0;
  std::size_t data_start = first;
  if (schema.header) {
    header = detail::split_record(lines[first], schema.delimiter, first + 1);
    for (auto& h : header) h = std::string(detail::trim(h));
    width = header.size();
    data_start = first + 1;
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_of_row;
  for (std::size_t k = data_start; k < lines.size(); ++k) {
    if (detail::trim(lines[k]).empty()) continue;
    const auto cells = detail::split_record(lines[k], schema.delimiter, k + 1);
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields but found " + std::to_string(cells.size()),
                       k + 1);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) row[c] = detail::parse_cell(cells[c], k + 1, c + 1);
    rows.push_back(std::move(row));
    line_of_row.push_back(k + 1);
  }
  if (rows.empty()) throw ParseError("no data rows", data_start + 1);
  if (width < 2) throw ParseError("need at least one feature column and a response column", data_start + 1);
  if (header.empty()) {
    for (std::size_t c = 0; c < width; ++c) header.push_back("x" + std::to_string(c + 1));
  }

  std::size_t response = width - 1;
  if (!schema.response.empty()) {
    bool found = false;
    for (std::size_t c = 0; c < width && schema.header; ++c) {
      if (header[c] == schema.response) {
        response = c;
        found = true;
        break;
      }
    }
    if (!found) {
      const auto idx = detail::parse_number(schema.response);
      if (!idx || *idx < 1 || *idx > static_cast<double>(width) || std::floor(*idx) != *idx) {
        throw Error("response column '" + schema.response + "' not found in '" + path.string() + "'");
      }
      response = static_cast<std::size_t>(*idx) - 1;
    }
  }

  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(width) - 1;
  Matrix x(n, p);
  Vector y(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != response) names.push_back(header[c]);
  }
  for (Index i = 0; i < n; ++i) {
    Index j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == response) {
        y(i) = rows[static_cast<std::size_t>(i)][c];
      } else {
        x(i, j++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  std::vector<FeatureKind> kinds;
  for (Index j = 0; j < p; ++j) {
    const auto it = schema.kinds.find(names[static_cast<std::size_t>(j)]);
    if (it != schema.kinds.end()) {
      if (it->second == FeatureKind::Binary && !is_binary_column(x.col(j))) {
        throw Error("column '" + names[static_cast<std::size_t>(j)] + "' is declared binary but holds other values");
      }
      kinds.push_back(it->second);
    } else {
      kinds.push_back(is_binary_column(x.col(j)) ? FeatureKind::Binary : FeatureKind::Continuous);
    }
  }
  return Dataset(std::move(x), std::move(y), std::move(kinds), std::move(names));
}

/// Reads "label idx:val idx:val ..." lines with 1-based, increasing indices.
inline Dataset read_sparse_labeled(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Index, double>>> entries;
  Index p = 0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string& line = lines[k];
    const std::size_t line_no = k + 1;
    if (detail::trim(line).empty()) continue;
    std::size_t pos = 0;
    auto next_token = [&](std::size_t& start) -> std::string_view {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      return std::string_view(line).substr(start, pos - start);
    };
    std::size_t start = 0;
    const std::string_view label = next_token(start);
    labels.push_back(detail::parse_cell(label, line_no, start + 1));
    std::vector<std::pair<Index, double>> row;
    Index last = 0;
    for (;;) {
      const std::string_view tok = next_token(start);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected index:value, got '" + std::string(tok) + "'", line_no, start + 1);
      long long idx = 0;
      const auto ix = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(ix.data(), ix.data() + ix.size(), idx);
      if (ec != std::errc() || ptr != ix.data() + ix.size() || idx < 1) {
        throw ParseError("invalid feature index '" + std::string(ix) + "'", line_no, start + 1);
      }
      if (idx == last) throw ParseError("duplicate feature index " + std::to_string(idx), line_no, start + 1);
      if (idx < last) throw ParseError("feature indices must increase along a line", line_no, start + 1);
      last = static_cast<Index>(idx);
      row.emplace_back(static_cast<Index>(idx) - 1, detail::parse_cell(tok.substr(colon + 1), line_no, start + colon + 2));
      p = std::max(p, static_cast<Index>(idx));
    }
    entries.push_back(std::move(row));
  }
  if (labels.empty()) throw ParseError("file is empty", 1);
  const Index n = static_cast<Index>(labels.size());
  Matrix x = Matrix::Zero(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = labels[static_cast<std::size_t>(i)];
    for (const auto& [j, v] : entries[static_cast<std::size_t>(i)]) x(i, j) = v;
  }
  return Dataset(std::move(x), std::move(y));
}

/// Writes a dataset in the sparse labeled format (zeros omitted).
inline void write_sparse_labeled(const Dataset& data, const std::filesystem::path& path) {
  std::ostringstream out;
  for (Index i = 0; i < data.rows(); ++i) {
    out << detail::format_number(data.y()(i));
    for (Index j = 0; j < data.cols(); ++j) {
      if (data(i, j) != 0.0) out << ' ' << (j + 1) << ':' << detail::format_number(data(i, j));
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << out.str();
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

using Cell = std::variant<std::string, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json manifest = json::object();

  std::size_t column_index(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == name) return c;
    }
    throw Error("table has no column '" + name + "'");
  }
};

enum class Format { Csv, Json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw DomainError("unknown output format '" + std::string(s) + "' (expected csv|json)");
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += detail::quote_if_needed(t.columns[c], ',');
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (const auto* d = std::get_if<double>(&row[c])) {
        out += detail::format_number(*d);
      } else {
        out += detail::quote_if_needed(std::get<std::string>(row[c]), ',');
      }
    }
    out += '\n';
  }
  return out;
}

inline json to_json(const Table& t) {
  json records = json::array();
  for (const auto& row : t.rows) {
    json rec = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (const auto* d = std::get_if<double>(&row[c])) {
        if (std::isfinite(*d)) {
          rec[t.columns[c]] = *d;
        } else {
          rec[t.columns[c]] = detail::format_number(*d);
        }
      } else {
        rec[t.columns[c]] = std::get<std::string>(row[c]);
      }
    }
    records.push_back(std::move(rec));
  }
  return json{{"manifest", t.manifest}, {"records", std::move(records)}};
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

inline std::filesystem::path manifest_path(const std::filesystem::path& path) {
  std::filesystem::path m = path;
  m += ".manifest.json";
  return m;
}

/// CSV output puts the manifest in `<path>.manifest.json`; JSON output embeds it.
inline void write_results(const Table& t, const std::filesystem::path& path, Format format) {
  if (t.rows.empty()) throw Error("refusing to write an empty table to '" + path.string() + "'");
  if (format == Format::Csv) {
    write_atomic(path, to_csv(t));
    write_atomic(manifest_path(path), t.manifest.dump(2) + "\n");
  } else {
    write_atomic(path, to_json(t).dump(2) + "\n");
  }
}

/// Reads a CSV written by write_results. Numeric-looking cells become doubles.
inline Table read_table(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError("file is empty", 1);
  Table t;
  t.columns = detail::split_record(lines[0], ',', 1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto cells = detail::split_record(lines[k], ',', k + 1);
    if (cells.size() != t.columns.size()) {
      throw ParseError("expected " + std::to_string(t.columns.size()) + " fields but found " +
                           std::to_string(cells.size()), k + 1);
    }
    std::vector<Cell> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (detail::is_special_token(cells[c])) {
        throw ParseError("non-finite value '" + cells[c] + "' is not accepted", k + 1, c + 1);
      }
      const auto v = detail::parse_number(cells[c]);
      if (v) {
        row.emplace_back(*v);
      } else {
        row.emplace_back(cells[c]);
      }
    }
    t.rows.push_back(std::move(row));
  }
  const auto mp = manifest_path(path);
  if (std::filesystem::exists(mp)) {
    std::ifstream in(mp);
    t.manifest = json::parse(in);
  }
  return t;
}

}  // namespace normreg::io
