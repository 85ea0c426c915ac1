#pragma once

// Journal impact-factor tables: a header row naming the journal column and
// one IF_<year> column per year, then one row per journal.
//
//   JOURNAL;IF_2011;IF_2012;IF_2013
//   Ca-A Cancer Journal For Clinicians;101,78;153,459;162,5
//
// Delimiter is ';', tab or ','. Numeric cells match -?[0-9]+([.,][0-9]+)?,
// with ',' accepted as the decimal mark only when decimal_comma is set (and
// never with a comma delimiter). Blank cells are missing values. Cells may be
// wrapped in double quotes, with "" standing for a literal quote.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "powertail/errors.hpp"

namespace powertail {

struct JournalRecord {
  std::string name;
  std::map<int, double> impact_factors;  ///< year -> impact factor; years may be missing

  friend bool operator==(const JournalRecord&, const JournalRecord&) = default;
};

struct MalformedRow {
  std::size_t line = 0;  ///< 1-based line number in the input
  std::string reason;
};

/// Bookkeeping for one parse (or an exclusion pass). For a parse,
/// rows_parsed + malformed.size() == rows_read; blank lines and the header
/// are not rows.
struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_parsed = 0;
  std::vector<std::string> excluded;
  std::vector<MalformedRow> malformed;
  std::vector<std::string> warnings;
};

enum class Delimiter { Auto, Semicolon, Tab, Comma };

struct ParseOptions {
  Delimiter delimiter = Delimiter::Auto;
  bool decimal_comma = false;
  /// Header cells matching this pattern are year columns; group 1 is the year.
  std::string year_pattern = R"(^IF_?(\d{4})$)";
};

struct ParsedTable {
  std::vector<JournalRecord> records;
  IngestReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), std::string_view::reverse_iterator(b), not_space).base();
  return {b, static_cast<std::size_t>(e - b)};
}

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

// Splits one line into trimmed cells, honouring double-quoted cells.
// Returns nullopt on an unterminated quote.
inline std::optional<std::vector<std::string>> split_cells(std::string_view line, char delim) {
  std::vector<std::string> cells;
  std::size_t i = 0;
  while (true) {
    while (i < line.size() && line[i] != delim && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::string cell;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell += '"';
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        cell += line[i++];
      }
      if (!closed) return std::nullopt;
      while (i < line.size() && line[i] != delim) {
        if (!std::isspace(static_cast<unsigned char>(line[i]))) return std::nullopt;
        ++i;
      }
    } else {
      const std::size_t start = i;
      while (i < line.size() && line[i] != delim) ++i;
      cell = std::string(trim(line.substr(start, i - start)));
    }
    cells.push_back(std::move(cell));
    if (i >= line.size()) break;
    ++i;  // delimiter
  }
  return cells;
}

inline char delimiter_char(Delimiter d) {
  switch (d) {
    case Delimiter::Semicolon:
      return ';';
    case Delimiter::Tab:
      return '\t';
    case Delimiter::Comma:
      return ',';
    case Delimiter::Auto:
      break;
  }
  return '\0';
}

inline Delimiter detect_delimiter(std::string_view header) {
  if (header.find(';') != std::string_view::npos) return Delimiter::Semicolon;
  if (header.find('\t') != std::string_view::npos) return Delimiter::Tab;
  if (header.find(',') != std::string_view::npos) return Delimiter::Comma;
  return Delimiter::Semicolon;
}

// Parses a numeric cell; nullopt when it does not match the cell grammar.
inline std::optional<double> parse_number(std::string_view cell, bool decimal_comma) {
  std::size_t i = 0;
  if (i < cell.size() && cell[i] == '-') ++i;
  const std::size_t int_start = i;
  while (i < cell.size() && std::isdigit(static_cast<unsigned char>(cell[i]))) ++i;
  if (i == int_start) return std::nullopt;
  std::string text(cell.substr(0, i));
  if (i < cell.size()) {
    const char mark = cell[i];
    if (mark != '.' && !(mark == ',' && decimal_comma)) return std::nullopt;
    const std::size_t frac_start = ++i;
    while (i < cell.size() && std::isdigit(static_cast<unsigned char>(cell[i]))) ++i;
    if (i == frac_start || i != cell.size()) return std::nullopt;
    text += '.';
    text += cell.substr(frac_start);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

/// Parses a table. Malformed rows are reported, never silently dropped.
/// Throws DataError on empty input or an unreadable header, ConfigError
/// when decimal commas are allowed together with a comma delimiter.
inline ParsedTable parse_table(std::istream& in, const ParseOptions& options = {}) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  if (detail::trim(text).empty()) throw DataError("empty input");

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  std::size_t header_at = 0;
  while (detail::trim(lines[header_at]).empty()) ++header_at;
  const std::string_view header = lines[header_at];
  if (!detail::valid_utf8(header)) throw DataError("unreadable header: not valid UTF-8");

  const Delimiter delim_kind =
      options.delimiter == Delimiter::Auto ? detail::detect_delimiter(header) : options.delimiter;
  if (delim_kind == Delimiter::Comma && options.decimal_comma) {
    throw ConfigError("decimal commas are ambiguous with a comma delimiter");
  }
  const char delim = detail::delimiter_char(delim_kind);

  const auto header_cells = detail::split_cells(header, delim);
  if (!header_cells || header_cells->size() < 2) throw DataError("unreadable header: need a journal column and year columns");
  const std::regex year_re(options.year_pattern);
  std::vector<std::pair<std::size_t, int>> year_columns;
  ParsedTable out;
  std::set<int> seen_years;
  for (std::size_t c = 1; c < header_cells->size(); ++c) {
    std::smatch m;
    const std::string& cell = (*header_cells)[c];
    if (std::regex_match(cell, m, year_re) && m.size() > 1) {
      const int year = std::stoi(m[1].str());
      if (!seen_years.insert(year).second) throw DataError("unreadable header: year " + std::to_string(year) + " repeated");
      year_columns.emplace_back(c, year);
    } else {
      out.report.warnings.push_back("ignoring column '" + cell + "'");
    }
  }
  if (year_columns.empty()) throw DataError("unreadable header: no year columns match '" + options.year_pattern + "'");

  std::map<std::string, std::size_t> name_count;
  for (std::size_t li = header_at + 1; li < lines.size(); ++li) {
    const std::string_view line = lines[li];
    if (detail::trim(line).empty()) continue;
    ++out.report.rows_read;
    const std::size_t line_no = li + 1;
    auto reject = [&](std::string reason) { out.report.malformed.push_back({line_no, std::move(reason)}); };

    if (!detail::valid_utf8(line)) {
      reject("not valid UTF-8");
      continue;
    }
    const auto cells = detail::split_cells(line, delim);
    if (!cells) {
      reject("unterminated quote");
      continue;
    }
    if (cells->size() != header_cells->size()) {
      reject("expected " + std::to_string(header_cells->size()) + " cells, found " + std::to_string(cells->size()));
      continue;
    }
    JournalRecord rec;
    rec.name = (*cells)[0];
    if (rec.name.empty()) {
      reject("empty journal name");
      continue;
    }
    std::optional<std::string> problem;
    for (const auto& [col, year] : year_columns) {
      const std::string& cell = (*cells)[col];
      if (cell.empty()) continue;
      const auto v = detail::parse_number(cell, options.decimal_comma);
      if (!v) {
        problem = "unparseable value '" + cell + "' for " + std::to_string(year);
        break;
      }
      if (*v < 0.0) {
        problem = "negative impact factor for " + std::to_string(year);
        break;
      }
      rec.impact_factors[year] = *v + 0.0;  // folds -0 into 0
    }
    if (problem) {
      reject(std::move(*problem));
      continue;
    }
    if (++name_count[detail::fold_case(rec.name)] == 2) {
      out.report.warnings.push_back("duplicate journal name '" + rec.name + "' kept as separate records");
    }
    out.records.push_back(std::move(rec));
    ++out.report.rows_parsed;
  }
  return out;
}

/// Removes journals whose name equals one of `names`, ignoring ASCII case.
/// Names matching nothing produce a warning.
inline std::pair<std::vector<JournalRecord>, IngestReport> apply_exclusions(std::vector<JournalRecord> records,
                                                                            const std::vector<std::string>& names) {
  IngestReport delta;
  std::set<std::string> wanted;
  for (const auto& n : names) wanted.insert(detail::fold_case(detail::trim(n)));
  std::set<std::string> matched;
  std::vector<JournalRecord> kept;
  kept.reserve(records.size());
  for (auto& rec : records) {
    const std::string key = detail::fold_case(rec.name);
    if (wanted.contains(key)) {
      matched.insert(key);
      delta.excluded.push_back(rec.name);
    } else {
      kept.push_back(std::move(rec));
    }
  }
  for (const auto& n : names) {
    if (!matched.contains(detail::fold_case(detail::trim(n)))) {
      delta.warnings.push_back("exclusion '" + n + "' matched no journal");
    }
  }
  return {std::move(kept), std::move(delta)};
}

/// Impact factors for `year` in record order; journals lacking it are skipped.
inline std::vector<double> column_values(const std::vector<JournalRecord>& records, int year) {
  std::vector<double> out;
  std::set<int> available;
  for (const auto& rec : records) {
    for (const auto& [y, v] : rec.impact_factors) available.insert(y);
    if (auto it = rec.impact_factors.find(year); it != rec.impact_factors.end()) out.push_back(it->second);
  }
  if (!available.contains(year)) {
    std::string list;
    for (int y : available) list += (list.empty() ? "" : ", ") + std::to_string(y);
    throw DataError("year " + std::to_string(year) + " not present; available years: " +
                    (list.empty() ? std::string("none") : list));
  }
  return out;
}

/// Shortest fixed-notation text that reads back to exactly v.
inline std::string format_decimal(double v) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc()) throw RangeError("format_decimal: value not representable");
  return std::string(buf, ptr);
}

/// Writes records in the canonical layout: ';' delimiter, '.' decimals,
/// one IF_<year> column for every year present in any record.
inline void write_table(std::ostream& out, const std::vector<JournalRecord>& records) {
  std::set<int> years;
  for (const auto& rec : records) {
    for (const auto& [y, v] : rec.impact_factors) years.insert(y);
  }
  out << "JOURNAL";
  for (int y : years) out << ";IF_" << y;
  out << '\n';
  for (const auto& rec : records) {
    if (rec.name.find_first_of(";\"") != std::string::npos || detail::trim(rec.name) != rec.name) {
      std::string quoted = "\"";
      for (char c : rec.name) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      out << quoted << '"';
    } else {
      out << rec.name;
    }
    for (int y : years) {
      out << ';';
      if (auto it = rec.impact_factors.find(y); it != rec.impact_factors.end()) out << format_decimal(it->second);
    }
    out << '\n';
  }
}

}  // namespace powertail
