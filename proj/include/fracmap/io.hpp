#pragma once

// Tabular datasets and their CSV text form.
//
// Doubles are written in the shortest decimal form that parses back to the
// same bits, so identical results always produce identical files.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "fracmap/analysis.hpp"
#include "fracmap/dynamics.hpp"
#include "fracmap/glmap.hpp"
#include "fracmap/grid.hpp"

namespace fracmap::io {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Parses "lo:hi:count" or a single value "v" (a one-point grid).
inline Grid parse_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  auto bad = [&] { return std::invalid_argument("malformed grid '" + std::string(text) + "', expected lo:hi:count or a number"); };
  if (parts.size() == 1) {
    const auto v = parse_double(parts[0]);
    if (!v) throw bad();
    return Grid::point(*v);
  }
  if (parts.size() != 3) throw bad();
  const auto lo = parse_double(parts[0]);
  const auto hi = parse_double(parts[1]);
  const auto n = parse_int(parts[2]);
  if (!lo || !hi || !n || *n < 1) throw bad();
  Grid g{*lo, *hi, static_cast<std::size_t>(*n)};
  g.validate(std::string("grid '" + std::string(text) + "'").c_str());
  return g;
}

inline std::string format_grid(const Grid& g) {
  if (g.count == 1) return format_double(g.lo);
  return format_double(g.lo) + ":" + format_double(g.hi) + ":" + std::to_string(g.count);
}

/// One cell of a dataset.  monostate is an empty field.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

/// `comments` become leading "# key=value" lines.
inline void write_csv(std::ostream& os, const Table& table,
                      const std::vector<std::pair<std::string, std::string>>& comments = {}) {
  for (const auto& [k, v] : comments) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

/// Raw CSV contents: comment lines dropped, header split off, fields unparsed.
struct CsvText {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::invalid_argument("CSV has no column '" + std::string(name) + "'");
  }

  double number(std::size_t row, std::string_view col) const {
    const auto v = parse_double(rows.at(row).at(column(col)));
    if (!v) throw std::invalid_argument("CSV field '" + std::string(col) + "' is not a number");
    return *v;
  }
};

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline CsvText read_csv(std::istream& is) {
  CsvText out;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (!have_header) {
      out.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != out.columns.size()) throw std::invalid_argument("CSV row width does not match the header");
    out.rows.push_back(std::move(fields));
  }
  if (!have_header) throw std::invalid_argument("CSV has no header line");
  return out;
}

inline CsvText read_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Result -> table
// ---------------------------------------------------------------------------

inline std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

inline Cell class_cell(const PeriodClass& c) { return std::string(to_string(c.kind)); }
inline Cell period_cell(const PeriodClass& c) { return as_int(c.period); }

inline Table trajectory_table(const Trajectory& tr) {
  Table t{{"t", "x"}, {}};
  t.rows.reserve(tr.states.size());
  for (std::size_t i = 0; i < tr.states.size(); ++i) t.rows.push_back({as_int(i), tr.states[i]});
  return t;
}

inline Table sync_table(const CoupledRun& run) {
  Table t{{"t", "x", "y", "e"}, {}};
  for (std::size_t i = 0; i < run.error.size(); ++i)
    t.rows.push_back({as_int(i), run.master.states[i], run.slave.states[i], run.error[i]});
  return t;
}

/// One row per retained tail value; a point with no tail gets one row with
/// empty tail_index and x.
inline Table bifurcation_table(const SweepResult& res) {
  Table t{{"param", "tail_index", "x", "class", "period"}, {}};
  for (const auto& p : res.points) {
    if (p.tail.empty()) {
      t.rows.push_back({p.param, std::monostate{}, std::monostate{}, class_cell(p.cls), period_cell(p.cls)});
      continue;
    }
    for (std::size_t i = 0; i < p.tail.size(); ++i)
      t.rows.push_back({p.param, as_int(i), p.tail[i], class_cell(p.cls), period_cell(p.cls)});
  }
  return t;
}

inline Table phase_table(const PhaseDiagram& d) {
  Table t{{"mu", "r", "class", "period"}, {}};
  t.rows.reserve(d.cells.size());
  for (std::size_t i = 0; i < d.mu.count; ++i)
    for (std::size_t j = 0; j < d.r.count; ++j) {
      const auto& c = d.cell(i, j);
      t.rows.push_back({d.mu.at(i), d.r.at(j), class_cell(c), period_cell(c)});
    }
  return t;
}

inline Table raster_table(const StabilityRaster& r) {
  Table t{{"mu", "r", "verdict"}, {}};
  for (std::size_t i = 0; i < r.mu.count; ++i)
    for (std::size_t j = 0; j < r.r.count; ++j)
      t.rows.push_back({r.mu.at(i), r.r.at(j), std::string(to_string(r.cell(i, j)))});
  return t;
}

/// t_or_b carries the arc parameter t on the arc and b on the straight pieces.
inline Table feedback_table(const FeedbackRegion& region) {
  Table t{{"piece", "t_or_b", "a", "b"}, {}};
  for (const auto& v : region.vertices()) {
    const double key = v.piece == BoundaryPiece::Arc ? v.t : v.b;
    t.rows.push_back({std::string(to_string(v.piece)), key, v.a, v.b});
  }
  return t;
}

inline Table multistability_table(const std::vector<MultistabilityReport>& reports) {
  Table t{{"mu", "x0", "class", "period", "tail_index", "x"}, {}};
  for (const auto& rep : reports)
    for (const auto& e : rep.entries) {
      if (e.tail.empty()) {
        t.rows.push_back({rep.params.mu, e.x0, class_cell(e.cls), period_cell(e.cls), std::monostate{}, std::monostate{}});
        continue;
      }
      for (std::size_t i = 0; i < e.tail.size(); ++i)
        t.rows.push_back({rep.params.mu, e.x0, class_cell(e.cls), period_cell(e.cls), as_int(i), e.tail[i]});
    }
  return t;
}

// ---------------------------------------------------------------------------
// CSV -> result (used to check that nothing is lost on the way out)
// ---------------------------------------------------------------------------

inline PeriodClass parse_class(const std::string& kind, const std::string& period) {
  const auto k = parse_period_kind(kind);
  const auto p = parse_int(period);
  if (!k || !p || *p < 0) throw std::invalid_argument("bad class/period fields '" + kind + "," + period + "'");
  return PeriodClass{*k, static_cast<std::size_t>(*p), 0.0};
}

inline std::vector<double> parse_trajectory_csv(std::string_view text) {
  const CsvText csv = read_csv(text);
  std::vector<double> states;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (csv.number(i, "t") != static_cast<double>(i)) throw std::invalid_argument("trajectory rows out of order");
    states.push_back(csv.number(i, "x"));
  }
  return states;
}

/// Cells in mu-major order with their coordinates.
struct PhaseCell {
  double mu;
  double r;
  PeriodClass cls;
};

inline std::vector<PhaseCell> parse_phase_csv(std::string_view text) {
  const CsvText csv = read_csv(text);
  const auto ic = csv.column("class"), ip = csv.column("period");
  std::vector<PhaseCell> out;
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    out.push_back({csv.number(i, "mu"), csv.number(i, "r"), parse_class(csv.rows[i][ic], csv.rows[i][ip])});
  return out;
}

/// Regroups bifurcation rows into one SweepPoint per parameter value
/// (residual and outcome are not part of the file format).
inline std::vector<SweepPoint> parse_bifurcation_csv(std::string_view text) {
  const CsvText csv = read_csv(text);
  const auto ic = csv.column("class"), ip = csv.column("period"), ix = csv.column("x");
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double param = csv.number(i, "param");
    if (out.empty() || out.back().param != param) {
      SweepPoint sp;
      sp.param = param;
      sp.cls = parse_class(csv.rows[i][ic], csv.rows[i][ip]);
      out.push_back(std::move(sp));
    }
    if (!csv.rows[i][ix].empty()) out.back().tail.push_back(csv.number(i, "x"));
  }
  return out;
}

}  // namespace fracmap::io
