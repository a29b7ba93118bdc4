#pragma once

// Run configurations for the fracmap command-line tool: validation, dispatch
// to the library and dataset output.  Argument parsing lives in cli_app.hpp.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fracmap/analysis.hpp"
#include "fracmap/dynamics.hpp"
#include "fracmap/glmap.hpp"
#include "fracmap/grid.hpp"
#include "fracmap/io.hpp"

namespace fracmap::cli {

enum class Command { Trajectory, Bifurcation1d, Phase2d, StabilityRegion, FeedbackRegion, Control, Sync, Multistability };

inline const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::Trajectory: return "trajectory";
    case Command::Bifurcation1d: return "bifurcation1d";
    case Command::Phase2d: return "phase2d";
    case Command::StabilityRegion: return "stability-region";
    case Command::FeedbackRegion: return "feedback-region";
    case Command::Control: return "control";
    case Command::Sync: return "sync";
    case Command::Multistability: return "multistability";
  }
  return "?";
}

enum class Format { Csv, Json };

/// Exit statuses of `run`.
enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kInternalError = 4 };

struct RunConfig {
  Command command = Command::Trajectory;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::optional<Grid> mu;
  std::optional<Grid> r;
  double x0 = 0.2;
  double y0 = 0.3;
  std::vector<double> x0_list;
  SimConfig sim;
  ControlConfig control;
  std::optional<Controller> controller;
  std::optional<double> p;  ///< defaults to mu
  std::optional<double> k;
  int which = 1;
  std::size_t samples = 512;
  double resolution = 1e-3;
  std::string output;
  Format format = Format::Csv;
  std::size_t workers = 1;
};

struct Issue {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string message;
};

namespace detail {

inline bool classifies(Command c) {
  return c == Command::Bifurcation1d || c == Command::Phase2d || c == Command::Multistability;
}

inline bool single(const std::optional<Grid>& g) { return g && g->count == 1; }

}  // namespace detail

/// Every violated constraint of `cfg`.  Never throws.
inline std::vector<Issue> validate(const RunConfig& cfg) {
  std::vector<Issue> out;
  auto error = [&](std::string m) { out.push_back({Issue::Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Issue::Severity::Warning, std::move(m)}); };
  auto check_grid = [&](const std::optional<Grid>& g, const char* name) {
    if (!g) return;
    try {
      g->validate(name);
    } catch (const std::exception& e) {
      error(e.what());
    }
  };

  if (!(std::isfinite(cfg.alpha) && cfg.alpha > 0.0 && cfg.alpha <= 1.0)) error("alpha must lie in (0,1]");
  check_grid(cfg.mu, "mu");
  check_grid(cfg.r, "r");
  if (cfg.workers < 1) error("workers must be >= 1");
  if (cfg.output.empty()) error("an output path is required (-o FILE, or '-' for stdout)");
  if (cfg.sim.steps < 1) error("steps must be >= 1");
  if (!std::isfinite(cfg.x0)) error("x0 must be finite");
  if (!(cfg.sim.engine.divergence_bound > 0.0)) error("divergence bound must be positive");

  const Command c = cfg.command;
  const bool needs_mu_r = c != Command::FeedbackRegion;
  if (needs_mu_r && !cfg.mu) error(std::string(to_string(c)) + " requires --mu");
  if (needs_mu_r && !cfg.r) error(std::string(to_string(c)) + " requires --r");

  switch (c) {
    case Command::Trajectory:
    case Command::Control:
    case Command::Sync:
      if (cfg.mu && !detail::single(cfg.mu)) error("--mu must be a single value for " + std::string(to_string(c)));
      if (cfg.r && !detail::single(cfg.r)) error("--r must be a single value for " + std::string(to_string(c)));
      break;
    case Command::Bifurcation1d:
      if (cfg.mu && cfg.r && cfg.mu->count > 1 && cfg.r->count > 1)
        error("bifurcation1d sweeps one parameter; give either --mu or --r as a grid, not both");
      break;
    case Command::Multistability:
      if (cfg.r && !detail::single(cfg.r)) error("--r must be a single value for multistability");
      if (cfg.x0_list.size() < 2) error("multistability needs at least two initial conditions (--x0-list)");
      break;
    case Command::StabilityRegion:
      if (cfg.which < 1 || cfg.which > 3) error("--which must be 1, 2 or 3");
      break;
    case Command::FeedbackRegion:
      if (std::isfinite(cfg.alpha) && cfg.alpha >= 1.0) error("feedback-region needs alpha < 1");
      if (cfg.samples < 64) error("--samples must be >= 64");
      break;
    case Command::Phase2d: break;
  }

  if (detail::classifies(c)) {
    try {
      cfg.sim.validate();
    } catch (const std::exception& e) {
      error(e.what());
    }
  }

  if (c == Command::Control) {
    if (!std::isfinite(cfg.control.b)) error("--b must be finite");
    if (cfg.control.tau < 1) error("--tau must be >= 1");
  }

  if (c == Command::Sync) {
    if (!cfg.controller) error("sync requires --controller H1|H2|H3|H4");
    if (!cfg.k) error("sync requires --k");
    if (!std::isfinite(cfg.y0)) error("y0 must be finite");
    if (cfg.controller && requires_zero_r(*cfg.controller) && cfg.r && detail::single(cfg.r) && cfg.r->lo != 0.0) {
      error(std::string("controller ") + to_string(*cfg.controller) +
            " requires r = 0: the H3/H4 synchronization result covers only the special case r = 0");
    }
    const bool scalar_ok = detail::single(cfg.mu) && detail::single(cfg.r) && std::isfinite(cfg.alpha) &&
                           cfg.alpha > 0.0 && cfg.alpha <= 1.0;
    if (cfg.controller && cfg.k && scalar_ok && !(requires_zero_r(*cfg.controller) && cfg.r->lo != 0.0)) {
      const double mu = cfg.mu->lo;
      const double p = cfg.p.value_or(mu);
      if (p != mu) {
        warn("p = " + io::format_double(p) + " differs from mu = " + io::format_double(mu) +
             "; synchronization is not guaranteed (the conditions are sufficient, not necessary)");
      }
      const auto gi = sync_gain_interval(MapParams{cfg.alpha, mu, cfg.r->lo}, *cfg.controller);
      if (!gi.contains(*cfg.k)) {
        warn("k = " + io::format_double(*cfg.k) + " lies outside (" + io::format_double(gi.lo) + ", " +
             io::format_double(gi.hi) + "); synchronization is not guaranteed (the conditions are sufficient, not necessary)");
      }
    }
  }
  return out;
}

inline bool has_errors(const std::vector<Issue>& issues) {
  for (const auto& i : issues)
    if (i.severity == Issue::Severity::Error) return true;
  return false;
}

/// Resolved configuration written into every output file.  Excludes the
/// worker count and the output path so outputs are byte-identical across them.
inline std::vector<std::pair<std::string, std::string>> provenance(const RunConfig& cfg) {
  using io::format_double;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", to_string(cfg.command));
  kv.emplace_back("alpha", format_double(cfg.alpha));
  if (cfg.mu) kv.emplace_back("mu", io::format_grid(*cfg.mu));
  if (cfg.r) kv.emplace_back("r", io::format_grid(*cfg.r));
  const Command c = cfg.command;
  if (c == Command::FeedbackRegion) {
    kv.emplace_back("samples", std::to_string(cfg.samples));
    return kv;
  }
  if (c == Command::StabilityRegion) {
    kv.emplace_back("which", std::to_string(cfg.which));
    return kv;
  }
  if (c == Command::Multistability) {
    std::string list;
    for (std::size_t i = 0; i < cfg.x0_list.size(); ++i) list += (i ? ";" : "") + format_double(cfg.x0_list[i]);
    kv.emplace_back("x0_list", list);
  } else {
    kv.emplace_back("x0", format_double(cfg.x0));
  }
  if (c == Command::Sync) {
    kv.emplace_back("y0", format_double(cfg.y0));
    if (cfg.controller) kv.emplace_back("controller", to_string(*cfg.controller));
    if (cfg.mu) kv.emplace_back("p", format_double(cfg.p.value_or(cfg.mu->lo)));
    if (cfg.k) kv.emplace_back("k", format_double(*cfg.k));
  }
  if (c == Command::Control) {
    kv.emplace_back("b", format_double(cfg.control.b));
    kv.emplace_back("tau", std::to_string(cfg.control.tau));
    kv.emplace_back("history", cfg.control.history == HistoryRule::HoldInitial ? "hold" : "zero");
  }
  kv.emplace_back("steps", std::to_string(cfg.sim.steps));
  kv.emplace_back("transient", std::to_string(cfg.sim.classifier.transient));
  kv.emplace_back("tail", std::to_string(cfg.sim.classifier.tail));
  kv.emplace_back("p_max", std::to_string(cfg.sim.classifier.p_max));
  kv.emplace_back("tol", format_double(cfg.sim.classifier.tol));
  kv.emplace_back("divergence_bound", format_double(cfg.sim.engine.divergence_bound));
  kv.emplace_back("memory_window", std::to_string(cfg.sim.engine.memory_window));
  if (detail::classifies(c)) kv.emplace_back("retain", std::to_string(cfg.sim.retain));
  return kv;
}

inline nlohmann::ordered_json to_json(const io::Table& table,
                                      const std::vector<std::pair<std::string, std::string>>& config) {
  nlohmann::ordered_json env;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) conf[k] = v;
  env["config"] = conf;
  env["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) r.push_back(nullptr);
            else r.push_back(v);
          },
          cell);
    }
    rows.push_back(std::move(r));
  }
  env["rows"] = std::move(rows);
  return env;
}

/// Dataset plus the counts reported in the summary line.
struct Product {
  io::Table table;
  std::string counts;
};

namespace detail {

template <typename Range, typename Get>
std::string class_counts(const Range& items, Get get) {
  std::map<std::string, std::size_t> counts;
  for (const auto& item : items) ++counts[describe(get(item))];
  std::string s;
  for (const auto& [k, n] : counts) s += (s.empty() ? "" : ", ") + k + "=" + std::to_string(n);
  return s;
}

inline MapParams scalar_params(const RunConfig& cfg) { return {cfg.alpha, cfg.mu->lo, cfg.r->lo}; }

}  // namespace detail

/// Computes the dataset for a validated configuration.
inline Product compute(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Trajectory: {
      const auto tr = simulate(detail::scalar_params(cfg), cfg.x0, cfg.sim.steps, cfg.sim.engine);
      return {io::trajectory_table(tr), std::to_string(tr.states.size()) + " states, outcome " + to_string(tr.outcome)};
    }
    case Command::Control: {
      const MapParams p = detail::scalar_params(cfg);
      const auto tr = simulate_controlled(p, cfg.control, cfg.x0, cfg.sim.steps, cfg.sim.engine);
      std::string counts = std::to_string(tr.states.size()) + " states, outcome " + to_string(tr.outcome);
      const auto& cc = cfg.sim.classifier;
      if (!tr.completed() || (cc.transient + cc.tail <= tr.states.size() && cc.tail >= 2 * cc.p_max)) {
        counts += ", class " + describe(classify_period(tr, cc));
      }
      if (p.alpha < 1.0) {
        counts += ", stabilizing b for a = f'(0):";
        const auto slices = control_interval(p.alpha, eval_derivative(p, 0.0), cfg.resolution);
        if (slices.empty()) counts += " none";
        for (const auto& s : slices) counts += " (" + io::format_double(s.lo) + ", " + io::format_double(s.hi) + ")";
      }
      return {io::trajectory_table(tr), counts};
    }
    case Command::Sync: {
      const MapParams p = detail::scalar_params(cfg);
      const SyncConfig sync{*cfg.controller, cfg.p.value_or(p.mu), *cfg.k};
      const auto run = simulate_coupled(p, sync, cfg.x0, cfg.y0, cfg.sim.steps, cfg.sim.engine);
      double last_abs = run.error.empty() ? 0.0 : std::abs(run.error.back());
      return {io::sync_table(run), std::to_string(run.error.size()) + " states, master " + to_string(run.master.outcome) +
                                       ", slave " + to_string(run.slave.outcome) + ", |E(T)|=" + io::format_double(last_abs)};
    }
    case Command::Bifurcation1d: {
      const bool sweep_r = cfg.r->count > 1 && cfg.mu->count == 1;
      const auto res = sweep_r ? bifurcation_1d(cfg.alpha, SweepAxis::R, cfg.mu->lo, *cfg.r, cfg.x0, cfg.sim, cfg.workers)
                               : bifurcation_1d(cfg.alpha, SweepAxis::Mu, cfg.r->lo, *cfg.mu, cfg.x0, cfg.sim, cfg.workers);
      return {io::bifurcation_table(res), std::to_string(res.points.size()) + " cells (" + to_string(res.axis) + "): " +
                                detail::class_counts(res.points, [](const SweepPoint& p) { return p.cls; })};
    }
    case Command::Phase2d: {
      const auto d = phase_diagram_2d(cfg.alpha, *cfg.mu, *cfg.r, cfg.x0, cfg.sim, cfg.workers);
      return {io::phase_table(d), std::to_string(d.cells.size()) + " cells: " +
                                      detail::class_counts(d.cells, [](const PeriodClass& c) { return c; })};
    }
    case Command::StabilityRegion: {
      const auto r = stability_region_raster(cfg.alpha, *cfg.mu, *cfg.r, cfg.which);
      std::map<std::string, std::size_t> counts;
      for (auto v : r.cells) ++counts[to_string(v)];
      std::string s;
      for (const auto& [k, n] : counts) s += (s.empty() ? "" : ", ") + k + "=" + std::to_string(n);
      return {io::raster_table(r), std::to_string(r.cells.size()) + " cells: " + s};
    }
    case Command::FeedbackRegion: {
      const auto region = feedback_boundary(cfg.alpha, cfg.samples);
      return {io::feedback_table(region), std::to_string(region.vertices().size()) + " boundary vertices"};
    }
    case Command::Multistability: {
      const auto reports = multistability_sweep(cfg.alpha, cfg.r->lo, *cfg.mu, cfg.x0_list, cfg.sim, cfg.workers);
      std::size_t differing = 0;
      for (const auto& rep : reports) differing += rep.any_difference() ? 1 : 0;
      return {io::multistability_table(reports), std::to_string(reports.size()) + " mu values, initial conditions disagree at " +
                                                     std::to_string(differing)};
    }
  }
  throw std::logic_error("unknown command");
}

inline void write_product(std::ostream& os, const RunConfig& cfg, const io::Table& table) {
  const auto prov = provenance(cfg);
  if (cfg.format == Format::Json) {
    os << to_json(table, prov).dump(1) << '\n';
  } else {
    io::write_csv(os, table, prov);
  }
}

/// Validates, computes and writes the dataset; prints warnings and errors to
/// `err` and the one-line summary to `out`.  Returns an ExitCode.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto issues = validate(cfg);
  for (const auto& i : issues) {
    err << (i.severity == Issue::Severity::Error ? "error: " : "warning: ") << i.message << '\n';
  }
  if (has_errors(issues)) return kConfigError;

  const auto start = std::chrono::steady_clock::now();
  Product product;
  try {
    product = compute(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (cfg.output == "-") {
    write_product(out, cfg, product.table);
  } else {
    std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot open '" << cfg.output << "' for writing\n";
      return kIoError;
    }
    write_product(file, cfg, product.table);
    file.flush();
    if (!file) {
      err << "error: failed writing '" << cfg.output << "'\n";
      return kIoError;
    }
  }
  std::ostringstream line;
  line.precision(3);
  line << std::fixed << seconds;
  (cfg.output == "-" ? err : out) << to_string(cfg.command) << ": " << product.counts << ", " << product.table.rows.size()
                                  << " rows, " << line.str() << " s\n";
  return kOk;
}

}  // namespace fracmap::cli
