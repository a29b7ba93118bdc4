#pragma once

// Trajectory engines: the free map, the delayed-feedback controlled map and
// the master-slave pair used for synchronization.
//
// All three evaluate x(t) = x(0) [+ b x(t - tau)] + sum_{j=1..t} c_{t-j} g_j.
// Each increment g_j is computed once, when x(j-1) becomes known, and cached,
// so a run of T steps costs O(T^2) multiply-adds and O(T) memory.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracmap/glmap.hpp"
#include "fracmap/kernel.hpp"

namespace fracmap {

inline constexpr double kDefaultDivergenceBound = 1e8;

enum class Outcome { Completed, PoleHit, Diverged };

inline const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Completed: return "Completed";
    case Outcome::PoleHit: return "PoleHit";
    case Outcome::Diverged: return "Diverged";
  }
  return "?";
}

/// x(0..T) together with the configuration that generated it.
///
/// A run stops at the first event.  For PoleHit, `event_step` is the index of
/// the state sitting on the pole (the last stored state); for Diverged it is
/// the index of the first state with |x| above the bound (also stored).
struct Trajectory {
  MapParams params;
  double x0 = 0.0;
  std::vector<double> states;
  Outcome outcome = Outcome::Completed;
  std::size_t event_step = 0;

  bool completed() const noexcept { return outcome == Outcome::Completed; }
};

struct EngineOptions {
  double divergence_bound = kDefaultDivergenceBound;
  /// 0 keeps the full memory; L > 0 keeps only the L most recent increments.
  std::size_t memory_window = 0;
};

/// Value used for x(s), s < 0, when the feedback delay reaches before the start.
enum class HistoryRule { HoldInitial, Zero };

struct ControlConfig {
  double b = 0.0;
  std::size_t tau = 1;
  HistoryRule history = HistoryRule::HoldInitial;
};

enum class Controller { H1, H2, H3, H4 };

inline const char* to_string(Controller c) noexcept {
  switch (c) {
    case Controller::H1: return "H1";
    case Controller::H2: return "H2";
    case Controller::H3: return "H3";
    case Controller::H4: return "H4";
  }
  return "?";
}

inline std::optional<Controller> parse_controller(std::string_view s) {
  if (s == "H1" || s == "h1") return Controller::H1;
  if (s == "H2" || s == "h2") return Controller::H2;
  if (s == "H3" || s == "h3") return Controller::H3;
  if (s == "H4" || s == "h4") return Controller::H4;
  return std::nullopt;
}

/// H3 and H4 are only defined for the r = 0 special case.
inline bool requires_zero_r(Controller c) noexcept { return c == Controller::H3 || c == Controller::H4; }

struct SyncConfig {
  Controller controller = Controller::H1;
  double p = 0.0;  ///< controller parameter; the sufficient conditions need p = mu
  double k = 0.0;  ///< coupling gain
};

namespace detail {

inline void check_run_inputs(const MapParams& params, double x0, std::size_t steps) {
  validate(params);
  if (!std::isfinite(x0)) throw std::invalid_argument("initial state must be finite");
  if (steps == 0) throw std::invalid_argument("steps must be >= 1");
}

inline void check_weights(const KernelWeights& w, const MapParams& params, std::size_t steps) {
  if (w.alpha() != params.alpha) {
    throw std::invalid_argument("kernel weights were built for alpha=" + std::to_string(w.alpha()) +
                                ", run uses alpha=" + std::to_string(params.alpha));
  }
  if (w.horizon() + 1 < steps) {
    throw std::invalid_argument("kernel horizon " + std::to_string(w.horizon()) +
                                " too short for " + std::to_string(steps) + " steps");
  }
}

inline bool escaped(double x, double bound) noexcept { return !std::isfinite(x) || std::abs(x) > bound; }

// Shared engine for the free and controlled maps.  `feedback` is null for the
// free map, which then computes exactly x0 + sum.
inline Trajectory run_single(const MapParams& params, double x0, std::size_t steps,
                             const KernelWeights& w, const EngineOptions& opts,
                             const ControlConfig* feedback) {
  Trajectory tr{params, x0, {}, Outcome::Completed, 0};
  tr.states.reserve(steps + 1);
  tr.states.push_back(x0);
  std::vector<double> increments;
  increments.reserve(steps);
  const double* c = w.coeffs().data();

  for (std::size_t t = 1; t <= steps; ++t) {
    const double prev = tr.states[t - 1];
    const auto fx = try_eval_map(params, prev);
    if (!fx) {
      tr.outcome = Outcome::PoleHit;
      tr.event_step = t - 1;
      return tr;
    }
    increments.push_back(*fx - prev);
    const double mem = convolve_oldest_first(c, increments.data(), t, opts.memory_window);
    double x;
    if (feedback != nullptr) {
      double delayed;
      if (t >= feedback->tau) {
        delayed = tr.states[t - feedback->tau];
      } else {
        delayed = feedback->history == HistoryRule::HoldInitial ? x0 : 0.0;
      }
      x = x0 + feedback->b * delayed + mem;
    } else {
      x = x0 + mem;
    }
    tr.states.push_back(x);
    if (escaped(x, opts.divergence_bound)) {
      tr.outcome = Outcome::Diverged;
      tr.event_step = t;
      return tr;
    }
  }
  return tr;
}

}  // namespace detail

/// Free fractional GLM, sharing a precomputed kernel (horizon >= steps - 1).
inline Trajectory simulate(const MapParams& params, double x0, std::size_t steps,
                           const KernelWeights& weights, const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  detail::check_weights(weights, params, steps);
  return detail::run_single(params, x0, steps, weights, opts, nullptr);
}

inline Trajectory simulate(const MapParams& params, double x0, std::size_t steps,
                           const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  return simulate(params, x0, steps, build_weights(params.alpha, steps), opts);
}

inline void validate(const ControlConfig& control) {
  if (!std::isfinite(control.b)) throw std::invalid_argument("feedback gain b must be finite");
  if (control.tau < 1) throw std::invalid_argument("delay tau must be >= 1");
}

/// GLM with delayed feedback b x(t - tau) added to every state.
inline Trajectory simulate_controlled(const MapParams& params, const ControlConfig& control, double x0,
                                      std::size_t steps, const KernelWeights& weights,
                                      const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  validate(control);
  detail::check_weights(weights, params, steps);
  return detail::run_single(params, x0, steps, weights, opts, &control);
}

inline Trajectory simulate_controlled(const MapParams& params, const ControlConfig& control, double x0,
                                      std::size_t steps, const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  return simulate_controlled(params, control, x0, steps, build_weights(params.alpha, steps), opts);
}

/// Controller value H(x, y), or nullopt when x or y sits on a pole.
inline std::optional<double> controller_value(const MapParams& params, const SyncConfig& sync, double x,
                                              double y) {
  const double e = x - y;
  switch (sync.controller) {
    case Controller::H1:
    case Controller::H2: {
      const double dx = map_denominator(params, x);
      const double dy = map_denominator(params, y);
      if (std::abs(dx) < kPoleTolerance || std::abs(dy) < kPoleTolerance) return std::nullopt;
      const double num = sync.controller == Controller::H1 ? sync.p * e - sync.p * (x * x - y * y)
                                                           : sync.p * e * (1.0 - 2.0 * x);
      return num / (dx * dy) + sync.k * e;
    }
    case Controller::H3: return sync.k * e - sync.p * (x * x - y * y);
    case Controller::H4: return sync.k * e + 2.0 * sync.p * (x * y - x * x);
  }
  return std::nullopt;
}

inline void validate(const SyncConfig& sync, const MapParams& params) {
  if (!std::isfinite(sync.p) || !std::isfinite(sync.k)) {
    throw std::invalid_argument("controller parameters p and k must be finite");
  }
  if (requires_zero_r(sync.controller) && params.r != 0.0) {
    throw std::invalid_argument(std::string("controller ") + to_string(sync.controller) +
                                " is only defined for the special case r = 0");
  }
}

/// Which side of a coupled run hit an event first.
enum class CoupledFailure { None, Master, Slave, Both };

struct CoupledRun {
  Trajectory master;
  Trajectory slave;
  std::vector<double> error;  ///< E(t) = x(t) - y(t)
  CoupledFailure failure = CoupledFailure::None;
};

/// Master evolves freely; the slave adds H(x(j-1), y(j-1)) to each increment.
/// Both sides stop together at the first event on either side.
inline CoupledRun simulate_coupled(const MapParams& params, const SyncConfig& sync, double x0, double y0,
                                   std::size_t steps, const KernelWeights& weights,
                                   const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  detail::check_run_inputs(params, y0, steps);
  validate(sync, params);
  detail::check_weights(weights, params, steps);

  CoupledRun run{Trajectory{params, x0, {x0}, Outcome::Completed, 0},
                 Trajectory{params, y0, {y0}, Outcome::Completed, 0},
                 {x0 - y0},
                 CoupledFailure::None};
  auto& xs = run.master.states;
  auto& ys = run.slave.states;
  xs.reserve(steps + 1);
  ys.reserve(steps + 1);
  run.error.reserve(steps + 1);
  std::vector<double> gx, gy;
  gx.reserve(steps);
  gy.reserve(steps);
  const double* c = weights.coeffs().data();

  auto mark = [&](bool master_hit, bool slave_hit, Outcome what, std::size_t step) {
    if (master_hit) {
      run.master.outcome = what;
      run.master.event_step = step;
    }
    if (slave_hit) {
      run.slave.outcome = what;
      run.slave.event_step = step;
    }
    run.failure = master_hit && slave_hit ? CoupledFailure::Both
                  : master_hit            ? CoupledFailure::Master
                                          : CoupledFailure::Slave;
  };

  for (std::size_t t = 1; t <= steps; ++t) {
    const double x = xs[t - 1];
    const double y = ys[t - 1];
    const auto fx = try_eval_map(params, x);
    const auto fy = try_eval_map(params, y);
    const auto h = (fx && fy) ? controller_value(params, sync, x, y) : std::nullopt;
    if (!fx || !fy || !h) {
      mark(!fx, !fy, Outcome::PoleHit, t - 1);
      return run;
    }
    gx.push_back(*fx - x);
    gy.push_back(*fy - y + *h);
    const double xn = x0 + detail::convolve_oldest_first(c, gx.data(), t, opts.memory_window);
    const double yn = y0 + detail::convolve_oldest_first(c, gy.data(), t, opts.memory_window);
    xs.push_back(xn);
    ys.push_back(yn);
    run.error.push_back(xn - yn);
    const bool mx = detail::escaped(xn, opts.divergence_bound);
    const bool my = detail::escaped(yn, opts.divergence_bound);
    if (mx || my) {
      mark(mx, my, Outcome::Diverged, t);
      return run;
    }
  }
  return run;
}

inline CoupledRun simulate_coupled(const MapParams& params, const SyncConfig& sync, double x0, double y0,
                                   std::size_t steps, const EngineOptions& opts = {}) {
  detail::check_run_inputs(params, x0, steps);
  return simulate_coupled(params, sync, x0, y0, steps, build_weights(params.alpha, steps), opts);
}

/// Open interval of coupling gains for which synchronization is guaranteed.
struct GainInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double k) const noexcept { return k > lo && k < hi; }
};

/// (-1, 2^alpha - 1) for H1/H2; (mu - 1, mu - 1 + 2^alpha) for H3/H4 (r = 0 only).
inline GainInterval sync_gain_interval(const MapParams& params, Controller controller) {
  validate(params);
  const double width = std::pow(2.0, params.alpha);
  if (requires_zero_r(controller)) {
    if (params.r != 0.0) {
      throw std::invalid_argument(std::string("controller ") + to_string(controller) +
                                  " is only defined for the special case r = 0");
    }
    return {params.mu - 1.0, params.mu - 1.0 + width};
  }
  return {-1.0, -1.0 + width};
}

}  // namespace fracmap
