#pragma once

// Asymptotic classification of trajectories and the sweep datasets built on
// it: bifurcation diagrams, mu-r phase diagrams, the delayed-feedback
// stability region and multistability probes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmap/dynamics.hpp"
#include "fracmap/glmap.hpp"
#include "fracmap/grid.hpp"
#include "fracmap/kernel.hpp"
#include "fracmap/parallel.hpp"

namespace fracmap {

// ---------------------------------------------------------------------------
// Period classification
// ---------------------------------------------------------------------------

struct ClassifierConfig {
  std::size_t transient = 500;
  std::size_t tail = 256;
  std::size_t p_max = 64;
  double tol = 1e-4;
};

struct PeriodClass {
  enum class Kind { Period, Chaotic, Divergent, PoleHit };

  Kind kind = Kind::Chaotic;
  std::size_t period = 0;  ///< set only for Kind::Period
  double residual = 0.0;   ///< max |x(t) - x(t-p)| over the tail for the accepted p

  static PeriodClass periodic(std::size_t p, double residual) { return {Kind::Period, p, residual}; }
  static PeriodClass chaotic() { return {Kind::Chaotic, 0, 0.0}; }
  static PeriodClass divergent() { return {Kind::Divergent, 0, 0.0}; }
  static PeriodClass pole_hit() { return {Kind::PoleHit, 0, 0.0}; }

  bool is_period(std::size_t p) const noexcept { return kind == Kind::Period && period == p; }
  /// Same kind and, for periodic orbits, the same period.
  bool same_class(const PeriodClass& o) const noexcept { return kind == o.kind && period == o.period; }
};

inline const char* to_string(PeriodClass::Kind k) noexcept {
  switch (k) {
    case PeriodClass::Kind::Period: return "Period";
    case PeriodClass::Kind::Chaotic: return "Chaotic";
    case PeriodClass::Kind::Divergent: return "Divergent";
    case PeriodClass::Kind::PoleHit: return "PoleHit";
  }
  return "?";
}

inline std::optional<PeriodClass::Kind> parse_period_kind(std::string_view s) {
  if (s == "Period") return PeriodClass::Kind::Period;
  if (s == "Chaotic") return PeriodClass::Kind::Chaotic;
  if (s == "Divergent") return PeriodClass::Kind::Divergent;
  if (s == "PoleHit") return PeriodClass::Kind::PoleHit;
  return std::nullopt;
}

inline std::string describe(const PeriodClass& c) {
  if (c.kind == PeriodClass::Kind::Period) return "Period(" + std::to_string(c.period) + ")";
  return to_string(c.kind);
}

inline void validate(const ClassifierConfig& cfg) {
  if (cfg.p_max < 1) throw std::invalid_argument("p_max must be >= 1");
  if (cfg.tail < 2 * cfg.p_max) {
    throw std::invalid_argument("tail (" + std::to_string(cfg.tail) + ") too short for p_max=" +
                                std::to_string(cfg.p_max) + "; need tail >= 2*p_max");
  }
  if (!(cfg.tol > 0.0) || !std::isfinite(cfg.tol)) throw std::invalid_argument("tol must be positive");
}

/// Max |x(t) - x(t-p)| with both t and t-p inside `tail`.
inline double lag_residual(std::span<const double> tail, std::size_t p) noexcept {
  double worst = 0.0;
  for (std::size_t i = p; i < tail.size(); ++i) worst = std::max(worst, std::abs(tail[i] - tail[i - p]));
  return worst;
}

/// Classifies the last `cfg.tail` states of a completed trajectory.
///
/// Period(p) is the smallest p <= p_max whose lag-p residual over the tail is
/// below tol * max(1, tail amplitude); Chaotic when no p qualifies.  Runs that
/// ended on a pole or diverged map straight to PoleHit / Divergent.
inline PeriodClass classify_period(const Trajectory& traj, const ClassifierConfig& cfg = {}) {
  if (traj.outcome == Outcome::Diverged) return PeriodClass::divergent();
  if (traj.outcome == Outcome::PoleHit) return PeriodClass::pole_hit();
  validate(cfg);
  const std::size_t n = traj.states.size();
  if (cfg.transient + cfg.tail > n) {
    throw std::invalid_argument("trajectory has " + std::to_string(n) + " states; transient+tail needs " +
                                std::to_string(cfg.transient + cfg.tail));
  }
  const std::span<const double> tail(traj.states.data() + (n - cfg.tail), cfg.tail);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  const double threshold = cfg.tol * std::max(1.0, *hi - *lo);
  for (std::size_t p = 1; p <= cfg.p_max; ++p) {
    const double res = lag_residual(tail, p);
    if (res < threshold) return PeriodClass::periodic(p, res);
  }
  return PeriodClass::chaotic();
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SimConfig {
  std::size_t steps = 1000;
  ClassifierConfig classifier;
  EngineOptions engine;
  std::size_t retain = 64;  ///< tail values kept per grid point

  void validate() const {
    if (steps == 0) throw std::invalid_argument("steps must be >= 1");
    fracmap::validate(classifier);
    if (classifier.transient + classifier.tail > steps + 1) {
      throw std::invalid_argument("transient + tail (" +
                                  std::to_string(classifier.transient + classifier.tail) +
                                  ") exceeds the trajectory length steps+1 (" + std::to_string(steps + 1) +
                                  ")");
    }
    if (!(engine.divergence_bound > 0.0)) throw std::invalid_argument("divergence bound must be positive");
  }
};

enum class SweepAxis { Mu, R };

inline const char* to_string(SweepAxis a) noexcept { return a == SweepAxis::Mu ? "mu" : "r"; }

struct SweepPoint {
  double param = 0.0;
  Outcome outcome = Outcome::Completed;
  PeriodClass cls;
  std::vector<double> tail;  ///< last `retain` states (fewer if the run stopped early)
};

struct SweepResult {
  double alpha = 1.0;
  SweepAxis axis = SweepAxis::Mu;
  double fixed = 0.0;  ///< value of the parameter that is not swept
  double x0 = 0.0;
  Grid grid;
  std::vector<SweepPoint> points;
};

namespace detail {

inline std::vector<double> last_n(const std::vector<double>& v, std::size_t n) {
  const std::size_t k = std::min(n, v.size());
  return {v.end() - static_cast<std::ptrdiff_t>(k), v.end()};
}

inline SweepPoint run_point(const MapParams& p, double x0, const KernelWeights& w, const SimConfig& cfg) {
  const Trajectory tr = simulate(p, x0, cfg.steps, w, cfg.engine);
  return SweepPoint{0.0, tr.outcome, classify_period(tr, cfg.classifier), last_n(tr.states, cfg.retain)};
}

}  // namespace detail

/// 1D bifurcation sweep of mu (r fixed) or r (mu fixed).
inline SweepResult bifurcation_1d(double alpha, SweepAxis axis, double fixed, const Grid& sweep, double x0,
                                  const SimConfig& cfg = {}, std::size_t workers = 1) {
  require_valid_order(alpha);
  sweep.validate("sweep grid");
  cfg.validate();
  if (!std::isfinite(fixed) || !std::isfinite(x0)) throw std::invalid_argument("fixed parameter and x0 must be finite");
  const KernelWeights w = build_weights(alpha, cfg.steps);
  SweepResult out{alpha, axis, fixed, x0, sweep, std::vector<SweepPoint>(sweep.count)};
  parallel_for(sweep.count, workers, [&](std::size_t i) {
    const double v = sweep.at(i);
    const MapParams p = axis == SweepAxis::Mu ? MapParams{alpha, v, fixed} : MapParams{alpha, fixed, v};
    out.points[i] = detail::run_point(p, x0, w, cfg);
    out.points[i].param = v;
  });
  return out;
}

/// One PeriodClass per (mu, r) cell, row-major in mu.
struct PhaseDiagram {
  double alpha = 1.0;
  double x0 = 0.0;
  Grid mu;
  Grid r;
  std::vector<PeriodClass> cells;

  const PeriodClass& cell(std::size_t i_mu, std::size_t j_r) const { return cells[i_mu * r.count + j_r]; }
};

inline PhaseDiagram phase_diagram_2d(double alpha, const Grid& mu, const Grid& r, double x0,
                                     const SimConfig& cfg = {}, std::size_t workers = 1) {
  require_valid_order(alpha);
  mu.validate("mu grid");
  r.validate("r grid");
  cfg.validate();
  if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
  const KernelWeights w = build_weights(alpha, cfg.steps);
  PhaseDiagram out{alpha, x0, mu, r, std::vector<PeriodClass>(mu.count * r.count)};
  parallel_for(out.cells.size(), workers, [&](std::size_t idx) {
    const MapParams p{alpha, mu.at(idx / r.count), r.at(idx % r.count)};
    out.cells[idx] = classify_period(simulate(p, x0, cfg.steps, w, cfg.engine), cfg.classifier);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Delayed-feedback stability region in the (b, a) plane, a = f'(0) = mu
// ---------------------------------------------------------------------------

/// Samples with |sin(alpha pi/2 - t alpha/2)| below this are skipped.
inline constexpr double kArcSingularity = 1e-9;

enum class BoundaryPiece { Top, Arc, Line };

inline const char* to_string(BoundaryPiece p) noexcept {
  switch (p) {
    case BoundaryPiece::Top: return "top";
    case BoundaryPiece::Arc: return "arc";
    case BoundaryPiece::Line: return "line";
  }
  return "?";
}

struct PlanePoint {
  double b = 0.0;
  double a = 0.0;
};

/// Point of the parametric boundary at t, or nullopt at the cot/division singularity.
inline std::optional<PlanePoint> feedback_arc_point(double alpha, double t) {
  const double half_pi_alpha = alpha * std::numbers::pi / 2.0;
  const double den = std::sin(half_pi_alpha - t * alpha / 2.0);
  if (std::abs(den) < kArcSingularity) return std::nullopt;
  const double phase = half_pi_alpha + t * (1.0 - alpha / 2.0);
  const double cot = std::cos(half_pi_alpha - t * alpha / 2.0) / den;
  const double a = std::pow(2.0, alpha) * std::pow(std::sin(t / 2.0), alpha) *
                       (std::cos(phase) - std::sin(phase) * cot) +
                   1.0;
  return PlanePoint{std::sin(phase) / den, a};
}

/// The lower-left boundary line a = 1 - 2^alpha (1 + b).
inline double feedback_line_a(double alpha, double b) { return 1.0 - std::pow(2.0, alpha) * (1.0 + b); }

struct BoundaryVertex {
  BoundaryPiece piece;  ///< piece of the edge that starts at this vertex
  double t;             ///< arc parameter (NaN on the top edge start)
  double b;
  double a;
};

/// Closed polygon bounding the region where delayed feedback (tau = 1)
/// stabilizes x* = 0.  Vertices run (-1, 1) along a = 1 to (1, 1), down the
/// parametric arc, and back to (-1, 1) along a = 1 - 2^alpha (1 + b).
class FeedbackRegion {
 public:
  FeedbackRegion(double alpha, std::vector<BoundaryVertex> vertices)
      : alpha_(alpha), vertices_(std::move(vertices)) {}

  double alpha() const noexcept { return alpha_; }
  const std::vector<BoundaryVertex>& vertices() const noexcept { return vertices_; }

  /// Even-odd point-in-polygon test.
  bool contains(double b, double a) const noexcept {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& vi = vertices_[i];
      const auto& vj = vertices_[j];
      if ((vi.a > a) != (vj.a > a)) {
        const double b_cross = vj.b + (a - vj.a) * (vi.b - vj.b) / (vi.a - vj.a);
        if (b < b_cross) inside = !inside;
      }
    }
    return inside;
  }

 private:
  double alpha_;
  std::vector<BoundaryVertex> vertices_;
};

/// Assembles the feedback-control region from its three boundary pieces.
///
/// t is sampled uniformly on [0, 2 pi].  The arc starts at (1, 1) and for
/// t > pi retraces itself, so the walk stops at the singular point t = pi,
/// whose limit (b, a) = ((2 - alpha)/alpha, 1 - 2^alpha (1 + b)) lies on the
/// line, or earlier if a sample falls to the left of the line.
inline FeedbackRegion feedback_boundary(double alpha, std::size_t samples) {
  require_valid_order(alpha);
  if (!(alpha < 1.0)) throw std::invalid_argument("feedback_boundary needs 0 < alpha < 1");
  if (samples < 64) throw std::invalid_argument("feedback_boundary needs samples >= 64");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<BoundaryVertex> v;
  v.push_back({BoundaryPiece::Top, nan, -1.0, 1.0});
  const double dt = 2.0 * std::numbers::pi / static_cast<double>(samples - 1);
  bool closed = false;
  for (std::size_t i = 0; i < samples && !closed; ++i) {
    const double t = dt * static_cast<double>(i);
    if (std::sin(alpha * (std::numbers::pi - t) / 2.0) < 0.0) break;  // past t = pi
    const auto pt = feedback_arc_point(alpha, t);
    if (!pt) continue;
    const double side = pt->a - feedback_line_a(alpha, pt->b);
    if (side <= 0.0 && v.size() > 1) {
      const auto& prev = v.back();
      const double prev_side = prev.a - feedback_line_a(alpha, prev.b);
      const double s = prev_side / (prev_side - side);
      v.push_back({BoundaryPiece::Line, prev.t + s * (t - prev.t), prev.b + s * (pt->b - prev.b),
                   prev.a + s * (pt->a - prev.a)});
      closed = true;
      break;
    }
    v.push_back({BoundaryPiece::Arc, t, pt->b, pt->a});
  }
  if (!closed) {
    const double b_corner = (2.0 - alpha) / alpha;
    v.push_back({BoundaryPiece::Line, std::numbers::pi, b_corner, feedback_line_a(alpha, b_corner)});
  }
  return FeedbackRegion(alpha, std::move(v));
}

struct OpenInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return x > lo && x < hi; }
};

/// Samples used for the polygon behind control_interval; crossings on the arc
/// are then refined by bisection in t.
inline constexpr std::size_t kControlSamples = 1024;

/// Horizontal slice of the feedback region at height a: the gains b that
/// stabilize x* = 0 when f'(0) = a.  Endpoints are accurate to `resolution`.
inline std::vector<OpenInterval> control_interval(double alpha, double a, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw std::invalid_argument("resolution must be positive");
  if (!std::isfinite(a)) throw std::invalid_argument("a must be finite");
  const FeedbackRegion region = feedback_boundary(alpha, kControlSamples);
  const auto& v = region.vertices();
  std::vector<double> crossings;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    if ((p.a > a) == (q.a > a)) continue;
    const bool on_arc = i + 1 < v.size() && p.piece == BoundaryPiece::Arc;
    if (!on_arc) {
      crossings.push_back(p.b + (a - p.a) * (q.b - p.b) / (q.a - p.a));
      continue;
    }
    // Bisection on a(t) - a between the two arc parameters.
    double t_lo = p.t, t_hi = q.t;
    const bool lo_above = p.a > a;
    double b_lo = p.b, b_hi = q.b;
    for (int it = 0; it < 200 && std::abs(b_hi - b_lo) > resolution / 4.0; ++it) {
      const double t_mid = 0.5 * (t_lo + t_hi);
      const auto m = feedback_arc_point(alpha, t_mid);
      if (!m) break;
      if ((m->a > a) == lo_above) {
        t_lo = t_mid;
        b_lo = m->b;
      } else {
        t_hi = t_mid;
        b_hi = m->b;
      }
    }
    crossings.push_back(0.5 * (b_lo + b_hi));
  }
  std::sort(crossings.begin(), crossings.end());
  std::vector<OpenInterval> out;
  for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) out.push_back({crossings[i], crossings[i + 1]});
  return out;
}

// ---------------------------------------------------------------------------
// Multistability
// ---------------------------------------------------------------------------

struct ProbeEntry {
  double x0 = 0.0;
  Outcome outcome = Outcome::Completed;
  PeriodClass cls;
  std::vector<double> tail;
};

struct MultistabilityReport {
  MapParams params;
  std::vector<ProbeEntry> entries;
  /// same[i][j]: entries i and j reached the same asymptotic class.
  std::vector<std::vector<bool>> same;

  bool any_difference() const noexcept {
    for (const auto& row : same)
      for (bool s : row)
        if (!s) return true;
    return false;
  }
};

inline MultistabilityReport multistability_probe(const MapParams& params, const std::vector<double>& x0_list,
                                                 const SimConfig& cfg, const KernelWeights& w) {
  validate(params);
  if (x0_list.size() < 2) throw std::invalid_argument("multistability probe needs >= 2 initial conditions");
  cfg.validate();
  MultistabilityReport rep{params, {}, {}};
  for (double x0 : x0_list) {
    const Trajectory tr = simulate(params, x0, cfg.steps, w, cfg.engine);
    rep.entries.push_back({x0, tr.outcome, classify_period(tr, cfg.classifier), detail::last_n(tr.states, cfg.retain)});
  }
  const std::size_t n = rep.entries.size();
  rep.same.assign(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rep.same[i][j] = rep.entries[i].cls.same_class(rep.entries[j].cls);
  return rep;
}

inline MultistabilityReport multistability_probe(const MapParams& params, const std::vector<double>& x0_list,
                                                 const SimConfig& cfg = {}) {
  validate(params);
  return multistability_probe(params, x0_list, cfg, build_weights(params.alpha, cfg.steps));
}

/// The probe repeated along a mu grid (r fixed), one report per mu.
inline std::vector<MultistabilityReport> multistability_sweep(double alpha, double r, const Grid& mu,
                                                              const std::vector<double>& x0_list,
                                                              const SimConfig& cfg = {}, std::size_t workers = 1) {
  require_valid_order(alpha);
  mu.validate("mu grid");
  cfg.validate();
  const KernelWeights w = build_weights(alpha, cfg.steps);
  std::vector<MultistabilityReport> out(mu.count);
  parallel_for(mu.count, workers, [&](std::size_t i) {
    out[i] = multistability_probe(MapParams{alpha, mu.at(i), r}, x0_list, cfg, w);
  });
  return out;
}

}  // namespace fracmap
