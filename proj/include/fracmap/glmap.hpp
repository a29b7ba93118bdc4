#pragma once

// The generalized logistic map f(x) = mu x (1 - x) / (1 + r mu x (1 - x)),
// its derivative, fixed points and their asymptotic-stability verdicts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmap/grid.hpp"
#include "fracmap/kernel.hpp"

namespace fracmap {

/// Denominator magnitude below which an iterate is treated as sitting on the pole.
inline constexpr double kPoleTolerance = 1e-12;
/// Half-width of the band around each stability boundary reported as Marginal.
inline constexpr double kMarginalBand = 1e-12;
/// Relative residual |f(x*) - x*| accepted for a fixed point.
inline constexpr double kFixedPointTolerance = 1e-9;

struct MapParams {
  double alpha = 1.0;
  double mu = 0.0;
  double r = 0.0;
};

inline void validate(const MapParams& p) {
  require_valid_order(p.alpha);
  if (!std::isfinite(p.mu)) throw std::invalid_argument("mu must be finite");
  if (!std::isfinite(p.r)) throw std::invalid_argument("r must be finite");
}

/// Raised when the map is evaluated within kPoleTolerance of 1 + r g(x) = 0.
class PoleError : public std::domain_error {
 public:
  explicit PoleError(double x)
      : std::domain_error("map evaluated at the pole 1 + r*mu*x*(1-x) = 0 (x = " +
                          std::to_string(x) + ")"),
        x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class NotAFixedPointError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The classical logistic term g(x) = mu x (1 - x).
inline double logistic_term(const MapParams& p, double x) noexcept { return p.mu * x * (1.0 - x); }

inline double map_denominator(const MapParams& p, double x) noexcept {
  return 1.0 + p.r * logistic_term(p, x);
}

inline bool at_pole(const MapParams& p, double x) noexcept {
  return std::abs(map_denominator(p, x)) < kPoleTolerance;
}

/// f(x), or nullopt on the pole.  Hot-path variant used by the trajectory engines.
inline std::optional<double> try_eval_map(const MapParams& p, double x) noexcept {
  const double g = logistic_term(p, x);
  const double den = 1.0 + p.r * g;
  if (std::abs(den) < kPoleTolerance) return std::nullopt;
  return g / den;
}

inline double eval_map(const MapParams& p, double x) {
  if (auto v = try_eval_map(p, x)) return *v;
  throw PoleError(x);
}

/// f'(x) = mu (1 - 2x) / (1 + r mu x (1 - x))^2.
inline double eval_derivative(const MapParams& p, double x) {
  const double den = map_denominator(p, x);
  if (std::abs(den) < kPoleTolerance) throw PoleError(x);
  return p.mu * (1.0 - 2.0 * x) / (den * den);
}

enum class Verdict { Stable, Unstable, Marginal };

inline const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::Unstable: return "Unstable";
    case Verdict::Marginal: return "Marginal";
  }
  return "?";
}

/// Lower edge 1 - 2^alpha of the stability interval for f'(x*).
inline double stability_lower_bound(double alpha) { return 1.0 - std::pow(2.0, alpha); }

/// Applies 1 - 2^alpha < slope < 1 with a Marginal band around both edges.
inline Verdict classify_slope(double alpha, double slope) {
  const double lo = stability_lower_bound(alpha);
  if (std::abs(slope - 1.0) <= kMarginalBand || std::abs(slope - lo) <= kMarginalBand) {
    return Verdict::Marginal;
  }
  return (slope > lo && slope < 1.0) ? Verdict::Stable : Verdict::Unstable;
}

inline bool is_fixed_point(const MapParams& p, double x) {
  const auto fx = try_eval_map(p, x);
  return fx && std::abs(*fx - x) <= kFixedPointTolerance * std::max(1.0, std::abs(x));
}

inline Verdict classify_stability(const MapParams& p, double x_star) {
  validate(p);
  if (!std::isfinite(x_star) || !is_fixed_point(p, x_star)) {
    throw NotAFixedPointError("classify_stability: " + std::to_string(x_star) +
                              " is not a fixed point of f");
  }
  return classify_slope(p.alpha, eval_derivative(p, x_star));
}

struct Equilibrium {
  int index = 1;  ///< 1, 2 or 3 following the x1*, x2*, x3* labelling
  double value = 0.0;
  double derivative = 0.0;
  Verdict verdict = Verdict::Unstable;
  bool double_root = false;
};

struct EquilibriumReport {
  std::vector<Equilibrium> points;
  /// 4 r mu + mu^2 - 2 r mu^2 + r^2 mu^2; x2*, x3* are real when it is >= 0.
  double existence_discriminant = 0.0;

  const Equilibrium* find(int index) const noexcept {
    for (const auto& e : points)
      if (e.index == index) return &e;
    return nullptr;
  }
};

inline double existence_discriminant(double mu, double r) noexcept {
  return 4.0 * r * mu + mu * mu - 2.0 * r * mu * mu + r * r * mu * mu;
}

/// Nontrivial fixed points solve r mu x^2 - mu (1 + r) x + (mu - 1) = 0.
/// Returns {x2*, x3*} with the closed-form labelling (principal square roots,
/// so sqrt(mu) sqrt(q) = -sqrt(mu q) when mu < 0), evaluated without
/// cancellation.  Empty when the roots are complex or r mu = 0.
struct NontrivialRoots {
  double x2 = 0.0;
  double x3 = 0.0;
  bool double_root = false;
};

inline std::optional<NontrivialRoots> nontrivial_roots(double mu, double r) {
  const double a = r * mu;
  if (a == 0.0) return std::nullopt;
  const double disc = existence_discriminant(mu, r);
  if (disc < 0.0) return std::nullopt;
  const double b = mu * (1.0 + r);
  const double c = mu - 1.0;
  const double s = (mu < 0.0 ? -1.0 : 1.0) * std::sqrt(disc);
  if (disc == 0.0) {
    const double x = b / (2.0 * a);
    return NontrivialRoots{x, x, true};
  }
  if (b == 0.0) return NontrivialRoots{-s / (2.0 * a), s / (2.0 * a), false};
  // Root without cancellation first, the other from the product of roots c / a.
  const double big = (b + std::copysign(std::sqrt(disc), b)) / (2.0 * a);
  const double small = c / (a * big);
  // x3* = (b + s) / 2a is the cancellation-free root exactly when s has the sign of b.
  const bool big_is_x3 = (s > 0.0) == (b > 0.0);
  return big_is_x3 ? NontrivialRoots{small, big, false} : NontrivialRoots{big, small, false};
}

namespace detail {

inline Equilibrium make_equilibrium(const MapParams& p, int index, double x, bool double_root) {
  Equilibrium e;
  e.index = index;
  e.value = x;
  e.derivative = eval_derivative(p, x);
  e.verdict = classify_slope(p.alpha, e.derivative);
  e.double_root = double_root;
  return e;
}

}  // namespace detail

/// All real fixed points of f for the given parameters.
///
/// r = 0 reports the classical point 1 - 1/mu as x2* (its limit as r -> 0);
/// a double root is reported once, as x2*, with `double_root` set.
inline EquilibriumReport equilibria(const MapParams& p) {
  validate(p);
  EquilibriumReport rep;
  rep.existence_discriminant = existence_discriminant(p.mu, p.r);
  rep.points.push_back(detail::make_equilibrium(p, 1, 0.0, false));
  if (p.mu == 0.0) return rep;
  if (p.r == 0.0) {
    if (p.mu != 1.0) rep.points.push_back(detail::make_equilibrium(p, 2, 1.0 - 1.0 / p.mu, false));
    return rep;
  }
  if (auto roots = nontrivial_roots(p.mu, p.r)) {
    rep.points.push_back(detail::make_equilibrium(p, 2, roots->x2, roots->double_root));
    if (!roots->double_root) rep.points.push_back(detail::make_equilibrium(p, 3, roots->x3, false));
  }
  return rep;
}

enum class RegionCell { Stable, Unstable, Marginal, NotReal, Pole };

inline const char* to_string(RegionCell c) noexcept {
  switch (c) {
    case RegionCell::Stable: return "Stable";
    case RegionCell::Unstable: return "Unstable";
    case RegionCell::Marginal: return "Marginal";
    case RegionCell::NotReal: return "NotReal";
    case RegionCell::Pole: return "Pole";
  }
  return "?";
}

/// Verdicts over a mu x r grid, row-major in mu: cell(i, j) is (mu_i, r_j).
struct StabilityRaster {
  double alpha = 1.0;
  int which = 1;
  Grid mu;
  Grid r;
  std::vector<RegionCell> cells;

  RegionCell cell(std::size_t i_mu, std::size_t j_r) const { return cells[i_mu * r.count + j_r]; }
};

/// Verdict of equilibrium `which` (1, 2 or 3) at one (mu, r) point, from the
/// closed forms only.  Pole marks a closed form that is singular there
/// (division by r mu with no finite limit).
inline RegionCell stability_cell(double alpha, double mu, double r, int which) {
  const MapParams p{alpha, mu, r};
  auto verdict_at = [&](double x) {
    if (at_pole(p, x)) return RegionCell::Pole;
    switch (classify_slope(alpha, eval_derivative(p, x))) {
      case Verdict::Stable: return RegionCell::Stable;
      case Verdict::Marginal: return RegionCell::Marginal;
      case Verdict::Unstable: break;
    }
    return RegionCell::Unstable;
  };
  if (which == 1) return verdict_at(0.0);
  if (mu == 0.0) return RegionCell::Pole;
  if (r == 0.0) {
    if (which == 3) return RegionCell::Pole;
    return verdict_at(1.0 - 1.0 / mu);
  }
  const auto roots = nontrivial_roots(mu, r);
  if (!roots) return RegionCell::NotReal;
  return verdict_at(which == 2 ? roots->x2 : roots->x3);
}

/// Rasterizes the analytic stability condition of one equilibrium over a grid.
inline StabilityRaster stability_region_raster(double alpha, const Grid& mu, const Grid& r, int which) {
  require_valid_order(alpha);
  mu.validate("mu grid");
  r.validate("r grid");
  if (which < 1 || which > 3) throw std::invalid_argument("equilibrium index must be 1, 2 or 3");
  StabilityRaster out{alpha, which, mu, r, {}};
  out.cells.reserve(mu.count * r.count);
  for (std::size_t i = 0; i < mu.count; ++i)
    for (std::size_t j = 0; j < r.count; ++j) out.cells.push_back(stability_cell(alpha, mu.at(i), r.at(j), which));
  return out;
}

}  // namespace fracmap
