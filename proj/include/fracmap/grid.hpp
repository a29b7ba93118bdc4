#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmap {

/// Uniform grid lo..hi with `count` points, both endpoints included.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  void validate(const char* name = "grid") const {
    const std::string n(name);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument(n + ": bounds must be finite");
    if (count == 0) throw std::invalid_argument(n + ": empty range (count must be >= 1)");
    if (count == 1 && lo != hi) throw std::invalid_argument(n + ": a single-point grid needs lo == hi");
    if (count > 1 && !(hi > lo)) throw std::invalid_argument(n + ": need lo < hi for a strictly increasing grid");
  }

  double step() const noexcept { return count > 1 ? (hi - lo) / static_cast<double>(count - 1) : 0.0; }

  /// i-th node; the last node is exactly hi.
  double at(std::size_t i) const noexcept {
    if (count == 1) return lo;
    if (i + 1 == count) return hi;
    return lo + static_cast<double>(i) * step();
  }

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = at(i);
    return v;
  }

  static Grid point(double v) { return Grid{v, v, 1}; }
};

}  // namespace fracmap
