#pragma once

// Fractional-sum kernel of the Caputo-like difference with h = 1, a = 0.
//
// The memory term of the map iteration is
//
//   sum_{j=1..t} c_{t-j} * g_j,   c_n = Gamma(n + alpha) / (Gamma(alpha) * Gamma(n + 1)),
//
// where g_j is the increment produced at step j.  The weights c_n depend only
// on the order and the lag, so one table serves every trajectory of a sweep.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmap {

/// Throws std::invalid_argument unless 0 < alpha <= 1.
inline void require_valid_order(double alpha) {
  if (!std::isfinite(alpha) || !(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("alpha must lie in (0,1], got " + std::to_string(alpha));
  }
}

/// Immutable table c_0..c_N of normalized Gamma-ratio weights.
class KernelWeights {
 public:
  /// Builds c_0..c_horizon with the multiplicative recurrence
  /// c_{n+1} = c_n (n + alpha) / (n + 1).  No Gamma function is evaluated,
  /// so arbitrarily long horizons are safe.
  static KernelWeights build(double alpha, std::size_t horizon) {
    require_valid_order(alpha);
    std::vector<double> coeffs(horizon + 1);
    coeffs[0] = 1.0;
    for (std::size_t n = 0; n < horizon; ++n) {
      const double nd = static_cast<double>(n);
      coeffs[n + 1] = coeffs[n] * ((nd + alpha) / (nd + 1.0));
    }
    return KernelWeights(alpha, std::move(coeffs));
  }

  double alpha() const noexcept { return alpha_; }
  std::size_t horizon() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t lag) const { return coeffs_[lag]; }

 private:
  KernelWeights(double alpha, std::vector<double> coeffs)
      : alpha_(alpha), coeffs_(std::move(coeffs)) {}

  double alpha_;
  std::vector<double> coeffs_;
};

inline KernelWeights build_weights(double alpha, std::size_t horizon) {
  return KernelWeights::build(alpha, horizon);
}

namespace detail {

// Unchecked inner loop shared by the trajectory engines.  Oldest term first;
// plain sequential accumulation so results are bitwise reproducible.
inline double convolve_oldest_first(const double* coeffs, const double* increments,
                                    std::size_t t, std::size_t window) noexcept {
  std::size_t first = 1;
  if (window != 0 && t > window) first = t - window + 1;
  double acc = 0.0;
  for (std::size_t j = first; j <= t; ++j) {
    acc += coeffs[t - j] * increments[j - 1];
  }
  return acc;
}

}  // namespace detail

/// Evaluates sum_{j=1..t} c_{t-j} * increments[j-1].
///
/// `window` = 0 keeps the full memory.  A positive window L drops every lag
/// larger than L - 1, i.e. only the L most recent increments contribute.
inline double memory_sum(const KernelWeights& weights, std::span<const double> increments,
                         std::size_t t, std::size_t window = 0) {
  if (t == 0) throw std::invalid_argument("memory_sum: step t must be positive");
  if (increments.size() < t) {
    throw std::invalid_argument("memory_sum: need " + std::to_string(t) + " increments, got " +
                                std::to_string(increments.size()));
  }
  if (weights.horizon() + 1 < t) {
    throw std::invalid_argument("memory_sum: kernel horizon " +
                                std::to_string(weights.horizon()) + " too short for t=" +
                                std::to_string(t));
  }
  return detail::convolve_oldest_first(weights.coeffs().data(), increments.data(), t, window);
}

}  // namespace fracmap
