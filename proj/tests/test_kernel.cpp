#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fracmap/kernel.hpp"
#include "oracles.hpp"

using namespace fracmap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("weights at alpha = 1 are all one", "[kernel]") {
  const auto w = build_weights(1.0, 5);
  REQUIRE(w.coeffs().size() == 6);
  for (double c : w.coeffs()) CHECK(c == 1.0);
}

TEST_CASE("first weights match the closed form", "[kernel]") {
  const auto w = build_weights(0.5, 2);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.5);
  CHECK_THAT(w[2], WithinAbs(0.375, 1e-15));
}

TEST_CASE("recurrence agrees with the log-gamma oracle", "[kernel][property]") {
  SECTION("long horizon at alpha = 0.8") {
    const auto w = build_weights(0.8, 1000);
    CHECK_THAT(w[1000], WithinRel(oracle::kernel_weight(0.8, 1000), 1e-10));
  }
  SECTION("every lag up to 50") {
    for (double alpha : {0.2, 0.5, 0.8}) {
      const auto w = build_weights(alpha, 50);
      for (std::size_t n = 0; n <= 50; ++n) CHECK_THAT(w[n], WithinRel(oracle::kernel_weight(alpha, n), 1e-10));
    }
  }
}

TEST_CASE("weights are positive and non-increasing for alpha < 1", "[kernel][property]") {
  for (double alpha : {0.1, 0.5, 0.99}) {
    const auto w = build_weights(alpha, 400);
    for (std::size_t n = 1; n <= 400; ++n) {
      CHECK(w[n] > 0.0);
      CHECK(w[n] <= w[n - 1]);
    }
  }
}

TEST_CASE("invalid orders are rejected", "[kernel]") {
  for (double alpha : {0.0, -0.3, 1.5, std::nan("")}) CHECK_THROWS_AS(build_weights(alpha, 4), std::invalid_argument);
}

TEST_CASE("memory_sum small cases", "[kernel]") {
  const std::vector<double> g3{2.5, 2.5, 2.5};
  CHECK(memory_sum(build_weights(1.0, 3), g3, 3) == 7.5);
  const std::vector<double> one{-4.25};
  for (double alpha : {0.3, 0.7, 1.0}) CHECK(memory_sum(build_weights(alpha, 1), one, 1) == -4.25);
  const std::vector<double> ones{1.0, 1.0};
  CHECK(memory_sum(build_weights(0.5, 2), ones, 2) == 1.5);
}

TEST_CASE("memory_sum is linear in the increments", "[kernel][property]") {
  const auto w = build_weights(0.6, 40);
  std::vector<double> a(40), b(40), sum(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = std::sin(0.3 * static_cast<double>(i));
    b[i] = std::cos(1.7 * static_cast<double>(i)) - 0.2;
    sum[i] = 2.0 * a[i] - 3.0 * b[i];
  }
  for (std::size_t t = 1; t <= 40; ++t) {
    CHECK_THAT(memory_sum(w, sum, t), WithinAbs(2.0 * memory_sum(w, a, t) - 3.0 * memory_sum(w, b, t), 1e-12));
  }
}

TEST_CASE("memory_sum at alpha = 1 is a prefix sum", "[kernel][property]") {
  const auto w = build_weights(1.0, 30);
  std::vector<double> g(30);
  double prefix = 0.0;
  for (std::size_t i = 0; i < 30; ++i) g[i] = 0.1 * static_cast<double>(i) - 1.0;
  for (std::size_t t = 1; t <= 30; ++t) {
    prefix += g[t - 1];
    CHECK_THAT(memory_sum(w, g, t), WithinAbs(prefix, 1e-12));
  }
}

TEST_CASE("a memory window drops the oldest lags", "[kernel]") {
  const auto w = build_weights(0.5, 10);
  const std::vector<double> g{1, 1, 1, 1};
  // Window 2 keeps g_3 (weight c0) and g_2 (weight c1).
  CHECK(memory_sum(w, g, 4, 2) == 1.5);
  CHECK(memory_sum(w, g, 4, 0) == memory_sum(w, g, 4, 100));
}

TEST_CASE("memory_sum rejects inconsistent inputs", "[kernel]") {
  const auto w = build_weights(0.5, 2);
  const std::vector<double> g{1, 1, 1, 1};
  CHECK_THROWS(memory_sum(w, g, 0));
  CHECK_THROWS(memory_sum(w, std::vector<double>{1.0}, 2));
  CHECK_THROWS(memory_sum(w, g, 4));
}
