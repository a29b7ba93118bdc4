#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fracmap/glmap.hpp"
#include "oracles.hpp"

using namespace fracmap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Closed forms with principal complex square roots, evaluated naively.
std::complex<double> closed_form(double mu, double r, int which) {
  using C = std::complex<double>;
  const C root = std::sqrt(C(mu)) * std::sqrt(C(4.0 * r + mu - 2.0 * r * mu + r * r * mu));
  const C num = which == 2 ? C(mu + r * mu) - root : C(mu + r * mu) + root;
  return num / (2.0 * r * mu);
}

RegionCell oracle_cell(double alpha, double mu, double r, int which) {
  const auto x = closed_form(mu, r, which);
  if (std::abs(x.imag()) > 1e-12) return RegionCell::NotReal;
  const double xs = x.real();
  const double g = mu * xs * (1.0 - xs);
  const double slope = mu * (1.0 - 2.0 * xs) / ((1.0 + r * g) * (1.0 + r * g));
  return (1.0 - std::pow(2.0, alpha) < slope && slope < 1.0) ? RegionCell::Stable : RegionCell::Unstable;
}

}  // namespace

TEST_CASE("map values", "[glmap]") {
  CHECK(eval_map({0.5, 3.8, 0.1}, 0.0) == 0.0);
  CHECK(eval_map({0.5, 2.0, 0.0}, 0.5) == 0.5);
  CHECK_THAT(eval_map({0.5, 3.8, 0.1}, 0.2), WithinRel(0.608 / 1.0608, 1e-15));
}

TEST_CASE("pole of the map is reported", "[glmap]") {
  // 1 + r mu x (1 - x) = 0 at x = 2 for mu = 1, r = 0.5.
  const MapParams p{0.5, 1.0, 0.5};
  CHECK(at_pole(p, 2.0));
  CHECK_FALSE(try_eval_map(p, 2.0).has_value());
  CHECK_THROWS_AS(eval_map(p, 2.0), PoleError);
  CHECK_THROWS_AS(eval_derivative(p, 2.0), PoleError);
}

TEST_CASE("derivative landmarks", "[glmap]") {
  for (double mu : {-3.0, 0.4, 2.5}) {
    for (double r : {-0.5, 0.0, 0.1, 3.5}) {
      CHECK(eval_derivative({0.5, mu, r}, 0.0) == mu);
      CHECK(eval_derivative({0.5, mu, r}, 0.5) == 0.0);
    }
  }
}

TEST_CASE("derivative matches central differences", "[glmap][property]") {
  for (double mu : {-3.8, -1.0, 2.0, 3.8}) {
    for (double r : {0.0, 0.1, 2.0, 3.5}) {
      const MapParams p{0.8, mu, r};
      for (double x = -0.45; x <= 1.45; x += 0.1) {
        if (std::abs(map_denominator(p, x)) < 0.2) continue;
        const double fd = oracle::central_difference([&](double v) { return oracle::glm(mu, r, v); }, x);
        CHECK_THAT(eval_derivative(p, x), WithinAbs(fd, 1e-6));
      }
    }
  }
}

TEST_CASE("classical logistic equilibria at mu = 2", "[glmap]") {
  const auto rep = equilibria({0.8, 2.0, 0.0});
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.points[0].value == 0.0);
  CHECK(rep.points[0].verdict == Verdict::Unstable);
  CHECK(rep.points[1].value == 0.5);
  CHECK(rep.points[1].verdict == Verdict::Stable);
}

TEST_CASE("nontrivial equilibria agree with bisection roots of f(x) - x", "[glmap]") {
  const MapParams p{0.8, 3.8, 0.1};
  const auto rep = equilibria(p);
  REQUIRE(rep.points.size() == 3);
  auto h = [&](double x) { return oracle::glm(3.8, 0.1, x) - x; };
  // Zero is one root; skip it by scanning away from it.
  auto roots = oracle::scan_roots(h, 0.05, 20.0, 40000);
  REQUIRE(roots.size() == 2);
  CHECK_THAT(rep.find(2)->value, WithinAbs(roots[0], 1e-9));
  CHECK_THAT(rep.find(3)->value, WithinAbs(roots[1], 1e-9));
}

TEST_CASE("fixed-point residuals stay below 1e-9", "[glmap][property]") {
  // Grid points rather than accumulated steps: a mu of order 1e-15 has roots
  // near 1/mu where f' ~ 1/mu^2, and no double can meet the bound there.
  for (double mu : Grid{-4.0, 4.0, 23}.values()) {
    for (double r : Grid{-4.0, 4.0, 21}.values()) {
      const MapParams p{0.5, mu, r};
      for (const auto& e : equilibria(p).points) {
        const auto fx = try_eval_map(p, e.value);
        if (!fx) continue;
        CHECK(std::abs(*fx - e.value) <= 1e-9 * std::max(1.0, std::abs(e.value)));
      }
    }
  }
}

TEST_CASE("labelling follows the closed forms", "[glmap]") {
  for (double mu : {-3.8, -1.3, 2.0, 3.8}) {
    for (double r : {-0.5, 0.1, 2.0, 3.5}) {
      const auto roots = nontrivial_roots(mu, r);
      const auto x2 = closed_form(mu, r, 2);
      if (!roots) {
        CHECK(std::abs(x2.imag()) > 0.0);
        continue;
      }
      CHECK_THAT(roots->x2, WithinAbs(x2.real(), 1e-9 * std::max(1.0, std::abs(x2.real()))));
      CHECK_THAT(roots->x3, WithinAbs(closed_form(mu, r, 3).real(), 1e-9 * std::max(1.0, std::abs(roots->x3))));
    }
  }
}

TEST_CASE("complex equilibria leave only the origin", "[glmap]") {
  // Discriminant -6 + 0.25 + 0.75 + 2.25 < 0.
  const MapParams p{0.5, 0.5, -3.0};
  REQUIRE(existence_discriminant(p.mu, p.r) < 0.0);
  const auto rep = equilibria(p);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].index == 1);
}

TEST_CASE("origin stability strip", "[glmap]") {
  CHECK(classify_stability({0.8, 0.5, 0.1}, 0.0) == Verdict::Stable);
  CHECK(classify_stability({0.8, 1.5, 0.1}, 0.0) == Verdict::Unstable);
  CHECK(classify_stability({0.2, 1.0 - std::pow(2.0, 0.2), 0.1}, 0.0) == Verdict::Marginal);
  CHECK(classify_stability({0.2, 1.0, 0.1}, 0.0) == Verdict::Marginal);
  CHECK_THROWS_AS(classify_stability({0.8, 2.0, 0.0}, 0.3), NotAFixedPointError);
}

TEST_CASE("raster of x1 depends only on mu", "[glmap]") {
  const auto ras = stability_region_raster(0.5, Grid{-2.0, 2.0, 21}, Grid{-4.0, 4.0, 9}, 1);
  for (std::size_t i = 0; i < 21; ++i)
    for (std::size_t j = 1; j < 9; ++j) CHECK(ras.cell(i, j) == ras.cell(i, 0));
}

TEST_CASE("raster of x2 marks complex cells", "[glmap]") {
  CHECK(stability_cell(0.5, 0.5, -3.0, 2) == RegionCell::NotReal);
  CHECK(stability_cell(0.5, 0.0, 1.0, 2) == RegionCell::Pole);
  CHECK(stability_cell(0.5, 2.0, 0.0, 3) == RegionCell::Pole);
}

TEST_CASE("raster of x2 matches direct evaluation around (2, 0.5)", "[glmap]") {
  const Grid mu{1.9, 2.1, 3}, r{0.4, 0.6, 3};
  const auto ras = stability_region_raster(0.5, mu, r, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(ras.cell(i, j) == oracle_cell(0.5, mu.at(i), r.at(j), 2));
}

TEST_CASE("raster of x3 matches direct evaluation on a coarse plane", "[glmap]") {
  const Grid mu{-4.0, 4.0, 17}, r{-3.75, 3.75, 11};
  const auto ras = stability_region_raster(0.8, mu, r, 3);
  for (std::size_t i = 0; i < mu.count; ++i)
    for (std::size_t j = 0; j < r.count; ++j) {
      if (mu.at(i) == 0.0) continue;
      const auto c = ras.cell(i, j);
      if (c == RegionCell::Marginal || c == RegionCell::Pole) continue;
      CHECK(c == oracle_cell(0.8, mu.at(i), r.at(j), 3));
    }
}
