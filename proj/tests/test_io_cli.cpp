#include <catch_amalgamated.hpp>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fracmap/cli_app.hpp"
#include "json.hpp"

using namespace fracmap;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::cli_main(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fracmap_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles survive a text round trip bit for bit", "[io][property]") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::bit_cast<double>(gen());
    if (!std::isfinite(v)) continue;
    const auto back = io::parse_double(io::format_double(v));
    REQUIRE(back.has_value());
    CHECK(std::bit_cast<std::uint64_t>(*back) == std::bit_cast<std::uint64_t>(v));
  }
  CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("grid syntax", "[io]") {
  const auto g = io::parse_grid("-4:0:200");
  CHECK(g.lo == -4.0);
  CHECK(g.hi == 0.0);
  CHECK(g.count == 200);
  CHECK(g.at(199) == 0.0);
  CHECK(io::parse_grid("3.5").count == 1);
  CHECK(io::format_grid(g) == "-4:0:200");
  for (const char* bad : {"", "1:2", "1:2:0", "2:1:5", "a:b:3", "1:1:3", "1:2:3:4"}) {
    INFO(bad);
    CHECK_THROWS_AS(io::parse_grid(bad), std::invalid_argument);
  }
}

TEST_CASE("trajectory CSV round trip", "[io]") {
  const auto tr = simulate({0.8, 3.9, 0.1}, 0.3, 300);
  std::ostringstream os;
  io::write_csv(os, io::trajectory_table(tr), {{"alpha", "0.8"}});
  CHECK(os.str().rfind("# alpha=0.8\nt,x\n", 0) == 0);
  CHECK(io::parse_trajectory_csv(os.str()) == tr.states);
}

TEST_CASE("phase and bifurcation CSV round trips", "[io]") {
  SimConfig cfg;
  cfg.retain = 5;
  const auto d = phase_diagram_2d(0.8, Grid{2.0, 4.0, 5}, Grid{0.0, 0.2, 3}, 0.2, cfg, 2);
  std::ostringstream os;
  io::write_csv(os, io::phase_table(d));
  const auto cells = io::parse_phase_csv(os.str());
  REQUIRE(cells.size() == d.cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    CHECK(cells[k].mu == d.mu.at(k / 3));
    CHECK(cells[k].r == d.r.at(k % 3));
    CHECK(cells[k].cls.same_class(d.cells[k]));
  }

  const auto res = bifurcation_1d(0.8, SweepAxis::Mu, 0.1, Grid{2.0, 4.5, 6}, 0.2, cfg, 2);
  std::ostringstream bs;
  io::write_csv(bs, io::bifurcation_table(res));
  const auto pts = io::parse_bifurcation_csv(bs.str());
  REQUIRE(pts.size() == res.points.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].param == res.points[i].param);
    CHECK(pts[i].tail == res.points[i].tail);
    CHECK(pts[i].cls.same_class(res.points[i].cls));
  }
}

TEST_CASE("trajectory command writes steps + 1 rows", "[cli]") {
  const auto path = scratch("t.csv");
  const auto r = run_cli({"trajectory", "--alpha", "0.8", "--mu", "3.9", "--r", "0.1", "--x0", "0.3", "--steps", "500",
                          "-o", path.string()});
  REQUIRE(r.code == 0);
  const auto csv = io::read_csv(slurp(path));
  CHECK(csv.columns == std::vector<std::string>{"t", "x"});
  CHECK(csv.rows.size() == 501);
}

TEST_CASE("sync command reproduces the H1 example", "[cli]") {
  const auto path = scratch("s.csv");
  const auto r = run_cli({"sync", "--alpha", "0.8", "--mu", "3.8", "--r", "0.1", "--controller", "H1", "--p", "3.8",
                          "--k", "0.7", "--x0", "0.1", "--y0", "0.2", "--steps", "300", "-o", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") == std::string::npos);
  const auto csv = io::read_csv(slurp(path));
  CHECK(csv.columns == std::vector<std::string>{"t", "x", "y", "e"});
  for (std::size_t t = 100; t <= 300; ++t) CHECK(std::abs(csv.number(t, "e")) < 1e-2);
}

TEST_CASE("phase2d output is byte-identical across worker counts", "[cli][property]") {
  const auto p1 = scratch("p1.csv"), p4 = scratch("p4.csv");
  const std::vector<std::string> base{"phase2d", "--alpha", "0.2", "--mu", "-4:0:20", "--r", "-4:4:20", "--x0", "0.3"};
  auto a1 = base, a4 = base;
  a1.insert(a1.end(), {"--workers", "1", "-o", p1.string()});
  a4.insert(a4.end(), {"--workers", "4", "-o", p4.string()});
  REQUIRE(run_cli(a1).code == 0);
  REQUIRE(run_cli(a4).code == 0);
  const auto text = slurp(p1);
  CHECK(text == slurp(p4));
  const auto cells = io::parse_phase_csv(text);
  CHECK(cells.size() == 400);
  // Spot-check cells against single trajectories.
  const SimConfig cfg;
  for (std::size_t k = 0; k < cells.size(); k += 37) {
    const auto ref = classify_period(simulate({0.2, cells[k].mu, cells[k].r}, 0.3, cfg.steps), cfg.classifier);
    CHECK(cells[k].cls.same_class(ref));
  }
}

TEST_CASE("json output carries the resolved configuration", "[cli]") {
  const auto r = run_cli({"feedback-region", "--alpha", "0.5", "--samples", "128", "--format", "json", "-o", "-"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["config"]["alpha"] == "0.5");
  CHECK(j["config"]["samples"] == "128");
  CHECK(j["columns"] == nlohmann::json::array({"piece", "t_or_b", "a", "b"}));
  CHECK(j["rows"].size() > 4);
  CHECK(j["rows"][0][0] == "top");
}

TEST_CASE("configuration errors name the violated constraint", "[cli]") {
  auto r = run_cli({"trajectory", "--alpha", "1.5", "--mu", "3", "--r", "0", "-o", "-"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("alpha must lie in (0,1]") != std::string::npos);

  r = run_cli({"sync", "--alpha", "0.8", "--mu", "3", "--r", "0.1", "--controller", "H3", "--k", "2.5", "-o", "-"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("requires r = 0") != std::string::npos);

  r = run_cli({"trajectory", "--alpha", "0.5", "--mu", "1:2:x", "--r", "0", "-o", "-"});
  CHECK(r.code == cli::kConfigError);

  r = run_cli({"trajectory", "--alpha", "0.5", "--mu", "3", "--r", "0", "--random-seed", "4", "-o", "-"});
  CHECK(r.code == cli::kConfigError);
}

TEST_CASE("outside the guaranteed gain range only warns", "[cli]") {
  const auto r = run_cli({"sync", "--alpha", "1", "--mu", "3", "--r", "0", "--controller", "H3", "--p", "2.9", "--k",
                          "3", "--x0", "0.2", "--y0", "0.3", "--steps", "50", "-o", "-"});
  CHECK(r.code == cli::kOk);
  CHECK(r.err.find("warning: p = 2.9 differs from mu = 3") != std::string::npos);
  CHECK(io::read_csv(r.out).rows.size() == 51);
}

TEST_CASE("unwritable output is an I/O error", "[cli]") {
  const auto r = run_cli({"stability-region", "--alpha", "0.5", "--mu", "1:2:3", "--r", "0:1:3", "-o",
                          "/nonexistent-dir/x.csv"});
  CHECK(r.code == cli::kIoError);
}

TEST_CASE("help and the seedless flag", "[cli]") {
  CHECK(run_cli({"--help"}).code == 0);
  const auto r = run_cli({"stability-region", "--alpha", "0.5", "--mu", "1:2:3", "--r", "0:1:3", "--seedless", "-o", "-"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# seedless") == std::string::npos);
  CHECK(run_cli({}).code == cli::kConfigError);
}
