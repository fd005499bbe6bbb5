#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "config.hpp"
#include "doctest.h"
#include "hls/errors.hpp"
#include "run.hpp"

using namespace hls;
using namespace hls::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes the config into a fresh directory and runs the CLI there.
struct CliRun {
  fs::path dir;
  int code = -1;

  CliRun(const std::string& name, const std::string& config, const std::vector<std::string>& extra = {}) {
    dir = fs::temp_directory_path() / ("hlsinv_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << config;
    std::vector<std::string> args{"hlsinv", "--config", (dir / "config.json").string(), "--out", (dir / "out").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    code = cli_main(static_cast<int>(argv.size()), argv.data());
  }
  std::string report() const { return slurp(dir / "out" / "report.csv"); }
  std::string summary() const { return slurp(dir / "out" / "summary.txt"); }
};

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// every number printed in the summary is a cell of the report
void check_summary_in_report(const CliRun& r) {
  const std::string report = r.report(), summary = r.summary();
  const std::regex number(R"(-?[0-9][0-9.e+-]*)");
  int seen = 0;
  for (auto it = std::sregex_iterator(summary.begin(), summary.end(), number); it != std::sregex_iterator(); ++it) {
    CHECK_MESSAGE(report.find(it->str()) != std::string::npos, it->str());
    ++seen;
  }
  CHECK(seen > 0);
}

}  // namespace

TEST_CASE("config: minimal energy config takes the defaults") {
  const RunConfig cfg = parse_config(R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5}})");
  CHECK(cfg.command == Command::energy);
  CHECK(cfg.function.family == "extremizer");
  CHECK(cfg.grid.points == std::vector<int>{256});
  CHECK(make_grid(cfg).spacing == doctest::Approx(20.0 / 256));
  CHECK(make_function(cfg).size() == 256);
}

TEST_CASE("config: validation names the field") {
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 3, "lambda": 3.5}})").find("lambda must lie in (0, N)") !=
        std::string::npos);
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5}, "grid": {"pts": 3}})") ==
        "/grid/pts: unknown key");
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5, "N": 2}})") ==
        "/kernel/N: unknown key");
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5}, "grid": {"points": 4}})")
            .find("/grid/points") == 0);
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5}, "grid": {"points": 5000}})")
            .find("[8, 4096]") != std::string::npos);
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 2, "lambda": 0.5},
                         "grid": {"min": [-1, -1], "max": [1, 2], "points": 16}})")
            .find("spacing") != std::string::npos);
  CHECK(config_error(R"({"command": "energy2", "kernel": {"dim": 1, "lambda": 0.5}})").find("/command") == 0);
  CHECK(config_error(R"({"command": "positivity", "kernel": {"dim": 1, "lambda": 0.5}})").find("/region") == 0);
  CHECK(config_error(R"({"command": "energy", "kernel": {"dim": 2, "lambda": 0.5},
                         "function": {"family": "gaussian", "center": [1, 2, 3]}})")
            .find("/function/center") == 0);
  CHECK(config_error("{\"command\": \"energy\",\n  \"kernel\": {\"dim\": 1,, }}").find("line 2, column") !=
        std::string::npos);
}

TEST_CASE("sharp-constant N=3, lambda=1") {
  const CliRun r("sharp", R"({"command": "sharp-constant", "kernel": {"dim": 3, "lambda": 1}})");
  CHECK(r.code == kPass);
  // pi^{1/2} Gamma(1)/Gamma(5/2) (Gamma(3/2)/Gamma(3))^{-2/3}
  const double exact = std::sqrt(M_PI) / std::tgamma(2.5) * std::pow(std::tgamma(1.5) / std::tgamma(3.0), -2.0 / 3.0);
  const std::string rep = r.report();
  const double value = std::stod(rep.substr(rep.find("sharp_constant,") + 15));
  CHECK(value == doctest::Approx(exact).epsilon(1e-14));
  CHECK(value == doctest::Approx(2.2942).epsilon(2e-4));
  check_summary_in_report(r);
}

TEST_CASE("energy: report and summary agree, runs are reproducible") {
  const std::string cfg = R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5}})";
  const CliRun a("energy_a", cfg), b("energy_b", cfg), c("energy_c", cfg, {"--threads", "4"});
  CHECK(a.code == kPass);
  CHECK(a.report().rfind("name,value,quadrature,est_error\n", 0) == 0);
  CHECK(a.report() == b.report());
  CHECK(a.summary() == b.summary());
  // thread counts only change the order of independent work
  CHECK(a.report() == c.report());
  check_summary_in_report(a);
}

TEST_CASE("positivity below the endpoint is accepted with the verdict suppressed") {
  const CliRun r("pos_counter", R"({"command": "positivity", "kernel": {"dim": 3, "lambda": 0.5},
      "grid": {"min": -2, "max": 2, "points": 16},
      "function": {"family": "gaussian", "center": [0.3, 0, 0.5], "width": 0.6},
      "region": {"kind": "halfspace"}})");
  CHECK(r.code == kPass);
  CHECK(r.report().find(",false,-") != std::string::npos);  // positivity_valid column
  CHECK(r.summary().find("PASS nonnegativity") == std::string::npos);
  CHECK(r.summary().find("FAIL nonnegativity") == std::string::npos);
  CHECK(r.summary().find("suppressed") != std::string::npos);

  const CliRun v("pos_valid", R"({"command": "positivity", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -4, "max": 4, "points": 256},
      "function": {"family": "gaussian", "center": 0.7, "width": 0.5},
      "region": {"kind": "ball", "center": 0, "radius": 1}})");
  CHECK(v.code == kPass);
  CHECK(v.summary().find("PASS nonnegativity") != std::string::npos);
  check_summary_in_report(v);
}

TEST_CASE("transform, represent and hemiball commands") {
  const CliRun t("transform", R"({"command": "transform", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -8, "max": 8, "points": 512},
      "function": {"family": "gaussian", "center": 0.4, "width": 0.7},
      "region": {"kind": "ball", "center": 5, "radius": 3}})");
  CHECK(t.code == kPass);
  CHECK(fs::exists(t.dir / "out" / "transformed_field.csv"));
  CHECK(t.summary().find("outside the grid") == std::string::npos);
  check_summary_in_report(t);

  // a centre inside the support pushes mass to infinity, which the report says
  const CliRun lost("transform_lost", R"({"command": "transform", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -8, "max": 8, "points": 512},
      "function": {"family": "gaussian", "center": 0.4, "width": 0.7},
      "region": {"kind": "ball", "center": 0.6, "radius": 1}})");
  CHECK(lost.summary().find("outside the grid") != std::string::npos);

  const CliRun rp("represent", R"({"command": "represent", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -2, "max": 2, "points": 128},
      "function": {"family": "indicator", "lo": 0, "hi": 1}})");
  CHECK(rp.code == kPass);
  const std::string rep = rp.report();
  const double value = std::stod(rep.substr(rep.find('\n') + 1));
  // integral of (x+y)^{-1/2} over the unit square
  CHECK(value == doctest::Approx((std::pow(2.0, 1.5) - 2.0) / 0.75).epsilon(5e-3));
  check_summary_in_report(rp);

  const CliRun h("hemiball", R"({"command": "hemiball", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -20, "max": 20, "points": 4000}, "hemiball": {"center": 1}})");
  CHECK(h.code == kPass);
  const std::string hr = h.report();
  const double radius = std::stod(hr.substr(hr.find('\n') + 1).substr(hr.substr(hr.find('\n') + 1).find(',') + 1));
  CHECK(radius == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
}

TEST_CASE("lizhu-check passes on the family and fails on a Gaussian") {
  const CliRun ok("lizhu_ok", R"({"command": "lizhu-check", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -20, "max": 20, "points": 4000}})");
  CHECK(ok.code == kPass);
  CHECK(ok.summary().find("FAIL") == std::string::npos);
  check_summary_in_report(ok);

  const CliRun bad("lizhu_gauss", R"({"command": "lizhu-check", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -6, "max": 6, "points": 1200}, "function": {"family": "gaussian"}})");
  CHECK(bad.code == kFail);
  CHECK(bad.summary().find("FAIL pointwise_invariance") != std::string::npos);
  CHECK(bad.summary().find("FAIL mass_identity") != std::string::npos);
}

TEST_CASE("symmetrize and counterexample write their field files") {
  const CliRun s("symmetrize", R"({"command": "symmetrize", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -8, "max": 8, "points": 256},
      "function": {"family": "indicator", "lo": -1, "hi": 1}, "schedule": {"max_sweeps": 5}})");
  CHECK(s.code == kPass);
  CHECK(fs::exists(s.dir / "out" / "trace.csv"));
  CHECK(fs::exists(s.dir / "out" / "final_field.csv"));
  CHECK(slurp(s.dir / "out" / "trace.csv").rfind("step,region_kind,center_0,radius_or_offset,", 0) == 0);
  check_summary_in_report(s);

  const CliRun c("counter", R"({"command": "counterexample", "kernel": {"dim": 3, "lambda": 0.5}})");
  CHECK(c.code == kPass);
  CHECK(fs::exists(c.dir / "out" / "witness_negative.csv"));
  CHECK(fs::exists(c.dir / "out" / "witness_positive.csv"));
  check_summary_in_report(c);
}

TEST_CASE("exit codes for usage and numerical failures") {
  CHECK(CliRun("bad_config", R"({"command": "energy", "kernel": {"dim": 3, "lambda": 3.5}})").code == kUsage);
  CHECK(CliRun("bad_json", R"({"command": )").code == kUsage);
  // a density with a single positive sample cannot be fitted
  CHECK(CliRun("degenerate", R"({"command": "lizhu-check", "kernel": {"dim": 1, "lambda": 0.5},
      "grid": {"min": -1, "max": 1, "points": 16}, "function": {"family": "indicator", "lo": -0.01, "hi": 0.1}})")
            .code == kNumerical);
  std::vector<std::string> args{"hlsinv", "--threads", "0", "--config", "x.json"};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  CHECK(cli_main(static_cast<int>(argv.size()), argv.data()) == kUsage);
}
