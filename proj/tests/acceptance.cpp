// Runs the eight acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "hls/energy.hpp"
#include "hls/errors.hpp"
#include "hls/lizhu.hpp"
#include "hls/parallel.hpp"
#include "hls/positivity.hpp"
#include "hls/symmetrize.hpp"
#include "run.hpp"

using namespace hls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <class Fn>
Field from_function(const Grid& g, Fn fn) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.point(i));
  return Field(g, std::move(v));
}

Field random_bumps(const Grid& g, std::mt19937_64& rng, double c, double wmin, double wmax) {
  std::uniform_real_distribution<double> pos(-c, c), amp(0.3, 1.0), wid(wmin, wmax);
  std::vector<std::pair<Point, std::pair<double, double>>> bumps;
  for (int k = 0; k < 3; ++k) {
    Point x(g.dim);
    for (int d = 0; d < g.dim; ++d) x[d] = pos(rng);
    const double a = amp(rng), s = wid(rng);
    bumps.push_back({x, {a, s}});
  }
  return from_function(g, [&](const Point& p) {
    double s = 0.0;
    for (const auto& [x, as] : bumps) s += as.first * std::exp(-(p - x).norm2() / (2 * as.second * as.second));
    return s;
  });
}

Point random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Point e(n);
  for (int d = 0; d < n; ++d) e[d] = g(rng);
  return (1.0 / e.norm()) * e;
}

// A ball whose sphere crosses the support while its centre stays many widths
// away from it, so no visible mass is sent past the grid.
Ball random_ball(int n, std::mt19937_64& rng, double dmin, double dmax) {
  std::uniform_real_distribution<double> d(dmin, dmax), u(0.9, 1.1);
  const double dist = d(rng);
  return Ball(dist * random_direction(n, rng), dist * u(rng));
}

HalfSpace random_halfspace(int n, std::mt19937_64& rng, double tmax) {
  std::uniform_real_distribution<double> t(-tmax, tmax);
  return HalfSpace(random_direction(n, rng), t(rng));
}

Field extremizer_on(double half_width, int points) {
  const KernelParams kp(1, 0.5);
  return make_extremizer(ExtremizerSpec(1, 1, Point{0.0}), kp, Grid::cube(1, -half_width, half_width, points));
}

Outcome sharp_constant_reproduction() {
  const KernelParams kp(1, 0.5);
  const double sharp = sharp_constant(kp);
  const double oracle = std::tgamma(0.25) / std::tgamma(0.75);
  const auto t0 = std::chrono::steady_clock::now();
  const double q = rayleigh_quotient(extremizer_on(40, 2048), kp);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel = (sharp - q) / sharp;
  // The discrepancy is the mass beyond the box, which falls like 1/L, so one
  // refinement step doubles the box at fixed spacing. Halving the spacing on
  // the same box is reported as well; it leaves the truncation untouched.
  const double rel_box = (sharp - rayleigh_quotient(extremizer_on(80, 4096), kp)) / sharp;
  const double rel_h = (sharp - rayleigh_quotient(extremizer_on(40, 4096), kp)) / sharp;
  const double ratio = rel / rel_box;
  const bool pass = std::abs(sharp - oracle) < 1e-12 * oracle && std::abs(rel) < 1e-2 && ratio > 1.6 &&
                    ratio < 2.4 && seconds < 30;
  return {pass, fmt("quotient %.8f vs %.8f, rel %.3e, box-doubling ratio %.3f, spacing-halving ratio %.3f, %.2fs", q,
                    sharp, rel, ratio, rel / rel_h, seconds)};
}

Outcome conformal_invariance() {
  std::mt19937_64 rng(2024);
  std::string detail;
  bool pass = true;
  for (int n : {1, 2}) {
    const KernelParams kp(n, n == 1 ? 0.5 : 1.0);
    const Grid g = n == 1 ? Grid::cube(1, -10, 10, 640) : Grid::cube(2, -5, 5, 80);
    int ok = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Field f = random_bumps(g, rng, 1.0, 0.4, 0.7);
      const Region region =
          trial % 2 ? Region(random_ball(n, rng, 6.5, 8.0)) : Region(random_halfspace(n, rng, 0.5));
      const EnergyResult e = energy_direct(f, f, kp);
      const EnergyResult t = transformed_energy(region, f, kp);
      const double ratio = std::abs(t.value - e.value) / (t.est_error + e.est_error);
      worst = std::max(worst, ratio);
      if (ratio <= 1.0) ++ok;
    }
    pass = pass && ok >= 19;
    detail += fmt("%sN=%d %d/20 (worst |diff|/est %.2f)", detail.empty() ? "" : ", ", n, ok, worst);
  }
  return {pass, detail};
}

// N = 1, 2 use arbitrary half-spaces and far-centred balls. In N = 3 the
// interpolated lift costs more than the defect at any affordable spacing, so
// planes there sit on cell faces where the lift maps samples onto samples.
Outcome positivity_suite() {
  std::mt19937_64 rng(77);
  const std::vector<std::pair<int, double>> combos{{1, 0.25}, {1, 0.5}, {1, 0.75}, {2, 0.5}, {2, 1.0},
                                                    {2, 1.5},  {3, 1.0}, {3, 1.5},  {3, 2.0}};
  int nonneg = 0, strict_needed = 0, strict_ok = 0;
  double worst = std::numeric_limits<double>::infinity(), worst_strict = worst;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [n, lambda] = combos[trial % combos.size()];
    const KernelParams kp(n, lambda);
    Field f;
    Region region;
    if (n < 3) {
      f = random_bumps(n == 1 ? Grid::cube(1, -10, 10, 1280) : Grid::cube(2, -6, 6, 768), rng, 1.0, 0.4, 0.7);
      region = trial % 2 ? Region(random_ball(n, rng, 6.5, 8.0)) : Region(random_halfspace(n, rng, 0.5));
    } else {
      const Grid g = Grid::cube(3, -3, 3, 64);
      f = random_bumps(g, rng, 0.7, 0.5, 0.7);
      std::uniform_int_distribution<int> axis(0, 2), face(-2, 2);
      std::bernoulli_distribution sign;
      Point e(3);
      e[axis(rng)] = sign(rng) ? 1.0 : -1.0;
      region = HalfSpace(e, face(rng) * g.spacing);
    }
    const PositivityReport r = positivity_defect(region, f, kp);
    if (r.defect >= -r.est_error) ++nonneg;
    worst = std::min(worst, r.defect / r.est_error);
    if (kp.strict() && r.asymmetry > 0.1) {
      ++strict_needed;
      if (r.defect > 10 * r.est_error) ++strict_ok;
      worst_strict = std::min(worst_strict, r.defect / r.est_error);
    }
  }
  return {nonneg == 50 && strict_ok == strict_needed,
          fmt("nonnegative %d/50 (min defect/est %.1f), strict %d/%d (min defect/est %.1f)", nonneg, worst, strict_ok,
              strict_needed, worst_strict)};
}

Outcome representation_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0), len(0.5, 1.5);
  const HalfSpace plane(Point{1.0}, 0.0);
  int ok = 0, total = 0;
  for (double lambda : {0.25, 0.5, 0.75}) {
    const KernelParams kp(1, lambda);
    const Grid g(Point{-2.0}, 1.0 / 64, {256});
    for (int trial = 0; trial < 10; ++trial) {
      const double a = 0.5 * u(rng), b = a + len(rng);
      const Field f = from_function(g, [&](const Point& x) { return x[0] > a && x[0] < b ? u(rng) : 0.0; });
      const RepresentationResult r = halfspace_representation(f, kp);
      const EnergyResult d = energy_direct(apply_reflection(plane, f), f, kp);
      ++total;
      if (std::abs(r.value - d.value) <= r.est_error + d.est_error) ++ok;
    }
  }
  const Field chi = from_function(Grid(Point{-2.0}, 1.0 / 64, {256}),
                                  [](const Point& x) { return x[0] > 0 && x[0] < 1 ? 1.0 : 0.0; });
  const double value = halfspace_representation(chi, KernelParams(1, 0.5)).value;
  const double exact = (std::pow(2.0, 1.5) - 2.0) / 0.75;
  const double rel = std::abs(value - exact) / exact;
  return {ok == total && rel < 5e-3,
          fmt("agreement %d/%d, indicator %.6f vs %.6f (rel %.2e)", ok, total, value, exact, rel)};
}

Outcome counterexamples() {
  const CounterexampleSearch s = find_negative_defect(KernelParams(3, 0.5));
  const bool neg = s.negative && s.negative->defect < -3 * s.negative->est_error;
  const bool pos = s.positive && s.positive->defect > 3 * s.positive->est_error;
  const NewtonExample ex = newton_zero_overlap(KernelParams(3, 1.0));
  const bool newton = std::abs(ex.overlap) <= ex.overlap_est && ex.self_energy > 100 * ex.overlap_est;
  return {neg && pos && newton,
          fmt("negative %.3e (est %.1e), positive %.3e (est %.1e), overlap %.1e <= %.1e, self %.4f",
              s.negative ? s.negative->defect : 0.0, s.negative ? s.negative->est_error : 0.0,
              s.positive ? s.positive->defect : 0.0, s.positive ? s.positive->est_error : 0.0, std::abs(ex.overlap),
              ex.overlap_est, ex.self_energy)};
}

Outcome symmetrization() {
  const KernelParams kp(1, 0.5);
  const Grid g(Point{-32.0}, 1.0 / 32, {2048});
  const Field chi = from_function(g, [](const Point& x) { return std::abs(x[0]) < 1 ? 1.0 : 0.0; });
  Schedule s;
  s.max_sweeps = 50;
  const auto t0 = std::chrono::steady_clock::now();
  const SymmetrizationTrace tr = run_symmetrization(chi, kp, s);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int monotone = 0;
  for (const StepRecord& r : tr.steps)
    if (r.quotient_after >= r.quotient_before - 2 * r.est_error) ++monotone;
  const bool pass = tr.final_fit.rel_error < 0.05 && tr.sweeps <= 50 &&
                    monotone == static_cast<int>(tr.steps.size()) && seconds < 300;
  return {pass, fmt("fit error %.4f after %d sweeps, monotone %d/%zu steps, %.1fs", tr.final_fit.rel_error, tr.sweeps,
                    monotone, tr.steps.size(), seconds)};
}

Outcome invariant_densities() {
  const KernelParams kp(1, 0.5);
  const Field v = make_extremizer(ExtremizerSpec(1, 1, Point{0.0}, ExtremizerSpec::Role::density), kp,
                                  Grid::cube(1, -20, 20, 4000));
  const Measure m = Measure::density(v);
  const double r0 = hemiball_centered(m, Point{0.0}).radius;
  const double r1 = hemiball_centered(m, Point{1.0}).radius;
  std::vector<Point> centers;
  for (int k = 0; k < 10; ++k) centers.push_back(Point{-2.0 + 0.45 * k});
  const double cv = check_mass_identity(v, centers);
  const double matched = check_pointwise_invariance(v, Ball(Point{0.0}, 1.0));
  const Field gauss = from_function(Grid::cube(1, -6, 6, 1200), [](const Point& x) { return std::exp(-x.norm2()); });
  const double witness = check_pointwise_invariance(gauss, Ball(Point{0.0}, 1.0));
  const bool pass = std::abs(r0 - 1.0) < 1e-4 && std::abs(r1 - std::sqrt(2.0)) < 1e-4 && cv < 1e-3 &&
                    matched < 1e-3 && witness > 0.1;
  return {pass, fmt("r(0) %.7f, r(1) %.7f, mass identity CV %.2e, invariance %.2e, Gaussian %.3g", r0, r1, cv, matched,
                    witness)};
}

std::string run_report(const cli::RunConfig& cfg, int threads) {
  set_num_threads(threads);
  const auto out = std::filesystem::temp_directory_path() / "hls_acceptance";
  std::filesystem::create_directories(out);
  const std::string csv = cli::run(cfg, out).table.csv();
  set_num_threads(1);
  return csv;
}

// Largest relative difference between numeric cells of two reports of equal shape.
double report_distance(const std::string& a, const std::string& b) {
  std::istringstream sa(a), sb(b);
  std::string ca, cb;
  double worst = 0.0;
  auto next = [](std::istringstream& s, std::string& c) { return static_cast<bool>(std::getline(s, c, ',')); };
  while (true) {
    const bool ga = next(sa, ca), gb = next(sb, cb);
    if (ga != gb) return std::numeric_limits<double>::infinity();
    if (!ga) break;
    if (ca == cb) continue;
    try {
      std::size_t ia = 0, ib = 0;
      const double x = std::stod(ca, &ia), y = std::stod(cb, &ib);
      if (ia != ca.size() || ib != cb.size()) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), std::abs(y)));
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

Outcome determinism() {
  const std::vector<std::string> configs{
      R"({"command": "energy", "kernel": {"dim": 1, "lambda": 0.5},
          "grid": {"min": -40, "max": 40, "points": 2048}})",
      R"({"command": "positivity", "kernel": {"dim": 2, "lambda": 1},
          "grid": {"min": -3, "max": 3, "points": 48},
          "function": {"family": "gaussian", "center": [0.4, 0.2], "width": 0.5},
          "region": {"kind": "ball", "center": [2.2, 0], "radius": 1.4}})",
      R"({"command": "symmetrize", "kernel": {"dim": 1, "lambda": 0.5}, "seed": 11,
          "grid": {"min": -8, "max": 8, "points": 256},
          "function": {"family": "indicator", "lo": -1, "hi": 1},
          "schedule": {"max_sweeps": 4, "randomized": true}})",
      R"({"command": "lizhu-check", "kernel": {"dim": 1, "lambda": 0.5},
          "grid": {"min": -20, "max": 20, "points": 4000}})",
      R"({"command": "counterexample", "kernel": {"dim": 3, "lambda": 0.5}})"};
  int identical = 0;
  double worst = 0.0;
  for (const std::string& text : configs) {
    const cli::RunConfig cfg = cli::parse_config(text);
    const std::string a = run_report(cfg, 1), b = run_report(cfg, 1), c = run_report(cfg, 4);
    if (a == b) ++identical;
    worst = std::max(worst, report_distance(a, c));
  }
  const int n = static_cast<int>(configs.size());
  return {identical == n && worst <= 1e-12,
          fmt("bit-identical %d/%d, 1 vs 4 threads max rel diff %.1e", identical, n, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"sharp constant reproduction", sharp_constant_reproduction},
      {"conformal invariance suite", conformal_invariance},
      {"positivity suite", positivity_suite},
      {"representation oracle", representation_oracle},
      {"counterexamples", counterexamples},
      {"symmetrization", symmetrization},
      {"invariant density closed forms", invariant_densities},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
