#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hls/energy.hpp"
#include "hls/errors.hpp"
#include "hls/positivity.hpp"

using namespace hls;

namespace {

Field from_function(const Grid& g, auto&& fn) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.point(i));
  return Field(g, std::move(v));
}

// Sum of a few positive Gaussian bumps with centres in [-c, c]^N.
Field random_bumps(const Grid& g, std::mt19937_64& rng, double c, double width) {
  std::uniform_real_distribution<double> pos(-c, c), amp(0.3, 1.0), wid(0.6 * width, width);
  struct B {
    Point x;
    double a, s;
  };
  std::vector<B> bumps;
  for (int k = 0; k < 3; ++k) {
    Point x(g.dim);
    for (int d = 0; d < g.dim; ++d) x[d] = pos(rng);
    bumps.push_back({x, amp(rng), wid(rng)});
  }
  return from_function(g, [&](const Point& p) {
    double s = 0.0;
    for (const auto& b : bumps) s += b.a * std::exp(-distance(p, b.x) * distance(p, b.x) / (2 * b.s * b.s));
    return s;
  });
}

double bessel_oracle(int n, double lambda, double xi, double t) {
  const double mu = n - lambda, nu = 0.5 * (mu - 1);
  // K is even in its order
  return 2 * std::sqrt(std::numbers::pi) / std::tgamma(mu / 2) * std::pow(t / (2 * xi), nu) *
         std::cyl_bessel_k(std::abs(nu), xi * t);
}

}  // namespace

TEST_CASE("kernel k matches the Bessel closed form") {
  CHECK(kernel_k(KernelParams(3, 1.0), 2.0, 1.0) == doctest::Approx(std::numbers::pi / 2 * std::exp(-2.0)).epsilon(1e-12));
  for (auto [n, lambda] : {std::pair{2, 0.5}, {2, 1.0}, {2, 1.5}, {3, 1.25}, {3, 1.5}, {3, 2.5}}) {
    for (double xi : {0.05, 0.7, 3.0}) {
      for (double t : {0.01, 0.4, 2.5}) {
        const double k = kernel_k(KernelParams(n, lambda), xi, t);
        CHECK(k == doctest::Approx(bessel_oracle(n, lambda, xi, t)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("kernel k is positive and decreasing in t") {
  KernelParams kp(3, 1.5);
  double prev = kernel_k(kp, 0.8, 0.05);
  for (double t = 0.1; t < 6; t += 0.1) {
    const double k = kernel_k(kp, 0.8, t);
    CHECK(k > 0);
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("kernel k in one dimension and invalid parameters") {
  const double lambda = 0.5;
  const double expected = 2 * std::sin(std::numbers::pi * (1 - lambda) / 2) * std::tgamma(lambda) * std::pow(2.0, -lambda);
  CHECK(kernel_k(KernelParams(1, lambda), 0.0, 2.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_k(KernelParams(3, 0.5), 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(kernel_k(KernelParams(3, 1.5), 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(kernel_k(KernelParams(3, 1.5), 0.0, 1.0), InvalidArgument);
}

TEST_CASE("half-line indicator representation") {
  const double expected = (std::pow(2.0, 1.5) - 2) / 0.75;
  CHECK(halfline_representation({0.0}, {1.0}, {1.0}, 0.5) == doctest::Approx(expected).epsilon(1e-10));
  Grid g(Point{-2.0}, 1.0 / 32, {128});
  Field chi = from_function(g, [](const Point& x) { return (x[0] > 0 && x[0] < 1) ? 1.0 : 0.0; });
  const RepresentationResult r = halfspace_representation(chi, KernelParams(1, 0.5));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(r.est_error < 1e-8);
  CHECK_THROWS_AS(halfline_representation({-0.1}, {1.0}, {1.0}, 0.5), InvalidArgument);
}

TEST_CASE("one-dimensional representation agrees with the direct overlap") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HalfSpace h(Point{1.0}, 0.0);
  for (double lambda : {0.25, 0.5, 0.75}) {
    KernelParams kp(1, lambda);
    Grid g(Point{-2.0}, 1.0 / 64, {256});
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<double> v(g.size(), 0.0);
      for (std::size_t i = 128; i < 200; ++i) v[i] = u(rng);
      Field f(g, v);
      const RepresentationResult r = halfspace_representation(f, kp);
      const EnergyResult d = energy_direct(apply_reflection(h, f), f, kp);
      CHECK(std::abs(r.value - d.value) <= r.est_error + d.est_error);
      CHECK(r.value > 0);
    }
  }
}

TEST_CASE("separable representation agrees with the direct overlap") {
  auto field = [](const Grid& g) {
    return from_function(g, [](const Point& p) {
      const double z = p[p.dim() - 1];
      if (z < 0) return 0.0;
      double r2 = 0;
      for (int d = 0; d + 1 < p.dim(); ++d) r2 += p[d] * p[d];
      return std::exp(-2 * r2) * (std::exp(-8 * (z - 0.6) * (z - 0.6)) - 0.5 * std::exp(-8 * (z - 1.2) * (z - 1.2)));
    });
  };
  SUBCASE("N = 2") {
    Grid g(Point{-2.0, -2.0}, 0.05, {80, 80});
    const Field f = field(g);
    for (double lambda : {0.5, 1.0, 1.5}) {
      KernelParams kp(2, lambda);
      const RepresentationResult r = halfspace_representation(f, kp);
      const EnergyResult d = energy_direct(apply_reflection(HalfSpace(Point{0.0, 1.0}, 0.0), f), f, kp);
      CHECK(std::abs(r.value - d.value) <= r.est_error + d.est_error);
    }
  }
  SUBCASE("N = 3") {
    Grid g(Point{-1.2, -1.2, -2.0}, 0.1, {24, 24, 40});
    const Field f = field(g);
    for (double lambda : {1.0, 1.5}) {
      KernelParams kp(3, lambda);
      const RepresentationResult r = halfspace_representation(f, kp);
      const EnergyResult d = energy_direct(apply_reflection(HalfSpace(Point{0.0, 0.0, 1.0}, 0.0), f), f, kp);
      CHECK(std::abs(r.value - d.value) <= r.est_error + d.est_error);
    }
  }
}

TEST_CASE("representation rejects unsupported inputs") {
  Grid g(Point{-1.0, -1.0}, 0.1, {20, 20});
  KernelParams kp(2, 1.0);
  Field spill = from_function(g, [](const Point& p) { return std::exp(-p.norm2()); });
  CHECK_THROWS_AS(halfspace_representation(spill, kp), InvalidArgument);
  Field mixed = from_function(g, [](const Point& p) { return p[1] > 0 ? std::exp(-(p[0] - p[1]) * (p[0] - p[1])) : 0.0; });
  CHECK_THROWS_AS(halfspace_representation(mixed, kp), InvalidArgument);
  CHECK_THROWS_AS(halfspace_representation(Field::zeros(Grid::cube(3, -1, 1, 8)), KernelParams(3, 0.5)), InvalidArgument);
}

TEST_CASE("defect vanishes on reflection-invariant fields") {
  KernelParams kp(1, 0.5);
  Grid g(Point{-4.0}, 1.0 / 16, {128});
  Field f = from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const PositivityReport r = positivity_defect(HalfSpace(Point{1.0}, 0.0), f, kp);
  CHECK(std::abs(r.defect) <= r.est_error);
  CHECK(r.strict_flag);
  CHECK(r.asymmetry < 1e-12);
}

TEST_CASE("half-space defect in one dimension matches the Laplace oracle") {
  std::mt19937_64 rng(9);
  for (double lambda : {0.25, 0.5, 0.75}) {
    KernelParams kp(1, lambda);
    Grid g(Point{-6.0}, 1.0 / 32, {384});
    const Field f = random_bumps(g, rng, 2.0, 0.6);
    const PositivityReport r = positivity_defect(HalfSpace(Point{1.0}, 0.5), f, kp);
    REQUIRE(r.oracle_value.has_value());
    CHECK(*r.oracle_value == doctest::Approx(r.defect_via_g).epsilon(1e-8));
    CHECK(r.defect > 10 * r.est_error);
    CHECK(std::abs(r.defect - r.defect_via_g) <= r.est_error + r.via_g_est);
    CHECK_FALSE(r.strict_flag);
  }
}

TEST_CASE("defect is nonnegative in the positive range") {
  std::mt19937_64 rng(17);
  SUBCASE("N = 2 half-space and ball") {
    for (double lambda : {0.5, 1.0, 1.5}) {
      KernelParams kp(2, lambda);
      Grid g = Grid::cube(2, -3, 3, 48);
      const Field f = random_bumps(g, rng, 1.0, 0.6);
      const PositivityReport h = positivity_defect(HalfSpace(Point{0.0, 1.0}, 0.0), f, kp);
      CHECK(h.defect >= -h.est_error);
      const PositivityReport b = positivity_defect(Ball(Point{2.5, 0.0}, 1.5), f, kp);
      CHECK(b.defect >= -b.est_error);
    }
  }
  SUBCASE("N = 3 half-space") {
    for (double lambda : {1.0, 1.5, 2.0}) {
      KernelParams kp(3, lambda);
      Grid g = Grid::cube(3, -2, 2, 16);
      const Field f = random_bumps(g, rng, 0.7, 0.5);
      const PositivityReport h = positivity_defect(HalfSpace(Point{1.0, 0.0, 0.0}, 0.0), f, kp);
      CHECK(h.defect >= -h.est_error);
    }
  }
}

TEST_CASE("transformed energies are invariant within their estimate") {
  std::mt19937_64 rng(3);
  KernelParams kp(2, 1.0);
  Grid g = Grid::cube(2, -4, 4, 64);
  const Field f = random_bumps(g, rng, 1.0, 0.5);
  const EnergyResult e = energy_direct(f, f, kp);
  const EnergyResult r = transformed_energy(HalfSpace(Point{1.0, 0.0}, 0.25), f, kp);
  CHECK(std::abs(r.value - e.value) <= r.est_error + e.est_error);
}

TEST_CASE("Newton example has zero overlap but positive energy") {
  const NewtonExample ex = newton_zero_overlap(KernelParams(3, 1.0));
  CHECK(std::abs(ex.total_mass) < 1e-12);
  CHECK(std::abs(ex.overlap) <= ex.overlap_est);
  CHECK(ex.self_energy > 100 * ex.overlap_est);
  // two uniform balls of unit mass, radii 1/2 and 1, concentric
  const double exact = 6.0 / (5 * 0.5) + 6.0 / 5 - (3.0 - 3.0 * 0.25 / 5);
  CHECK(std::abs(ex.self_energy - exact) <= ex.self_est);
  CHECK_THROWS_AS(newton_zero_overlap(KernelParams(3, 1.5)), InvalidArgument);
}

TEST_CASE("bump pairs give both signs below the positive range") {
  const CounterexampleSearch s = find_negative_defect(KernelParams(3, 0.5));
  REQUIRE(s.negative.has_value());
  REQUIRE(s.positive.has_value());
  CHECK(s.negative->defect < -3 * s.negative->est_error);
  CHECK(s.positive->defect > 3 * s.positive->est_error);
  CHECK(s.negative->amplitude_b > 0);
  // the witness lives in the upper half-space
  const Field& f = s.negative->f;
  CHECK(f.grid().origin[2] == 0.0);
}

TEST_CASE("no negative witness at the endpoint") {
  CHECK_THROWS_AS(find_negative_defect(KernelParams(3, 1.0)), NumericalFailure);
  const CounterexampleSearch s = search_defect_witnesses(KernelParams(3, 1.0));
  CHECK_FALSE(s.negative.has_value());
  CHECK(s.positive.has_value());
  CHECK_THROWS_AS(search_defect_witnesses(KernelParams(2, 0.5)), InvalidArgument);
}
