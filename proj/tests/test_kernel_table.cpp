#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "doctest.h"
#include "hls/kernel_table.hpp"

using namespace hls;

namespace {

// Independent oracle for the tent-weighted offset integral: each quadrant of
// [-1,1]^2 is integrated in polar coordinates about its corner nearest the
// singular point -k when that corner is the singular point, and by nested
// Gauss-Kronrod otherwise.
double tent_oracle_2d(double lambda, int k0, int k1) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto weight = [&](double z0, double z1) {
    const double x = k0 + z0, y = k1 + z1;
    return std::pow(x * x + y * y, -0.5 * lambda) * (1 - std::abs(z0)) * (1 - std::abs(z1));
  };
  double total = 0.0;
  for (int q0 : {-1, 1}) {
    for (int q1 : {-1, 1}) {
      // quadrant spans z0 in [min(0,q0), max(0,q0)], same for z1
      const bool singular = (-k0 == 0 || -k0 == q0) && (-k1 == 0 || -k1 == q1);
      if (singular) {
        // corner c = -k; local axes point into the quadrant
        const double c0 = -k0, c1 = -k1;
        const double s0 = (c0 == 0 ? q0 : -q0), s1 = (c1 == 0 ? q1 : -q1);
        auto f = [&](double t) {
          const double ct = std::cos(t), st = std::sin(t);
          const double rmax = 1.0 / std::max(ct, st);
          return ts.integrate(
              [&](double r) {
                const double z0 = c0 + s0 * r * ct, z1 = c1 + s1 * r * st;
                return std::pow(r, 1.0 - lambda) * (1 - std::abs(z0)) * (1 - std::abs(z1));
              },
              0.0, rmax);
        };
        total += GK::integrate(f, 0.0, std::atan(1.0), 10, 1e-13) +
                 GK::integrate(f, std::atan(1.0), 2 * std::atan(1.0), 10, 1e-13);
      } else {
        const double a0 = std::min(0, q0), b0 = std::max(0, q0);
        const double a1 = std::min(0, q1), b1 = std::max(0, q1);
        total += GK::integrate(
            [&](double z0) { return GK::integrate([&](double z1) { return weight(z0, z1); }, a1, b1, 10, 1e-13); },
            a0, b0, 10, 1e-13);
      }
    }
  }
  return total;
}

}  // namespace

TEST_CASE("one-dimensional pair weights match the closed form") {
  for (double lambda : {0.25, 0.5, 0.75}) {
    const double denom = (1 - lambda) * (2 - lambda);
    CHECK(pair_weight(1, lambda, {0, 0, 0}) == doctest::Approx(2.0 / denom).epsilon(1e-14));
    for (int k = 1; k < 40; ++k) {
      const double a = 2 - lambda;
      // long double closed form as an oracle for the series branch
      const long double exact = (std::pow((long double)k + 1, (long double)a) - 2 * std::pow((long double)k, (long double)a) +
                                 std::pow((long double)k - 1, (long double)a)) /
                                denom;
      CHECK(pair_weight(1, lambda, {k, 0, 0}) == doctest::Approx((double)exact).epsilon(1e-10));
    }
  }
}

TEST_CASE("pair weights reproduce the unit-square energy") {
  // Sum over a 4x4 block of unit cells equals the scaled unit-square integral.
  const double lambda = 0.5;
  double total = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) total += pair_weight(1, lambda, {i - j, 0, 0});
  const double scale = std::pow(4.0, 2.0 - lambda);
  CHECK(total / scale == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("two-dimensional pair weights against adaptive quadrature") {
  for (double lambda : {0.5, 1.0, 1.5}) {
    for (auto k : {std::array<int, 3>{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 1, 0}, {3, 3, 0}}) {
      const double ref = tent_oracle_2d(lambda, k[0], k[1]);
      CHECK(pair_weight(2, lambda, k) == doctest::Approx(ref).epsilon(2e-8));
    }
  }
}

TEST_CASE("far-field pair weights join the near table smoothly") {
  for (int dim : {2, 3}) {
    for (double lambda : {0.5, 1.0, 1.9}) {
      if (lambda >= dim) continue;
      const double near = pair_weight(dim, lambda, {6, 0, 0});
      double r2 = 36.0;
      const double far = std::pow(r2, -0.5 * lambda) * (1 + lambda * (lambda + 2 - dim) / (12 * r2));
      CHECK(near == doctest::Approx(far).epsilon(1e-4));
    }
  }
}

TEST_CASE("box weights") {
  // Single-cell integral of |w|^{-mu} around the origin in 1D.
  CHECK(box_weight(1, 0.5, {0, 0, 0}) == doctest::Approx(2 * std::sqrt(0.5) / 0.5));
  // Sum of all box weights with |k| <= R approximates the ball integral.
  const double mu = 1.0;
  double s = 0.0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) s += box_weight(2, mu, {a, b, 0});
  // Exact integral of 1/|w| over the square [-3.5, 3.5]^2: 8 * 3.5 * asinh(1).
  // Entries with |k| = 3 use the far-field expansion, accurate to ~1e-4.
  CHECK(s == doctest::Approx(8 * 3.5 * std::asinh(1.0)).epsilon(3e-5));
  double s3 = 0.0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) s3 += box_weight(3, 2.0, {a, b, c});
  // Integral of |w|^{-2} over [-L, L]^3 equals 24 L * integral over the unit
  // face triangle of (1 + u^2 + v^2)^{-1}; evaluated by nested quadrature.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double face = GK::integrate(
      [](double u) {
        return GK::integrate([u](double v) { return 1.0 / (1 + u * u + v * v); }, 0.0, u, 10, 1e-13);
      },
      0.0, 1.0, 10, 1e-13);
  CHECK(s3 == doctest::Approx(48 * 2.5 * face).epsilon(1e-6));
}
