#pragma once

#include <array>
#include <vector>

namespace hls {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Supported orders: 4, 8, 12, 16, 20, 24, 32, 48, 64.
const GaussRule& gauss_legendre(int n);

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
template <class F>
double integrate_gl(F&& f, double a, double b, const GaussRule& rule, int panels = 1) {
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(mid + 0.5 * width * rule.x[i]);
    total += 0.5 * width * s;
  }
  return total;
}

enum class CubeWeight {
  box,   ///< unit cell [k - 1/2, k + 1/2]^N, weight 1
  tent,  ///< cell autocorrelation on [k - 1, k + 1]^N, weight prod(1 - |w_d - k_d|)
};

/// Integral of |w|^{-mu} over the cell region around the integer offset k
/// (0 < mu < N). Singular corners are integrated with a Duffy split whose
/// radial part is done exactly; regular pieces use a Gauss product rule.
double power_integral_cube(int dim, double mu, const std::array<int, 3>& k, CubeWeight weight);

}  // namespace hls
