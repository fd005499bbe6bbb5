#include "hls/kernel_table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "hls/errors.hpp"
#include "hls/quadrature.hpp"

namespace hls {

namespace {

constexpr int kNearPair = 6;
constexpr int kNearBox = 2;

double pair_weight_1d(double lambda, int k) {
  k = std::abs(k);
  const double a = 2.0 - lambda;
  const double denom = (1.0 - lambda) * (2.0 - lambda);
  if (k == 0) return 2.0 / denom;
  if (k < 8) {
    return (std::pow(k + 1.0, a) - 2.0 * std::pow(double(k), a) + std::pow(k - 1.0, a)) / denom;
  }
  // Moment series of the tent average; the closed form cancels badly here.
  const double inv2 = 1.0 / (double(k) * k);
  double term = 1.0, total = 1.0;
  for (int m = 1; m < 40; ++m) {
    term *= (lambda + 2 * m - 2) * (lambda + 2 * m - 1) / ((2.0 * m + 1) * (2.0 * m + 2)) * inv2;
    total += term;
    if (std::abs(term) < 1e-18 * total) break;
  }
  return total * std::pow(double(k), -lambda);
}

double box_weight_1d(double mu, int k) {
  k = std::abs(k);
  const double a = 1.0 - mu;
  if (k == 0) return 2.0 * std::pow(0.5, a) / a;
  return (std::pow(k + 0.5, a) - std::pow(k - 0.5, a)) / a;
}

using Key = std::tuple<int, int, double, int, int, int>;  // kind, dim, exponent, offsets

double cached_near(const Key& key, double (*compute)(const Key&)) {
  static std::mutex mu;
  static std::map<Key, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double v = compute(key);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, v);
  return v;
}

double compute_pair(const Key& key) {
  auto [kind, dim, lambda, a, b, c] = key;
  return power_integral_cube(dim, lambda, {a, b, c}, CubeWeight::tent);
}

double compute_box(const Key& key) {
  auto [kind, dim, mu, a, b, c] = key;
  return power_integral_cube(dim, mu, {a, b, c}, CubeWeight::box);
}

// Sorted absolute offsets, so permutations and sign flips share cache entries.
std::array<int, 3> canonical(int dim, const std::array<int, 3>& k) {
  std::array<int, 3> s{0, 0, 0};
  for (int d = 0; d < dim; ++d) s[d] = std::abs(k[d]);
  std::sort(s.begin(), s.begin() + dim);
  return s;
}

// K(k) plus the second-order average correction c * Laplacian K, K = |k|^{-mu}.
double far_field(int dim, double mu, const std::array<int, 3>& k, double variance_half) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += double(k[d]) * k[d];
  const double base = std::pow(r2, -0.5 * mu);
  return base * (1.0 + variance_half * mu * (mu + 2.0 - dim) / r2);
}

void check(int dim, double expo) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (!(expo > 0.0 && expo < dim)) throw InvalidArgument("kernel exponent out of range");
}

}  // namespace

double pair_weight(int dim, double lambda, const std::array<int, 3>& k) {
  check(dim, lambda);
  if (dim == 1) return pair_weight_1d(lambda, k[0]);
  const auto s = canonical(dim, k);
  if (s[dim - 1] <= kNearPair) return cached_near({0, dim, lambda, s[0], s[1], s[2]}, compute_pair);
  return far_field(dim, lambda, s, 1.0 / 12.0);
}

double box_weight(int dim, double mu, const std::array<int, 3>& k) {
  check(dim, mu);
  if (dim == 1) return box_weight_1d(mu, k[0]);
  const auto s = canonical(dim, k);
  if (s[dim - 1] <= kNearBox) return cached_near({1, dim, mu, s[0], s[1], s[2]}, compute_box);
  return far_field(dim, mu, s, 1.0 / 24.0);
}

namespace {
template <class F>
OffsetTable build_table(int dim, const std::array<int, 3>& extent, F&& weight) {
  OffsetTable t;
  t.dim = dim;
  for (int d = 0; d < 3; ++d) t.extent[d] = d < dim ? std::max(extent[d], 1) : 1;
  t.w.resize(static_cast<std::size_t>(t.extent[0]) * t.extent[1] * t.extent[2]);
  std::size_t n = 0;
  for (int a = 0; a < t.extent[0]; ++a)
    for (int b = 0; b < t.extent[1]; ++b)
      for (int c = 0; c < t.extent[2]; ++c) t.w[n++] = weight(std::array<int, 3>{a, b, c});
  return t;
}
}  // namespace

OffsetTable pair_weight_table(int dim, double lambda, const std::array<int, 3>& extent) {
  return build_table(dim, extent, [&](const std::array<int, 3>& k) { return pair_weight(dim, lambda, k); });
}

OffsetTable box_weight_table(int dim, double mu, const std::array<int, 3>& extent) {
  return build_table(dim, extent, [&](const std::array<int, 3>& k) { return box_weight(dim, mu, k); });
}

}  // namespace hls
