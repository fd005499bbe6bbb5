#include "hls/parallel.hpp"

#include <atomic>

#include "hls/errors.hpp"

namespace hls {

namespace {
std::atomic<int> g_threads{1};

double pairwise_rec(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_rec(v, half) + pairwise_rec(v + half, n - half);
}
}  // namespace

void set_num_threads(int n) {
  if (n < 1) throw InvalidArgument("thread count must be at least 1");
  g_threads.store(n);
}

int num_threads() { return g_threads.load(); }

double pairwise_sum(std::span<const double> values) {
  return pairwise_rec(values.data(), values.size());
}

}  // namespace hls
