#pragma once

#include <array>
#include <vector>

namespace hls {

/// Dimensionless cell-pair weight for |x - y|^{-lambda} between unit cells
/// offset by the integer vector k:
///   W(k) = integral over [0,1]^N x (k + [0,1]^N) of |x - y|^{-lambda}.
/// Scaling by h^{2N - lambda} gives the weight for cells of side h.
double pair_weight(int dim, double lambda, const std::array<int, 3>& k);

/// Dimensionless single-cell weight for |w|^{-mu}:
///   B(k) = integral over k + [-1/2, 1/2]^N of |w|^{-mu}.
double box_weight(int dim, double mu, const std::array<int, 3>& k);

/// Dense table of pair_weight over |k_d| in [0, extent_d), row-major.
struct OffsetTable {
  int dim = 1;
  std::array<int, 3> extent{1, 1, 1};
  std::vector<double> w;

  double at(int a, int b, int c) const {
    return w[(static_cast<std::size_t>(a) * extent[1] + b) * extent[2] + c];
  }
};

OffsetTable pair_weight_table(int dim, double lambda, const std::array<int, 3>& extent);
OffsetTable box_weight_table(int dim, double mu, const std::array<int, 3>& extent);

}  // namespace hls
