#pragma once

#include "hls/field.hpp"

namespace hls::detail {

struct FamilyParams {
  double alpha = 0.0;
  double beta = 0.0;
  Point center;
};

/// Levenberg-Marquardt on the samples of f - alpha (beta + |x - y|^2)^{-exponent},
/// parametrised by (log alpha, log beta, y).
FamilyParams fit_family(const Field& f, double exponent, const FamilyParams& start);

}  // namespace hls::detail
