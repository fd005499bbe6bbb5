#pragma once

#include <cmath>
#include <vector>

#include "hls/errors.hpp"
#include "hls/field.hpp"

namespace hls {

/// Axis-aligned box [lo, hi].
struct Box {
  Point lo, hi;
};

/// Volume fraction of the cube with centre c and side h on the side x.e > t.
double halfspace_fraction(const Point& c, double h, const Point& e, double t);
/// Volume fraction of the cube with centre c and side h inside the ball.
double ball_fraction(const Point& c, double h, const Ball& b);
double box_fraction(const Point& c, double h, const Box& b);

/// Cell masses |f_i|^p h^N of a field, queried against regions. Boundary
/// cells count with their covered volume fraction; in one dimension an
/// analytic tail adds its exact mass beyond the grid.
class CellMass {
 public:
  CellMass(const Field& f, double p);

  double total() const { return total_; }
  double in(const Region& region) const;
  double in(const Box& box) const;
  const Field& field() const { return f_; }

 private:
  double tail_between(double x0, double x1) const;

  Field f_;
  double p_;
  std::vector<double> m_;
  double total_ = 0.0;
};

/// Root of a nondecreasing mass profile at `level`, growing `hi` if needed.
template <class Mass>
double bisect_increasing(Mass&& mass, double lo, double hi, double level, double scale) {
  for (int grow = 0; mass(hi) < level; ++grow) {
    if (grow > 60 || !std::isfinite(hi)) throw NumericalFailure("could not bracket the mass level");
    hi = lo + 2.0 * (hi - lo);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass(mid);
    if (std::abs(m - level) <= 1e-12 * scale) return mid;
    (m < level ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hls
