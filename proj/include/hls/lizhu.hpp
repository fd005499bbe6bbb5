#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "hls/coverage.hpp"
#include "hls/field.hpp"

namespace hls {

/// Weighted atoms in R^N.
struct PointCloud {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// A finite nonnegative measure given by atoms or by a grid density. A 1D
/// density with an analytic tail carries the tail mass beyond the grid.
class Measure {
 public:
  static Measure cloud(std::vector<Point> points, std::vector<double> weights);
  static Measure density(Field v);

  int dim() const;
  bool is_cloud() const { return std::holds_alternative<PointCloud>(rep_); }
  const PointCloud& points() const { return std::get<PointCloud>(rep_); }
  const Field& field() const { return std::get<CellMass>(rep_).field(); }

  double total_mass() const { return total_; }
  Measure normalized() const;

  /// Atoms on the boundary of the query count with half their weight.
  double mass_in(const Region& region) const;
  double mass_in(const Box& box) const;

 private:
  explicit Measure(PointCloud c);
  explicit Measure(CellMass m);

  std::variant<PointCloud, CellMass> rep_;
  double total_ = 0.0;
};

/// x1,...,xN,weight with a header row.
void write_cloud_csv(std::ostream& os, const PointCloud& c);
PointCloud read_cloud_csv(std::istream& is);

using Target = std::variant<Box, Ball>;

/// mu(Theta^{-1}(target)) for the inversion or reflection bounding `region`.
/// Clouds map their atoms; densities integrate v(Theta y) J(y) over the target.
double pushforward_mass(const Measure& m, const Region& region, const Target& target);

struct HemiBallResult {
  Point center;
  double radius = 0.0;
  double mass_imbalance = 0.0;  ///< mu(B) - total/2
};

/// Relative mass tolerance of every hemi-ball returned below.
inline constexpr double kHemiBallTol = 1e-6;

/// The ball B_rho((u - rho) e) through u e holding half the mass. The measure
/// must give equal mass to both sides of the hyperplane normal to e.
HemiBallResult hemiball_on_ray(const Measure& m, const Point& e, double u);

/// The ball centred at a holding half the mass.
HemiBallResult hemiball_centered(const Measure& m, const Point& a);

/// A hemi-ball centred on the e-axis whose inversion maps s e to t e.
HemiBallResult solve_mapping_ball(const Measure& m, const Point& e, double s, double t);

/// Largest relative deviation |v(x) - (r/|x-a|)^{2N} v(Theta x)| / max(v(x), floor)
/// over samples whose image stays on the grid (or anywhere if v has a tail).
double check_pointwise_invariance(const Field& v, const Ball& b);

/// Coefficient of variation of r_a^{2N} v(a) over the centres, with r_a the
/// radius of the centred hemi-ball.
double check_mass_identity(const Field& v, const std::vector<Point>& centers);

struct RadialDerivative {
  double lhs = 0.0;  ///< central difference of v along x/|x|
  double rhs = 0.0;  ///< -N v(x) / rho
  double rho = 0.0;  ///< radius of the hemi-ball through x centred on its ray
  double tol = 0.0;
  bool agrees() const;
};

/// Throws DomainError if the difference stencil leaves the grid or x = 0.
RadialDerivative check_radial_derivative(const Field& v, const Point& x);

struct InvariantFit {
  double alpha = 0.0;
  double beta = 0.0;
  Point center;
  double fit_error = 0.0;  ///< relative L^1 residual on the grid
  /// The fitted core is below grid resolution (beta < 4 h^2): the grid cannot
  /// certify a finite total mass.
  bool mass_divergent = false;
};

/// Least-squares fit of alpha (beta + |x - y|^2)^{-N}.
InvariantFit fit_invariant_density(const Field& v);

struct RadialReport {
  double radial_violation = 0.0;    ///< max |mu(B) - mu(B')| / total over congruent pairs
  double monotone_violation = 0.0;  ///< max (mu(B_far) - mu(B_near))_+ / total
  int radial_pairs = 0;
  int monotone_pairs = 0;
  double tolerance = 0.0;
  bool radial() const { return radial_violation <= tolerance; }
  bool decreasing() const { return monotone_violation <= tolerance; }
};

/// Compares ball masses about `origin`: congruent balls at equal distance, and
/// disjoint balls along a ray (t - r > t' + r).
RadialReport check_radial_decreasing(const Measure& m, const Point& origin);

}  // namespace hls
