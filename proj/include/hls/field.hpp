#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hls/geometry.hpp"

namespace hls {

/// Dimension and kernel exponent of I_lambda; p = 2N / (2N - lambda).
struct KernelParams {
  int dim = 1;
  double lambda = 0.5;

  KernelParams() = default;
  KernelParams(int dim, double lambda);

  double p() const { return 2.0 * dim / (2.0 * dim - lambda); }
  /// Weight exponent 2N - lambda of the lifted conformal operators.
  double weight_exponent() const { return 2.0 * dim - lambda; }
  /// Nonnegativity of the reflection/inversion defect holds for lambda >= N - 2.
  bool positivity_valid() const { return dim <= 2 || lambda >= dim - 2.0; }
  bool strict() const { return lambda > dim - 2.0; }
};

/// Cell-centred uniform grid. Samples sit at origin + (i + 1/2) h along each
/// axis, so `origin` is the lower corner of the covered box. Flat index is
/// row-major with axis 0 slowest.
struct Grid {
  int dim = 1;
  Point origin;
  double spacing = 1.0;
  std::array<int, 3> extent{1, 1, 1};

  Grid() = default;
  Grid(Point origin, double spacing, std::array<int, 3> extent);

  /// The box [lo, hi]^N split into `points` cells per axis.
  static Grid cube(int dim, double lo, double hi, int points);

  std::size_t size() const;
  double cell_volume() const;
  std::array<int, 3> index(std::size_t flat) const;
  std::size_t flat(const std::array<int, 3>& idx) const;
  Point point(std::size_t flat) const;
  Point point(const std::array<int, 3>& idx) const;
  double lower(int axis) const { return origin[axis]; }
  double upper(int axis) const { return origin[axis] + spacing * extent[static_cast<std::size_t>(axis)]; }
  bool contains(const Point& x) const;
  bool same_as(const Grid& other) const;
};

/// alpha (beta + |x - y|^2)^{-exponent}. Optimizers use exponent (2N - lambda)/2,
/// inversion-invariant densities use exponent N.
struct ExtremizerSpec {
  enum class Role { optimizer, density };

  double alpha = 1.0;
  double beta = 1.0;
  Point center;
  Role role = Role::optimizer;

  ExtremizerSpec() = default;
  ExtremizerSpec(double alpha, double beta, Point center, Role role = Role::optimizer);

  double exponent(const KernelParams& kp) const;
};

/// A fully resolved analytic profile used to extend a field beyond its grid.
struct AnalyticTail {
  double alpha = 1.0;
  double beta = 1.0;
  Point center;
  double exponent = 1.0;

  double operator()(const Point& x) const;
  /// Integral over all of R^N.
  double total_integral() const;
  /// Integral of |tail|^p over R^N (exponent * p must exceed N / 2).
  double total_power_integral(double p) const;
};

class Field {
 public:
  Field() = default;
  Field(Grid grid, std::vector<double> values, std::optional<AnalyticTail> tail = std::nullopt);

  static Field zeros(const Grid& grid);

  int dim() const { return grid_.dim; }
  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::optional<AnalyticTail>& tail() const { return tail_; }

  /// Multilinear interpolation; beyond the box falls back to the analytic tail or 0.
  double eval(const Point& x) const;

  Field with_values(std::vector<double> values) const;
  Field without_tail() const { return Field(grid_, values_); }

 private:
  Grid grid_;
  std::vector<double> values_;
  std::optional<AnalyticTail> tail_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& f);

Field make_extremizer(const ExtremizerSpec& spec, const KernelParams& kp, const Grid& grid);

/// (sum |f_i|^p h^N)^{1/p} over grid samples.
double lp_norm(const Field& f, double p);
/// sum |f_i|^p h^N over grid samples.
double power_mass(const Field& f, double p);

/// What to do with a sample that lands on the singular point of a map.
enum class SingularPolicy { mask, error };

Field apply_inversion(const Ball& b, const Field& f, const KernelParams& kp,
                      SingularPolicy policy = SingularPolicy::mask);
Field apply_reflection(const HalfSpace& h, const Field& f);
Field apply_cayley(const Field& f, const KernelParams& kp,
                   SingularPolicy policy = SingularPolicy::mask);
/// Dispatches to the inversion or reflection lift.
Field apply_region_map(const Region& region, const Field& f, const KernelParams& kp);

struct SplitResult {
  Field inner;  ///< f inside the region, Theta f outside
  Field outer;  ///< Theta f inside, f outside
  /// (mass inside - mass outside) / total mass of |f|^p on the grid.
  double mass_imbalance = 0.0;
};

SplitResult split_in_out(const Region& region, const Field& f, const KernelParams& kp);

/// Indicator of sample points inside the region (1) or not (0).
std::vector<char> region_mask(const Region& region, const Grid& grid);

void write_field_csv(std::ostream& os, const Field& f);
Field read_field_csv(std::istream& is);
void save_field_csv(const std::string& path, const Field& f);
Field load_field_csv(const std::string& path);

}  // namespace hls
