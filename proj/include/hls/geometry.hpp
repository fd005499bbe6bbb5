#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>
#include <variant>

namespace hls {

inline constexpr int kMaxDim = 3;

/// A point (or vector) in R^N, N in {1,2,3}.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<double> coords);

  static Point zeros(int dim) { return Point(dim); }
  static Point unit(int dim, int axis);

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  double norm2() const;
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const;

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  Point& operator*=(double s);

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator-(Point a) { return a *= -1.0; }
  friend bool operator==(const Point& a, const Point& b);

  std::string str() const;

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

double dot(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);

/// Open ball {x : |x - center| < radius}.
struct Ball {
  Point center;
  double radius = 1.0;

  Ball() = default;
  Ball(Point c, double r);
  int dim() const { return center.dim(); }
};

/// Open half-space {x : x . normal > offset}; |normal| = 1.
struct HalfSpace {
  Point normal;
  double offset = 0.0;

  HalfSpace() = default;
  HalfSpace(Point unit_normal, double t);
  /// Normalizes `direction` before constructing.
  static HalfSpace from_direction(const Point& direction, double t);
  int dim() const { return normal.dim(); }
};

using Region = std::variant<Ball, HalfSpace>;

int region_dim(const Region& region);
bool region_contains(const Region& region, const Point& x);
std::string region_str(const Region& region);

/// Inversion through the sphere bounding `b`. Throws DomainError at the center.
Point invert_point(const Ball& b, const Point& x);

/// Reflection through the hyperplane bounding `h`.
Point reflect_point(const HalfSpace& h, const Point& x);

/// Involutive Cayley-type map exchanging the unit ball and {x_N > 0}.
/// Pole at (0, ..., 0, -1); throws DomainError there.
Point cayley_point(const Point& x);

/// Inversion or reflection, depending on the region kind.
Point map_point(const Region& region, const Point& x);

}  // namespace hls
