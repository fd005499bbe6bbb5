#include "hls/geometry.hpp"

#include <sstream>

#include "hls/errors.hpp"

namespace hls {

namespace {

// Points closer than this (relative to the radius) to a pole are the pole.
constexpr double kPoleTolerance = 1e-14;

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidArgument("dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
}

void check_same_dim(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
}

}  // namespace

Point::Point(int dim) : dim_(dim) { check_dim(dim); }

Point::Point(std::initializer_list<double> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::size_t i = 0;
  for (double v : coords) c_[i++] = v;
  if (!finite()) throw InvalidArgument("point coordinates must be finite");
}

Point Point::unit(int dim, int axis) {
  Point p(dim);
  if (axis < 0 || axis >= dim) throw InvalidArgument("axis out of range");
  p[axis] = 1.0;
  return p;
}

double Point::norm2() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
  return s;
}

bool Point::finite() const {
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(c_[i])) return false;
  }
  return true;
}

Point& Point::operator+=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point& Point::operator*=(double s) {
  for (int i = 0; i < dim_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i) {
    if (a.c_[i] != b.c_[i]) return false;
  }
  return true;
}

std::string Point::str() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? ", " : "") << c_[i];
  os << ')';
  return os.str();
}

double dot(const Point& a, const Point& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double distance(const Point& a, const Point& b) { return (a - b).norm(); }

Ball::Ball(Point c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ball radius must be positive");
  if (!c.finite()) throw InvalidArgument("ball center must be finite");
}

HalfSpace::HalfSpace(Point unit_normal, double t) : normal(unit_normal), offset(t) {
  if (std::abs(unit_normal.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("half-space normal must have unit length");
  }
  if (!std::isfinite(t)) throw InvalidArgument("half-space offset must be finite");
}

HalfSpace HalfSpace::from_direction(const Point& direction, double t) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw InvalidArgument("half-space direction must be non-zero");
  return HalfSpace(direction * (1.0 / n), t);
}

int region_dim(const Region& region) {
  return std::visit([](const auto& r) { return r.dim(); }, region);
}

bool region_contains(const Region& region, const Point& x) {
  if (const auto* b = std::get_if<Ball>(&region)) {
    return (x - b->center).norm2() < b->radius * b->radius;
  }
  const auto& h = std::get<HalfSpace>(region);
  return dot(x, h.normal) > h.offset;
}

std::string region_str(const Region& region) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* b = std::get_if<Ball>(&region)) {
    os << "ball(center=" << b->center.str() << ", radius=" << b->radius << ')';
  } else {
    const auto& h = std::get<HalfSpace>(region);
    os << "halfspace(normal=" << h.normal.str() << ", offset=" << h.offset << ')';
  }
  return os.str();
}

Point invert_point(const Ball& b, const Point& x) {
  Point d = x - b.center;
  const double d2 = d.norm2();
  const double tol = kPoleTolerance * b.radius;
  if (d2 <= tol * tol) {
    throw DomainError("inversion undefined at the ball center " + b.center.str());
  }
  return b.center + d * (b.radius * b.radius / d2);
}

Point reflect_point(const HalfSpace& h, const Point& x) {
  return x + h.normal * (2.0 * (h.offset - dot(x, h.normal)));
}

Point cayley_point(const Point& x) {
  const int n = x.dim();
  Point pole(n);
  pole[n - 1] = -1.0;
  const double d2 = (x - pole).norm2();
  if (d2 <= kPoleTolerance * kPoleTolerance) {
    throw DomainError("Cayley map undefined at " + pole.str());
  }
  Point y(n);
  for (int i = 0; i + 1 < n; ++i) y[i] = 2.0 * x[i] / d2;
  y[n - 1] = (1.0 - x.norm2()) / d2;
  return y;
}

Point map_point(const Region& region, const Point& x) {
  if (const auto* b = std::get_if<Ball>(&region)) return invert_point(*b, x);
  return reflect_point(std::get<HalfSpace>(region), x);
}

}  // namespace hls
