#include "hls/field.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "hls/errors.hpp"
#include "hls/log.hpp"
#include "hls/parallel.hpp"

namespace hls {

KernelParams::KernelParams(int n, double lam) : dim(n), lambda(lam) {
  if (n < 1 || n > kMaxDim) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (!(lam > 0.0 && lam < n)) throw InvalidArgument("lambda must lie in (0, N)");
}

Grid::Grid(Point o, double h, std::array<int, 3> ext) : dim(o.dim()), origin(o), spacing(h), extent(ext) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
  for (int d = 0; d < 3; ++d) {
    if (d >= dim) {
      extent[d] = 1;
    } else if (extent[d] < 1) {
      throw InvalidArgument("grid extent must be positive");
    }
  }
}

Grid Grid::cube(int dim, double lo, double hi, int points) {
  if (!(hi > lo)) throw InvalidArgument("grid bounds must satisfy min < max");
  if (points < 1) throw InvalidArgument("grid extent must be positive");
  Point o(dim);
  for (int d = 0; d < dim; ++d) o[d] = lo;
  return Grid(o, (hi - lo) / points, {points, points, points});
}

std::size_t Grid::size() const {
  return static_cast<std::size_t>(extent[0]) * extent[1] * extent[2];
}

double Grid::cell_volume() const { return std::pow(spacing, dim); }

std::array<int, 3> Grid::index(std::size_t f) const {
  std::array<int, 3> idx{};
  idx[2] = static_cast<int>(f % extent[2]);
  f /= extent[2];
  idx[1] = static_cast<int>(f % extent[1]);
  idx[0] = static_cast<int>(f / extent[1]);
  return idx;
}

std::size_t Grid::flat(const std::array<int, 3>& idx) const {
  return (static_cast<std::size_t>(idx[0]) * extent[1] + idx[1]) * extent[2] + idx[2];
}

Point Grid::point(const std::array<int, 3>& idx) const {
  Point x(dim);
  for (int d = 0; d < dim; ++d) x[d] = origin[d] + (idx[d] + 0.5) * spacing;
  return x;
}

Point Grid::point(std::size_t f) const { return point(index(f)); }

bool Grid::contains(const Point& x) const {
  for (int d = 0; d < dim; ++d) {
    if (x[d] < lower(d) || x[d] > upper(d)) return false;
  }
  return true;
}

bool Grid::same_as(const Grid& o) const {
  return dim == o.dim && origin == o.origin && spacing == o.spacing && extent == o.extent;
}

ExtremizerSpec::ExtremizerSpec(double a, double b, Point c, Role r) : alpha(a), beta(b), center(c), role(r) {
  if (!(b > 0.0)) throw InvalidArgument("beta must be positive");
  if (!std::isfinite(a)) throw InvalidArgument("alpha must be finite");
}

double ExtremizerSpec::exponent(const KernelParams& kp) const {
  return role == Role::optimizer ? 0.5 * kp.weight_exponent() : static_cast<double>(kp.dim);
}

double AnalyticTail::operator()(const Point& x) const {
  return alpha * std::pow(beta + (x - center).norm2(), -exponent);
}

namespace {
// Integral over R^N of (beta + |x|^2)^{-q}.
double radial_power_integral(int n, double beta, double q) {
  if (!(q > 0.5 * n)) return std::numeric_limits<double>::infinity();
  return std::pow(std::numbers::pi, 0.5 * n) * std::exp(std::lgamma(q - 0.5 * n) - std::lgamma(q)) *
         std::pow(beta, 0.5 * n - q);
}
}  // namespace

double AnalyticTail::total_integral() const {
  return alpha * radial_power_integral(center.dim(), beta, exponent);
}

double AnalyticTail::total_power_integral(double p) const {
  return std::pow(std::abs(alpha), p) * radial_power_integral(center.dim(), beta, exponent * p);
}

Field::Field(Grid grid, std::vector<double> values, std::optional<AnalyticTail> tail)
    : grid_(std::move(grid)), values_(std::move(values)), tail_(std::move(tail)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field values do not match grid extent");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("field values must be finite");
  }
  if (tail_ && tail_->center.dim() != grid_.dim) throw InvalidArgument("tail dimension mismatch");
}

Field Field::zeros(const Grid& grid) { return Field(grid, std::vector<double>(grid.size(), 0.0)); }

Field Field::with_values(std::vector<double> values) const { return Field(grid_, std::move(values)); }

double Field::eval(const Point& x) const {
  if (x.dim() != grid_.dim) throw InvalidArgument("evaluation point dimension mismatch");
  std::array<int, 3> lo{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < grid_.dim; ++d) {
    const int n = grid_.extent[d];
    double u = (x[d] - grid_.origin[d]) / grid_.spacing - 0.5;
    if (u < -0.5 || u > n - 0.5) return tail_ ? (*tail_)(x) : 0.0;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    int i = static_cast<int>(std::floor(u));
    if (i >= n - 1) i = std::max(n - 2, 0);
    lo[d] = i;
    frac[d] = n == 1 ? 0.0 : u - i;
  }
  double acc = 0.0;
  const int corners = 1 << grid_.dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < grid_.dim; ++d) {
      const bool up = (c >> d) & 1;
      w *= up ? frac[d] : 1.0 - frac[d];
      idx[d] = lo[d] + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    acc += w * values_[grid_.flat(idx)];
  }
  return acc;
}

Field operator+(const Field& a, const Field& b) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch("fields live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return a.with_values(std::move(v));
}

Field operator-(const Field& a, const Field& b) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch("fields live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return a.with_values(std::move(v));
}

Field operator*(double s, const Field& f) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * f[i];
  std::optional<AnalyticTail> tail = f.tail();
  if (tail) tail->alpha *= s;
  return Field(f.grid(), std::move(v), tail);
}

Field make_extremizer(const ExtremizerSpec& spec, const KernelParams& kp, const Grid& grid) {
  if (spec.center.dim() != kp.dim || grid.dim != kp.dim) throw InvalidArgument("dimension mismatch");
  AnalyticTail tail{spec.alpha, spec.beta, spec.center, spec.exponent(kp)};
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = tail(grid.point(i));
  return Field(grid, std::move(v), tail);
}

double power_mass(const Field& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be at least 1");
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::pow(std::abs(f[i]), p);
  return pairwise_sum(terms) * f.grid().cell_volume();
}

double lp_norm(const Field& f, double p) { return std::pow(power_mass(f, p), 1.0 / p); }

namespace {

template <class Map>
Field lift(const Field& f, Map&& map) {
  const Grid& g = f.grid();
  std::vector<double> out(g.size());
  parallel_for(g.size(), [&](std::size_t i) { out[i] = map(g.point(i)); });
  return Field(g, std::move(out));
}

}  // namespace

Field apply_inversion(const Ball& b, const Field& f, const KernelParams& kp, SingularPolicy policy) {
  if (b.dim() != f.dim() || kp.dim != f.dim()) throw InvalidArgument("dimension mismatch");
  const double w = kp.weight_exponent();
  return lift(f, [&](const Point& x) {
    const double d = distance(x, b.center);
    if (d <= 1e-14 * b.radius) {
      if (policy == SingularPolicy::error) throw DomainError("grid sample coincides with the inversion center");
      return 0.0;
    }
    return std::pow(b.radius / d, w) * f.eval(invert_point(b, x));
  });
}

Field apply_reflection(const HalfSpace& h, const Field& f) {
  if (h.dim() != f.dim()) throw InvalidArgument("dimension mismatch");
  Field out = lift(f, [&](const Point& x) { return f.eval(reflect_point(h, x)); });
  if (!f.tail()) return out;
  AnalyticTail t = *f.tail();
  t.center = reflect_point(h, t.center);
  return Field(out.grid(), std::vector<double>(out.values().begin(), out.values().end()), t);
}

Field apply_cayley(const Field& f, const KernelParams& kp, SingularPolicy policy) {
  if (kp.dim != f.dim()) throw InvalidArgument("dimension mismatch");
  const int n = f.dim();
  Point e(n);
  e[n - 1] = -1.0;
  const double w = kp.weight_exponent();
  return lift(f, [&](const Point& x) {
    const double d = distance(x, e);
    if (d <= 1e-14) {
      if (policy == SingularPolicy::error) throw DomainError("grid sample coincides with the Cayley pole");
      return 0.0;
    }
    return std::pow(std::sqrt(2.0) / d, w) * f.eval(cayley_point(x));
  });
}

Field apply_region_map(const Region& region, const Field& f, const KernelParams& kp) {
  if (const auto* b = std::get_if<Ball>(&region)) return apply_inversion(*b, f, kp);
  return apply_reflection(std::get<HalfSpace>(region), f);
}

std::vector<char> region_mask(const Region& region, const Grid& grid) {
  std::vector<char> mask(grid.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = region_contains(region, grid.point(i)) ? 1 : 0;
  return mask;
}

SplitResult split_in_out(const Region& region, const Field& f, const KernelParams& kp) {
  if (region_dim(region) != f.dim()) throw InvalidArgument("dimension mismatch");
  const Field tf = apply_region_map(region, f, kp);
  const auto mask = region_mask(region, f.grid());
  std::vector<double> inner(f.size()), outer(f.size()), in_mass, out_mass;
  in_mass.reserve(f.size());
  out_mass.reserve(f.size());
  const double p = kp.p();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::pow(std::abs(f[i]), p);
    if (mask[i]) {
      inner[i] = f[i];
      outer[i] = tf[i];
      in_mass.push_back(m);
    } else {
      inner[i] = tf[i];
      outer[i] = f[i];
      out_mass.push_back(m);
    }
  }
  const double mi = pairwise_sum(in_mass), mo = pairwise_sum(out_mass);
  SplitResult r{f.with_values(std::move(inner)), f.with_values(std::move(outer)), 0.0};
  r.mass_imbalance = (mi + mo) > 0.0 ? (mi - mo) / (mi + mo) : 0.0;
  if (std::abs(r.mass_imbalance) > 1e-3) {
    std::ostringstream os;
    os << "region " << region_str(region) << " does not bisect the L^p mass (imbalance "
       << r.mass_imbalance << "); splice norms are not preserved";
    warn(os.str());
  }
  return r;
}

void write_field_csv(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  os << std::setprecision(17);
  os << "dim," << g.dim << '\n';
  os << "origin";
  for (int d = 0; d < g.dim; ++d) os << ',' << g.origin[d];
  os << '\n' << "spacing," << g.spacing << '\n';
  os << "extent";
  for (int d = 0; d < g.dim; ++d) os << ',' << g.extent[d];
  os << '\n';
  for (double v : f.values()) os << v << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("field CSV: cannot parse " + what + " value '" + s + "'");
  }
}

std::vector<std::string> expect_row(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("field CSV: missing '" + key + "' row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto cells = split_csv(line);
  if (cells.empty() || cells[0] != key) throw InvalidArgument("field CSV: expected '" + key + "' row");
  cells.erase(cells.begin());
  return cells;
}

}  // namespace

Field read_field_csv(std::istream& is) {
  const auto dim_row = expect_row(is, "dim");
  if (dim_row.size() != 1) throw InvalidArgument("field CSV: dim row needs one value");
  const int dim = static_cast<int>(parse_double(dim_row[0], "dim"));
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("field CSV: dim must be 1, 2 or 3");
  const auto origin_row = expect_row(is, "origin");
  const auto spacing_row = expect_row(is, "spacing");
  const auto extent_row = expect_row(is, "extent");
  if (static_cast<int>(origin_row.size()) != dim || static_cast<int>(extent_row.size()) != dim ||
      spacing_row.size() != 1)
    throw InvalidArgument("field CSV: header rows do not match dim");
  Point origin(dim);
  std::array<int, 3> extent{1, 1, 1};
  for (int d = 0; d < dim; ++d) {
    origin[d] = parse_double(origin_row[d], "origin");
    extent[d] = static_cast<int>(parse_double(extent_row[d], "extent"));
  }
  Grid grid(origin, parse_double(spacing_row[0], "spacing"), extent);
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    values.push_back(parse_double(line, "sample"));
  }
  if (values.size() != grid.size()) throw InvalidArgument("field CSV: sample count does not match extent");
  return Field(grid, std::move(values));
}

void save_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_field_csv(os, f);
}

Field load_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot read field file " + path);
  return read_field_csv(is);
}

}  // namespace hls
