#include "hls/lizhu.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hls/errors.hpp"
#include "hls/parallel.hpp"
#include "hls/quadrature.hpp"

#include "family_fit.hpp"

namespace hls {

namespace {

// 1 inside, 1/2 on the boundary, 0 outside
double atom_share(double signed_gap, double scale) {
  const double tol = 1e-12 * std::max(1.0, scale);
  if (signed_gap > tol) return 1.0;
  if (signed_gap < -tol) return 0.0;
  return 0.5;
}

double atom_share(const Region& region, const Point& x) {
  if (const auto* b = std::get_if<Ball>(&region)) return atom_share(b->radius - distance(x, b->center), b->radius);
  const auto& h = std::get<HalfSpace>(region);
  return atom_share(dot(x, h.normal) - h.offset, std::abs(h.offset));
}

double atom_share(const Box& box, const Point& x) {
  double s = 1.0;
  for (int d = 0; d < x.dim(); ++d) {
    const double scale = std::max(std::abs(box.lo[d]), std::abs(box.hi[d]));
    s *= std::min(atom_share(x[d] - box.lo[d], scale), atom_share(box.hi[d] - x[d], scale));
  }
  return s;
}

double atom_share(const Target& target, const Point& x) {
  if (const auto* b = std::get_if<Ball>(&target)) return atom_share(Region(*b), x);
  return atom_share(std::get<Box>(target), x);
}

double target_fraction(const Target& target, const Point& c, double h) {
  if (const auto* b = std::get_if<Ball>(&target)) return ball_fraction(c, h, *b);
  return box_fraction(c, h, std::get<Box>(target));
}

int target_dim(const Target& target) {
  if (const auto* b = std::get_if<Ball>(&target)) return b->dim();
  return std::get<Box>(target).lo.dim();
}

void check_density(const Field& v) {
  for (double x : v.values())
    if (!(x >= 0.0)) throw InvalidArgument("a density must be nonnegative");
}

Point unit_or_throw(const Point& e, int dim) {
  if (e.dim() != dim) throw InvalidArgument("dimension mismatch");
  if (std::abs(e.norm() - 1.0) > 1e-12) throw InvalidArgument("direction must be a unit vector");
  return e;
}

// Largest radius that reaches every point of the support from a.
double support_reach(const Measure& m, const Point& a) {
  double reach = 0.0;
  if (m.is_cloud()) {
    for (const Point& x : m.points().points) reach = std::max(reach, distance(x, a));
    return reach;
  }
  const Grid& g = m.field().grid();
  double r2 = 0.0;
  for (int d = 0; d < g.dim; ++d) {
    const double far = std::max(std::abs(a[d] - g.lower(d)), std::abs(a[d] - g.upper(d)));
    r2 += far * far;
  }
  return std::sqrt(r2) + g.spacing;
}

HemiBallResult finish_hemiball(const Measure& m, const Ball& b) {
  const double imbalance = m.mass_in(b) - 0.5 * m.total_mass();
  if (std::abs(imbalance) > kHemiBallTol * m.total_mass())
    throw NumericalFailure("no ball through the point holds half of the mass (imbalance " +
                           std::to_string(imbalance / m.total_mass()) + ")");
  return {b.center, b.radius, imbalance};
}

}  // namespace

// ---------------------------------------------------------------------------
// Measures

Measure::Measure(PointCloud c) : rep_(std::move(c)) {
  const auto& w = std::get<PointCloud>(rep_).weights;
  total_ = pairwise_sum(w);
}

Measure::Measure(CellMass m) : rep_(std::move(m)) { total_ = std::get<CellMass>(rep_).total(); }

Measure Measure::cloud(std::vector<Point> points, std::vector<double> weights) {
  if (points.empty()) throw InvalidArgument("a point cloud needs at least one atom");
  if (points.size() != weights.size()) throw InvalidArgument("one weight per point is required");
  const int dim = points.front().dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim || !points[i].finite()) throw InvalidArgument("cloud points must share a dimension");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InvalidArgument("cloud weights must be nonnegative");
  }
  Measure m(PointCloud{std::move(points), std::move(weights)});
  if (!(m.total_ > 0.0)) throw InvalidArgument("a measure needs positive total mass");
  return m;
}

Measure Measure::density(Field v) {
  check_density(v);
  Measure m(CellMass(v, 1.0));
  if (!(m.total_ > 0.0)) throw InvalidArgument("a measure needs positive total mass");
  return m;
}

int Measure::dim() const { return is_cloud() ? points().points.front().dim() : field().dim(); }

Measure Measure::normalized() const {
  const double s = 1.0 / total_;
  if (is_cloud()) {
    PointCloud c = points();
    for (double& w : c.weights) w *= s;
    return cloud(std::move(c.points), std::move(c.weights));
  }
  const Field& v = field();
  std::optional<AnalyticTail> tail = v.tail();
  if (tail) tail->alpha *= s;
  std::vector<double> vals(v.values().begin(), v.values().end());
  for (double& x : vals) x *= s;
  return density(Field(v.grid(), std::move(vals), tail));
}

double Measure::mass_in(const Region& region) const {
  if (region_dim(region) != dim()) throw InvalidArgument("dimension mismatch");
  if (!is_cloud()) return std::get<CellMass>(rep_).in(region);
  const PointCloud& c = points();
  std::vector<double> terms(c.points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = c.weights[i] * atom_share(region, c.points[i]);
  return pairwise_sum(terms);
}

double Measure::mass_in(const Box& box) const {
  if (box.lo.dim() != dim() || box.hi.dim() != dim()) throw InvalidArgument("dimension mismatch");
  if (!is_cloud()) return std::get<CellMass>(rep_).in(box);
  const PointCloud& c = points();
  std::vector<double> terms(c.points.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = c.weights[i] * atom_share(box, c.points[i]);
  return pairwise_sum(terms);
}

void write_cloud_csv(std::ostream& os, const PointCloud& c) {
  if (c.points.empty()) throw InvalidArgument("empty point cloud");
  const int n = c.points.front().dim();
  os << std::setprecision(17);
  for (int d = 0; d < n; ++d) os << 'x' << d + 1 << ',';
  os << "weight\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    for (int d = 0; d < n; ++d) os << c.points[i][d] << ',';
    os << c.weights[i] << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& is) {
  PointCloud c;
  std::string line;
  int columns = -1;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!header_seen) {
      header_seen = true;
      if (cells.back() != "weight") throw InvalidArgument("cloud CSV: expected header x1,...,xN,weight");
      columns = static_cast<int>(cells.size());
      if (columns < 2 || columns > kMaxDim + 1) throw InvalidArgument("cloud CSV: dimension must be 1, 2 or 3");
      continue;
    }
    if (static_cast<int>(cells.size()) != columns) throw InvalidArgument("cloud CSV: ragged row");
    std::vector<double> vals;
    for (const std::string& cell : cells) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) throw InvalidArgument("cloud CSV: not a number: '" + cell + "'");
      vals.push_back(x);
    }
    Point p(columns - 1);
    for (int d = 0; d < columns - 1; ++d) p[d] = vals[static_cast<std::size_t>(d)];
    c.points.push_back(p);
    c.weights.push_back(vals.back());
  }
  if (c.points.empty()) throw InvalidArgument("cloud CSV: no atoms");
  return c;
}

// ---------------------------------------------------------------------------
// Push-forward

double pushforward_mass(const Measure& m, const Region& region, const Target& target) {
  const int n = m.dim();
  if (region_dim(region) != n || target_dim(target) != n) throw InvalidArgument("dimension mismatch");
  const Ball* ball = std::get_if<Ball>(&region);

  if (m.is_cloud()) {
    const PointCloud& c = m.points();
    std::vector<double> terms(c.points.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (ball && distance(c.points[i], ball->center) == 0.0 && c.weights[i] > 0.0)
        throw DomainError("an atom sits at the inversion centre " + ball->center.str());
      terms[i] = c.weights[i] * atom_share(target, map_point(region, c.points[i]));
    }
    return pairwise_sum(terms);
  }

  // substitute x = Theta(y): mu(Theta^{-1} A) = int_A v(Theta y) J(y) dy
  const Field& v = m.field();
  auto integrand = [&](const Point& y) {
    if (!ball) return v.eval(reflect_point(std::get<HalfSpace>(region), y));
    const double d = distance(y, ball->center);
    if (d == 0.0) return 0.0;
    return std::pow(ball->radius / d, 2.0 * n) * v.eval(invert_point(*ball, y));
  };
  const Grid& g = v.grid();
  std::vector<double> terms(g.size());
  parallel_for(g.size(), [&](std::size_t i) {
    const Point y = g.point(i);
    const double frac = target_fraction(target, y, g.spacing);
    if (frac > 0.0) terms[i] = frac * integrand(y) * g.cell_volume();
  });
  double beyond = 0.0;
  if (n == 1) {
    double x0, x1;
    if (const auto* b = std::get_if<Ball>(&target)) {
      x0 = b->center[0] - b->radius, x1 = b->center[0] + b->radius;
    } else {
      x0 = std::get<Box>(target).lo[0], x1 = std::get<Box>(target).hi[0];
    }
    auto f1 = [&](double y) { return integrand(Point{y}); };
    const GaussRule& rule = gauss_legendre(32);
    if (x0 < g.lower(0)) beyond += integrate_gl(f1, x0, std::min(x1, g.lower(0)), rule, 64);
    if (x1 > g.upper(0)) beyond += integrate_gl(f1, std::max(x0, g.upper(0)), x1, rule, 64);
  }
  return pairwise_sum(terms) + beyond;
}

// ---------------------------------------------------------------------------
// Hemi-balls

HemiBallResult hemiball_on_ray(const Measure& m, const Point& e_in, double u) {
  const Point e = unit_or_throw(e_in, m.dim());
  if (!(u > 0.0) || !std::isfinite(u)) throw InvalidArgument("the ray parameter u must be positive");
  const double total = m.total_mass();
  const double plus = m.mass_in(HalfSpace(e, 0.0)), minus = m.mass_in(HalfSpace(-e, 0.0));
  if (std::abs(plus - minus) > kHemiBallTol * total)
    throw InvalidArgument("the measure is not balanced across the hyperplane normal to the ray");

  // balls through u e with centre (u - rho) e are nested, so the mass grows with rho
  const Point tip = u * e;
  auto ball = [&](double rho) { return Ball(tip - rho * e, rho); };
  const double rho = bisect_increasing([&](double r) { return r > 0.0 ? m.mass_in(ball(r)) : 0.0; }, 0.0,
                                       support_reach(m, tip), 0.5 * total, total);
  return finish_hemiball(m, ball(rho));
}

HemiBallResult hemiball_centered(const Measure& m, const Point& a) {
  if (a.dim() != m.dim()) throw InvalidArgument("dimension mismatch");
  const double total = m.total_mass();
  const double r = bisect_increasing([&](double r) { return r > 0.0 ? m.mass_in(Ball(a, r)) : 0.0; }, 0.0,
                                     support_reach(m, a), 0.5 * total, total);
  return finish_hemiball(m, Ball(a, r));
}

HemiBallResult solve_mapping_ball(const Measure& m, const Point& e_in, double s, double t) {
  const Point e = unit_or_throw(e_in, m.dim());
  if (!(s >= 0.0) || !(t > s) || !std::isfinite(t)) throw InvalidArgument("need 0 <= s < t");

  // f(u) = |t e - a_u| |s e - a_u| - rho_u^2 with a_u the centre of the hemi-ball through u e
  struct Sample {
    double u, f;
    HemiBallResult hb;
  };
  auto sample = [&](double u) {
    HemiBallResult hb = hemiball_on_ray(m, e, u);
    const double c = dot(hb.center, e);
    return Sample{u, std::abs(t - c) * std::abs(s - c) - hb.radius * hb.radius, hb};
  };
  auto mapping_error = [&](const HemiBallResult& hb) {
    const Point se = s * e;
    if (distance(se, hb.center) == 0.0) return std::numeric_limits<double>::infinity();
    return distance(invert_point(Ball(hb.center, hb.radius), se), t * e);
  };

  constexpr int kSamples = 64;
  std::vector<Sample> table;
  for (int k = 0; k < kSamples; ++k) {
    double u = s + (t - s) * k / (kSamples - 1);
    if (k == 0 && s == 0.0) u = 1e-3 * t;  // the ray parameter must be positive
    table.push_back(sample(u));
  }
  for (int k = 0; k + 1 < kSamples; ++k) {
    Sample lo = table[static_cast<std::size_t>(k)], hi = table[static_cast<std::size_t>(k + 1)];
    if ((lo.f > 0.0) == (hi.f > 0.0)) continue;
    for (int it = 0; it < 200 && hi.u - lo.u > 1e-15 * std::max(1.0, t); ++it) {
      const Sample mid = sample(0.5 * (lo.u + hi.u));
      if (mid.f == 0.0) {
        lo = hi = mid;
        break;
      }
      ((mid.f > 0.0) == (lo.f > 0.0) ? lo : hi) = mid;
    }
    const Sample& best = std::abs(lo.f) <= std::abs(hi.f) ? lo : hi;
    if (mapping_error(best.hb) <= 1e-8) return best.hb;
  }
  std::ostringstream msg;
  msg << std::setprecision(6) << "no mapping hemi-ball found; sampled f(u):";
  for (const Sample& smp : table) msg << " (" << smp.u << ", " << smp.f << ")";
  throw NumericalFailure(msg.str());
}

// ---------------------------------------------------------------------------
// Checks on densities

double check_pointwise_invariance(const Field& v, const Ball& b) {
  check_density(v);
  if (b.dim() != v.dim()) throw InvalidArgument("dimension mismatch");
  const Grid& g = v.grid();
  const int n = v.dim();
  const double vmax = *std::max_element(v.values().begin(), v.values().end());
  const double floor = 1e-12 * vmax;
  // without a tail only images inside the hull of the samples are interpolated
  auto usable = [&](const Point& y) {
    if (v.tail()) return true;
    for (int d = 0; d < n; ++d)
      if (y[d] < g.lower(d) + 0.5 * g.spacing || y[d] > g.upper(d) - 0.5 * g.spacing) return false;
    return true;
  };
  std::vector<double> dev(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t i) {
    const Point x = g.point(i);
    const double d = distance(x, b.center);
    if (d <= 1e-9 * b.radius) return;
    const Point y = invert_point(b, x);
    if (!usable(y)) return;
    const double image = std::pow(b.radius / d, 2.0 * n) * v.eval(y);
    dev[i] = std::abs(v[i] - image) / std::max(v[i], floor);
  });
  return *std::max_element(dev.begin(), dev.end());
}

double check_mass_identity(const Field& v, const std::vector<Point>& centers) {
  if (centers.empty()) throw InvalidArgument("the mass identity needs at least one centre");
  const Measure m = Measure::density(v);
  const int n = v.dim();
  std::vector<double> vals;
  for (const Point& a : centers) {
    const double r = hemiball_centered(m, a).radius;
    vals.push_back(std::pow(r, 2.0 * n) * v.eval(a));
  }
  if (vals.size() == 1) return 0.0;
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  double var = 0.0;
  for (double x : vals) var += (x - mean) * (x - mean);
  var /= static_cast<double>(vals.size());
  if (!(mean > 0.0)) throw NumericalFailure("the density vanishes at every centre");
  return std::sqrt(var) / mean;
}

bool RadialDerivative::agrees() const { return std::abs(lhs - rhs) <= tol; }

RadialDerivative check_radial_derivative(const Field& v, const Point& x) {
  if (x.dim() != v.dim()) throw InvalidArgument("dimension mismatch");
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("the radial derivative is taken away from the origin");
  const Grid& g = v.grid();
  const double h = g.spacing;
  const Point e = (1.0 / r) * x;
  const Point xp = x + h * e, xm = x - h * e;
  if (!g.contains(xp) || !g.contains(xm)) throw DomainError("the difference stencil at " + x.str() + " leaves the grid");

  const Measure m = Measure::density(v);
  RadialDerivative out;
  out.lhs = (v.eval(xp) - v.eval(xm)) / (2.0 * h);
  out.rho = hemiball_on_ray(m, e, r).radius;
  const double vx = v.eval(x);
  out.rhs = -v.dim() * vx / out.rho;
  // difference and quadrature errors are O(h^2) on the scale of v over the hemi-ball radius
  const double scale = 10.0 * v.dim() * vx / std::min(out.rho, 1.0);
  out.tol = (h * h + kHemiBallTol) * scale;
  return out;
}

InvariantFit fit_invariant_density(const Field& v) {
  check_density(v);
  const int n = v.dim();
  const Measure m = Measure::density(v);
  const std::size_t positive =
      static_cast<std::size_t>(std::count_if(v.values().begin(), v.values().end(), [](double x) { return x > 0; }));
  if (positive < static_cast<std::size_t>(n + 2)) throw NumericalFailure("degenerate fit: too few positive samples");

  // coordinate medians, then the half-mass radius, which is sqrt(beta) for the family
  Point y0(n);
  for (int d = 0; d < n; ++d) {
    const Point e = Point::unit(n, d);
    auto below = [&](double t) { return m.total_mass() - m.mass_in(HalfSpace(e, t)); };
    const double lo = v.grid().lower(d) - support_reach(m, v.grid().origin);
    y0[d] = bisect_increasing(below, lo, v.grid().upper(d) + v.grid().spacing, 0.5 * m.total_mass(), m.total_mass());
  }
  const double r0 = hemiball_centered(m, y0).radius;
  const double beta0 = r0 * r0;
  const double alpha0 = std::max(v.eval(y0), 1e-300) * std::pow(beta0, n);

  const detail::FamilyParams p = detail::fit_family(v, n, {alpha0, beta0, y0});
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !p.center.finite() || !(p.beta > 0.0))
    throw NumericalFailure("degenerate fit: the least-squares problem did not converge");

  InvariantFit fit{p.alpha, p.beta, p.center, 0.0, false};
  const Field model = make_extremizer(ExtremizerSpec(p.alpha, p.beta, p.center, ExtremizerSpec::Role::density),
                                      KernelParams(n, 0.5 * n), v.grid());
  std::vector<double> res(v.size()), mag(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) res[i] = std::abs(v[i] - model[i]), mag[i] = std::abs(v[i]);
  fit.fit_error = pairwise_sum(res) / pairwise_sum(mag);
  fit.mass_divergent = p.beta < 4.0 * v.grid().spacing * v.grid().spacing;
  return fit;
}

// ---------------------------------------------------------------------------
// Radial symmetry and monotonicity

RadialReport check_radial_decreasing(const Measure& m, const Point& origin) {
  const int n = m.dim();
  if (origin.dim() != n) throw InvalidArgument("dimension mismatch");

  // radius of the largest ball about the origin inside the support box
  double reach = std::numeric_limits<double>::infinity();
  RadialReport rep;
  if (m.is_cloud()) {
    const auto& pts = m.points().points;
    for (int d = 0; d < n; ++d) {
      double lo = pts.front()[d], hi = lo;
      for (const Point& x : pts) lo = std::min(lo, x[d]), hi = std::max(hi, x[d]);
      reach = std::min({reach, origin[d] - lo, hi - origin[d]});
    }
    // sampling noise of a mass fraction: a few standard errors of the effective atom count
    double w2 = 0.0;
    for (double w : m.points().weights) w2 += w * w;
    rep.tolerance = 1.5 * std::sqrt(w2) / m.total_mass();
  } else {
    const Grid& g = m.field().grid();
    for (int d = 0; d < n; ++d) reach = std::min({reach, origin[d] - g.lower(d), g.upper(d) - origin[d]});
    const double rel = g.spacing / reach;
    rep.tolerance = 1e-6 + 10.0 * rel * rel;
  }
  if (!(reach > 0.0)) throw InvalidArgument("the origin lies outside the support box");

  std::vector<Point> dirs;
  if (n == 1) {
    dirs = {Point{1.0}, Point{-1.0}};
  } else if (n == 2) {
    for (int k = 0; k < 8; ++k) dirs.push_back(Point{std::cos(k * M_PI / 4), std::sin(k * M_PI / 4)});
  } else {
    for (int k = 0; k < 3; ++k) dirs.push_back(Point::unit(3, k)), dirs.push_back(-Point::unit(3, k));
    const double s = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 8; ++k) dirs.push_back(Point{(k & 1 ? s : -s), (k & 2 ? s : -s), (k & 4 ? s : -s)});
  }

  const double total = m.total_mass();
  for (double r : {reach / 8, reach / 4}) {
    std::vector<double> ts;
    for (int j = 0; j * reach / 8 + r <= reach * (1 + 1e-12); ++j) ts.push_back(j * reach / 8);
    // mass[t][dir]
    std::vector<std::vector<double>> mass(ts.size(), std::vector<double>(dirs.size()));
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t k = 0; k < dirs.size(); ++k) mass[i][k] = m.mass_in(Ball(origin + ts[i] * dirs[k], r));
    for (std::size_t i = 1; i < ts.size(); ++i)
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        rep.radial_violation = std::max(rep.radial_violation, std::abs(mass[i][k] - mass[i][0]) / total);
        ++rep.radial_pairs;
      }
    for (std::size_t k = 0; k < dirs.size(); ++k)
      for (std::size_t far = 0; far < ts.size(); ++far)
        for (std::size_t near = 0; near < far; ++near) {
          if (!(ts[far] - r > ts[near] + r)) continue;
          rep.monotone_violation = std::max(rep.monotone_violation, (mass[far][k] - mass[near][k]) / total);
          ++rep.monotone_pairs;
        }
  }
  return rep;
}

}  // namespace hls
