#include "hls/positivity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "hls/errors.hpp"
#include "hls/kernel_table.hpp"
#include "hls/parallel.hpp"
#include "hls/quadrature.hpp"

namespace hls {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct DefectParts {
  double defect = 0.0;
  double via_g = 0.0;
  double asymmetry = 0.0;
  double scale = 0.0;  // magnitude used for the rounding bound
};

DefectParts defect_parts(const Region& region, const Field& f, const KernelParams& kp) {
  const Field tf = apply_region_map(region, f, kp);
  const auto mask = region_mask(region, f.grid());
  std::vector<double> inner(f.size()), outer(f.size()), g(f.size()), tg(f.size()), diff(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - tf[i];
    diff[i] = d;
    if (mask[i]) {
      inner[i] = f[i];
      outer[i] = tf[i];
      g[i] = d;
      tg[i] = 0.0;
    } else {
      inner[i] = tf[i];
      outer[i] = f[i];
      g[i] = 0.0;
      tg[i] = -d;  // Theta g = (Theta f - f) off the region
    }
  }
  const Field fi = f.with_values(std::move(inner));
  const Field fo = f.with_values(std::move(outer));
  const Field plain = f.without_tail();
  DefectParts p;
  const double ei = energy_value(fi, fi, kp), eo = energy_value(fo, fo, kp), ef = energy_value(plain, plain, kp);
  p.defect = 0.5 * (ei + eo) - ef;
  p.via_g = energy_value(f.with_values(std::move(tg)), f.with_values(std::move(g)), kp);
  p.scale = std::abs(ei) + std::abs(eo) + std::abs(ef);
  const double norm = lp_norm(f, kp.p());
  p.asymmetry = norm > 0.0 ? lp_norm(f.with_values(std::move(diff)), kp.p()) / norm : 0.0;
  return p;
}

}  // namespace

PositivityReport positivity_defect(const Region& region, const Field& f, const KernelParams& kp) {
  if (region_dim(region) != f.dim() || kp.dim != f.dim()) throw InvalidArgument("dimension mismatch");
  const DefectParts fine = defect_parts(region, f, kp);
  const DefectParts coarse = defect_parts(region, coarsen(f), kp);
  const double rounding = 64.0 * kEps * std::sqrt(static_cast<double>(f.size())) * fine.scale;
  PositivityReport r;
  r.defect = fine.defect;
  r.defect_via_g = fine.via_g;
  r.est_error = std::abs(fine.defect - coarse.defect) + rounding;
  r.via_g_est = std::abs(fine.via_g - coarse.via_g) + rounding;
  r.asymmetry = fine.asymmetry;
  r.strict_flag = fine.asymmetry <= kInvariantTolerance;

  if (f.dim() == 1) {
    if (const auto* h = std::get_if<HalfSpace>(&region)) {
      // g = (f - Theta f) on the region, as cells measured from the boundary.
      const Field tf = apply_reflection(*h, f);
      const double e = h->normal[0], t = h->offset, half = 0.5 * f.grid().spacing;
      std::vector<double> lo, hi, vals;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = e * (f.grid().point(i)[0] - t);
        if (s + half <= 0.0) continue;
        const double gi = region_contains(region, f.grid().point(i)) ? f[i] - tf[i] : 0.0;
        if (gi == 0.0) continue;
        lo.push_back(std::max(0.0, s - half));
        hi.push_back(s + half);
        vals.push_back(gi);
      }
      r.oracle_value = halfline_representation(lo, hi, vals, kp.lambda);
    }
  }
  return r;
}

EnergyResult transformed_energy(const Region& region, const Field& f, const KernelParams& kp) {
  const Field tf = apply_region_map(region, f, kp).without_tail();
  const EnergyResult fine = energy_direct(tf, tf, kp);
  const Field ctf = apply_region_map(region, coarsen(f), kp);
  const double coarse = energy_value(ctf, ctf, kp);
  return {fine.value, Quadrature::direct, std::abs(fine.value - coarse) + fine.est_error};
}

EnergyResult cayley_energy(const Field& f, const KernelParams& kp) {
  const Field tf = apply_cayley(f, kp);
  const EnergyResult fine = energy_direct(tf, tf, kp);
  const Field ctf = apply_cayley(coarsen(f), kp);
  const double coarse = energy_value(ctf, ctf, kp);
  return {fine.value, Quadrature::direct, std::abs(fine.value - coarse) + fine.est_error};
}

// ---------------------------------------------------------------------------
// Representation formula

double representation_constant(const KernelParams& kp) {
  const double n = kp.dim, l = kp.lambda, mu = n - l;
  const double log_a = 0.5 * (n - 1) * std::log(2 * std::numbers::pi) + 0.5 * (1 + n - 2 * l) * std::log(2.0) +
                       std::lgamma(0.5 * mu) - std::log(2 * std::sqrt(std::numbers::pi)) - std::lgamma(0.5 * l);
  return std::exp(log_a);
}

namespace {

bool at_endpoint(const KernelParams& kp) { return std::abs(kp.lambda - (kp.dim - 2.0)) < 1e-12; }

// int_0^inf w(u) g(xi cosh u) sinh(u)^{1-mu} du via u = w^m, m = 1 / (2 - mu),
// which removes the endpoint singularity of (tau^2 - xi^2)^{-mu/2}.
template <class G>
double cosh_integral(double mu, double u_max, G&& g, int order, int panels) {
  const double m = 1.0 / (2.0 - mu);
  const double w_max = std::pow(u_max, 1.0 / m);
  const GaussRule& rule = gauss_legendre(order);
  return integrate_gl(
      [&](double w) {
        if (w <= 0.0) return 0.0;
        const double u = std::pow(w, m);
        // sinh(u)^{1-mu} * du/dw, written to stay finite as w -> 0
        const double ratio = u < 1e-8 ? 1.0 : std::sinh(u) / u;
        const double jac = m * std::pow(ratio, 1.0 - mu) * std::pow(w, m * (2.0 - mu) - 1.0);
        return jac * g(u);
      },
      0.0, w_max, rule, panels);
}

}  // namespace

double kernel_k(const KernelParams& kp, double xi, double t) {
  if (!(t > 0.0)) throw InvalidArgument("kernel_k needs t > 0");
  if (kp.lambda < kp.dim - 2.0 - 1e-12)
    throw InvalidArgument("no positive representation for lambda < N - 2");
  if (xi < 0.0 || (kp.dim >= 2 && !(xi > 0.0))) throw InvalidArgument("kernel_k needs xi_perp > 0 for N >= 2");
  const double mu = kp.dim - kp.lambda;
  if (at_endpoint(kp)) return std::numbers::pi * std::exp(-t * xi) / xi;
  const double s = 2.0 * std::sin(0.5 * std::numbers::pi * mu);
  if (xi == 0.0) return s * std::tgamma(1.0 - mu) * std::pow(t, mu - 1.0);
  const double z = t * xi;
  const double u_max = std::acosh(std::max(2.0, 60.0 / z)) + 1.0;
  const double integral =
      cosh_integral(mu, u_max, [&](double u) { return std::exp(-z * (std::cosh(u) - 1.0)); }, 16, 64);
  return s * std::pow(xi, 1.0 - mu) * std::exp(-z) * integral;
}

namespace {

struct HalfLine {
  std::vector<double> lo, hi, v;

  double laplace(double tau) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double w = hi[i] - lo[i];
      const double piece = tau * w < 1e-300 ? w : -std::expm1(-tau * w) / tau;
      s += v[i] * std::exp(-tau * lo[i]) * piece;
    }
    return s;
  }
  double min_width() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) m = std::min(m, hi[i] - lo[i]);
    return m;
  }
  double extent() const {
    double m = 0.0;
    for (double x : hi) m = std::max(m, x);
    return m;
  }
};

// (1 / Gamma(lambda)) int_0^inf tau^{lambda - 1} L(tau)^2 dtau with tau = e^s.
double halfline_value(const HalfLine& hl, double lambda, int order) {
  if (hl.v.empty()) return 0.0;
  const double x = hl.extent(), w = hl.min_width();
  const double s_lo = std::log(1e-17) / lambda - std::log(x);
  const double s_hi = std::log(1e17) / (2.0 - lambda) - std::log(w) + 2.0;
  const int panels = static_cast<int>(std::ceil((s_hi - s_lo) / 0.5));
  const GaussRule& rule = gauss_legendre(order);
  const double total = integrate_gl(
      [&](double s) {
        const double tau = std::exp(s);
        const double l = hl.laplace(tau);
        return std::pow(tau, lambda) * l * l;
      },
      s_lo, s_hi, rule, panels);
  return total / std::tgamma(lambda);
}

// Phi(rho) = 2 sin(pi mu / 2) int_rho^inf (tau^2 - rho^2)^{-mu/2} L(tau)^2 dtau,
// or pi L(rho)^2 / rho at lambda = N - 2.
double phi(const HalfLine& hl, const KernelParams& kp, double rho, int order) {
  const double mu = kp.dim - kp.lambda;
  if (at_endpoint(kp)) {
    const double l = hl.laplace(rho);
    return std::numbers::pi * l * l / rho;
  }
  const double t_big = 1e9 / hl.min_width();
  const double u_max = std::acosh(std::max(2.0, t_big / rho));
  const double integral = cosh_integral(
      mu, u_max,
      [&](double u) {
        const double l = hl.laplace(rho * std::cosh(u));
        return l * l;
      },
      order, 48);
  return 2.0 * std::sin(0.5 * std::numbers::pi * mu) * std::pow(rho, 1.0 - mu) * integral;
}

HalfLine halfline_of(const Grid& g, int axis, const std::vector<double>& v) {
  HalfLine hl;
  const double h = g.spacing;
  for (int i = 0; i < g.extent[axis]; ++i) {
    const double c = g.origin[axis] + (i + 0.5) * h;
    const double val = v[static_cast<std::size_t>(i)];
    if (c + 0.5 * h <= 0.0 || val == 0.0) continue;
    hl.lo.push_back(std::max(0.0, c - 0.5 * h));
    hl.hi.push_back(c + 0.5 * h);
    hl.v.push_back(val);
  }
  return hl;
}

void check_support(const Field& f) {
  const int n = f.dim();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.grid().point(i)[n - 1] < 0.0 && std::abs(f[i]) > 1e-14)
      throw InvalidArgument("representation needs f supported in {x_N >= 0}");
  }
}

struct Factorization {
  std::vector<double> u, v;
};

// f(x', x_N) = u(x') v(x_N) on the grid, or nullopt.
std::optional<Factorization> factor(const Field& f) {
  const Grid& g = f.grid();
  const int n = g.dim;
  const std::size_t nz = static_cast<std::size_t>(g.extent[n - 1]);
  const std::size_t np = f.size() / nz;
  std::size_t best = 0;
  double peak = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f[i]) > peak) peak = std::abs(f[i]), best = i;
  Factorization fac;
  fac.u.assign(np, 0.0);
  fac.v.assign(nz, 0.0);
  if (peak == 0.0) return fac;
  const std::size_t ip = best / nz, iz = best % nz;
  for (std::size_t a = 0; a < np; ++a) fac.u[a] = f[a * nz + iz];
  for (std::size_t b = 0; b < nz; ++b) fac.v[b] = f[ip * nz + b] / f[best];
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < nz; ++b)
      if (std::abs(f[a * nz + b] - fac.u[a] * fac.v[b]) > 1e-10 * peak) return std::nullopt;
  return fac;
}

double representation_value(const Field& f, const KernelParams& kp, int order) {
  const Grid& g = f.grid();
  const int n = kp.dim;
  if (n == 1) return halfline_value(halfline_of(g, 0, std::vector<double>(f.values().begin(), f.values().end())), kp.lambda, order);

  const auto fac = factor(f);
  if (!fac) throw InvalidArgument("representation for N >= 2 needs a separable field u(x') v(x_N)");
  const HalfLine hl = halfline_of(g, n - 1, fac->v);
  if (hl.v.empty()) return 0.0;
  const int d = n - 1;
  const double h = g.spacing;

  // transverse samples
  std::vector<Point> xs;
  std::vector<double> us;
  const std::size_t nz = static_cast<std::size_t>(g.extent[n - 1]);
  double diameter = 0.0;
  for (std::size_t a = 0; a < fac->u.size(); ++a) {
    if (fac->u[a] == 0.0) continue;
    const Point p = g.point(a * nz);
    Point x(d);
    for (int k = 0; k < d; ++k) x[k] = p[k];
    xs.push_back(x);
    us.push_back(fac->u[a]);
  }
  for (int k = 0; k < d; ++k) diameter += std::pow(g.extent[k] * h, 2);
  diameter = std::sqrt(diameter);
  const double norm = std::pow(h, d) * std::pow(2 * std::numbers::pi, -0.5 * d);
  auto uhat2 = [&](const Point& xi) {
    std::complex<double> s = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) s += us[q] * std::polar(1.0, -dot(xi, xs[q]));
    return std::norm(norm * s);
  };
  auto angular = [&](double rho) {
    if (d == 1) return uhat2(Point{rho}) + uhat2(Point{-rho});
    const int nt = 2 * static_cast<int>(std::ceil(rho * diameter)) + 32;
    double s = 0.0;
    for (int k = 0; k < nt; ++k) {
      const double th = 2 * std::numbers::pi * k / nt;
      s += uhat2(Point{rho * std::cos(th), rho * std::sin(th)});
    }
    return rho * s * 2 * std::numbers::pi / nt;
  };

  const double rho_max = std::numbers::pi / h;
  const double width = std::min(std::numbers::pi / diameter, rho_max / 8.0);
  const GaussRule& rule = gauss_legendre(order);
  std::vector<std::pair<double, double>> panels;
  double lo = width;
  for (int k = 0; k < 48; ++k) {
    panels.push_back({lo * 0.5, lo});
    lo *= 0.5;
  }
  for (double a = width; a < rho_max - 1e-12; a += width) panels.push_back({a, std::min(a + width, rho_max)});
  std::vector<double> parts(panels.size());
  parallel_for(panels.size(), [&](std::size_t p) {
    parts[p] = integrate_gl([&](double rho) { return angular(rho) * phi(hl, kp, rho, order); }, panels[p].first,
                            panels[p].second, rule);
  });
  return representation_constant(kp) * pairwise_sum(parts);
}

}  // namespace

double halfline_representation(const std::vector<double>& lo, const std::vector<double>& hi,
                               const std::vector<double>& values, double lambda) {
  if (lo.size() != hi.size() || lo.size() != values.size()) throw InvalidArgument("cell arrays differ in length");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, N)");
  HalfLine hl;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] < 0.0 || !(hi[i] > lo[i])) throw InvalidArgument("half-line cells must satisfy 0 <= lo < hi");
    if (values[i] == 0.0) continue;
    hl.lo.push_back(lo[i]);
    hl.hi.push_back(hi[i]);
    hl.v.push_back(values[i]);
  }
  return halfline_value(hl, lambda, 16);
}

RepresentationResult halfspace_representation(const Field& f, const KernelParams& kp) {
  if (f.dim() != kp.dim) throw InvalidArgument("field dimension does not match kernel dimension");
  if (kp.lambda < kp.dim - 2.0 - 1e-12) throw InvalidArgument("no positive representation for lambda < N - 2");
  check_support(f);
  const double fine = representation_value(f, kp, 16);
  const double low_order = representation_value(f, kp, 8);
  const double coarse = representation_value(coarsen(f), kp, 16);
  return {fine, std::abs(fine - low_order) + std::abs(fine - coarse) + 64 * kEps * std::abs(fine)};
}

// ---------------------------------------------------------------------------
// Newton's-theorem example

namespace {

// Fraction of the cube (centre c, side h) inside the ball, from 8^3 midpoints.
double ball_fraction(const Point& c, double h, const Point& a, double r) {
  const double reach = 0.5 * h * std::sqrt(3.0);
  const double dc = distance(c, a);
  if (dc + reach <= r) return 1.0;
  if (dc - reach >= r) return 0.0;
  constexpr int k = 8;
  int inside = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        Point x{c[0] + ((i + 0.5) / k - 0.5) * h, c[1] + ((j + 0.5) / k - 0.5) * h, c[2] + ((l + 0.5) / k - 0.5) * h};
        if (distance(x, a) < r) ++inside;
      }
  return static_cast<double>(inside) / (k * k * k);
}

Field newton_field(double h) {
  const Grid g(Point{-1.5, -1.5, -3.5}, h,
               {static_cast<int>(std::lround(3.0 / h)), static_cast<int>(std::lround(3.0 / h)),
                static_cast<int>(std::lround(7.0 / h))});
  const Point a{0.0, 0.0, 2.0};
  std::vector<double> small(g.size()), big(g.size());
  double vs = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    small[i] = ball_fraction(g.point(i), h, a, 0.5);
    big[i] = ball_fraction(g.point(i), h, a, 1.0);
    vs += small[i];
    vb += big[i];
  }
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = small[i] / vs - big[i] / vb;
  const double vol = g.cell_volume();
  for (auto& x : v) x /= vol;
  return Field(g, std::move(v));
}

}  // namespace

NewtonExample newton_zero_overlap(const KernelParams& kp) {
  if (kp.dim != 3 || std::abs(kp.lambda - 1.0) > 1e-12)
    throw InvalidArgument("the Newton example needs N = 3 and lambda = 1");
  NewtonExample ex;
  ex.plane = HalfSpace(Point{0.0, 0.0, 1.0}, 0.0);
  ex.f = newton_field(0.0625);
  const Field coarse = newton_field(0.125);
  const Field tf = apply_reflection(ex.plane, ex.f);
  const Field tc = apply_reflection(ex.plane, coarse);
  const EnergyResult over = energy_direct(tf, ex.f, kp);
  const double over_c = energy_value(tc, coarse, kp);
  ex.overlap = over.value;
  ex.overlap_est = over.est_error + std::abs(over.value - over_c);
  const EnergyResult self = energy_direct(ex.f, ex.f, kp);
  const double self_c = energy_value(coarse, coarse, kp);
  ex.self_energy = self.value;
  ex.self_est = self.est_error + std::abs(self.value - self_c);
  std::vector<double> cells(ex.f.values().begin(), ex.f.values().end());
  ex.total_mass = pairwise_sum(cells) * ex.f.grid().cell_volume();
  return ex;
}

// ---------------------------------------------------------------------------
// Counterexample search

namespace {

struct BumpGrid {
  double h;
  int n_perp;
  int n_z;
  double half_width;

  Grid grid() const { return Grid(Point{-half_width, -half_width, 0.0}, h, {n_perp, n_perp, n_z}); }
  BumpGrid coarser() const { return {2 * h, n_perp / 2, n_z / 2, half_width}; }
};

constexpr BumpGrid kBumpGrid{0.05, 64, 48, 1.6};
const std::vector<double> kWidths{0.1, 0.2, 0.4};
const std::vector<double> kHeights{0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.4};

std::vector<double> gaussian_samples(double origin, double h, int n, double centre, double sigma) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = origin + (i + 0.5) * h - centre;
    v[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x / (sigma * sigma));
  }
  return v;
}

// T(k) = sum over transverse offsets d' of A(d') W(d', k) h^{6 - lambda}, with A
// the cross-correlation of the transverse profiles; a bump at z-cell i meets the
// reflection of one at z-cell j at axial offset i + j + 1.
std::vector<double> reflected_offsets(const std::vector<double>& ga, const std::vector<double>& gb, int n_z,
                                      double h, double lambda) {
  const int n = static_cast<int>(ga.size());
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(std::abs(i - j))] += ga[i] * gb[j];
  std::vector<double> t(static_cast<std::size_t>(2 * n_z + 1), 0.0);
  const double scale = std::pow(h, 6.0 - lambda);
  parallel_for(t.size(), [&](std::size_t k) {
    if (k == 0) return;
    double s = 0.0;
    for (int dx = 0; dx < n; ++dx)
      for (int dy = 0; dy < n; ++dy) s += a[dx] * a[dy] * pair_weight(3, lambda, {dx, dy, static_cast<int>(k)});
    t[k] = s * scale;
  });
  return t;
}

struct Bump {
  double sigma, height;
};

// Pair table of I[Theta b_a, b_b] on one grid.
class BumpForms {
 public:
  BumpForms(const BumpGrid& g, double lambda) : g_(g) {
    for (double s : kWidths) perp_.push_back(gaussian_samples(-g.half_width, g.h, g.n_perp, 0.0, s));
    for (std::size_t a = 0; a < kWidths.size(); ++a)
      for (std::size_t b = 0; b < kWidths.size(); ++b)
        tables_.push_back(b < a ? tables_[b * kWidths.size() + a]
                                : reflected_offsets(perp_[a], perp_[b], g.n_z, g.h, lambda));
  }

  std::vector<double> axial(const Bump& b) const { return gaussian_samples(0.0, g_.h, g_.n_z, b.height, b.sigma); }

  // value and a rounding bound
  std::pair<double, double> form(const Bump& a, const Bump& b) const {
    const auto& t = tables_[width_index(a.sigma) * kWidths.size() + width_index(b.sigma)];
    const auto va = axial(a), vb = axial(b);
    const std::size_t n = va.size();
    std::vector<double> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += vb[j] * t[i + j + 1];
      rows[i] = va[i] * s;
    }
    const double v = pairwise_sum(rows);
    return {v, 64.0 * kEps * n * std::abs(v)};
  }

  double mass(const Bump& b) const {
    const auto& p = perp_[width_index(b.sigma)];
    double m = 0.0;
    for (double x : p) m += x;
    double mz = 0.0;
    for (double x : axial(b)) mz += x;
    return m * m * mz;
  }

  Field field(const Bump& a, const Bump& b, double ratio) const {
    const Grid grid = g_.grid();
    const auto& pa = perp_[width_index(a.sigma)];
    const auto& pb = perp_[width_index(b.sigma)];
    const auto za = axial(a), zb = axial(b);
    std::vector<double> vals(grid.size());
    for (int i = 0; i < g_.n_perp; ++i)
      for (int j = 0; j < g_.n_perp; ++j)
        for (int k = 0; k < g_.n_z; ++k)
          vals[grid.flat({i, j, k})] = pa[i] * pa[j] * za[k] - ratio * pb[i] * pb[j] * zb[k];
    return Field(grid, std::move(vals));
  }

 private:
  static std::size_t width_index(double s) {
    for (std::size_t i = 0; i < kWidths.size(); ++i)
      if (kWidths[i] == s) return i;
    throw InvalidArgument("unknown bump width");
  }

  BumpGrid g_;
  std::vector<std::vector<double>> perp_;
  std::vector<std::vector<double>> tables_;
};

struct Quadratic {
  double aa, ab, bb, rounding;
  double at(double r) const { return aa - 2.0 * r * ab + r * r * bb; }
};

Quadratic quadratic(const BumpForms& f, const Bump& a, const Bump& b) {
  const auto aa = f.form(a, a), ab = f.form(a, b), bb = f.form(b, b);
  return {aa.first, ab.first, bb.first, aa.second + 2.0 * ab.second + bb.second};
}

}  // namespace

CounterexampleSearch search_defect_witnesses(const KernelParams& kp) {
  if (kp.dim != 3) throw InvalidArgument("the counterexample search needs N = 3");
  if (kp.lambda > 1.0 + 1e-12) throw InvalidArgument("the counterexample search needs lambda <= N - 2");
  const BumpForms fine(kBumpGrid, kp.lambda);
  const BumpForms coarse(kBumpGrid.coarser(), kp.lambda);

  std::vector<Bump> bumps;
  for (double s : kWidths)
    for (double t : kHeights) bumps.push_back({s, t});

  CounterexampleSearch out;
  double best_neg = 0.0, best_pos = 0.0;
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    for (std::size_t j = i + 1; j < bumps.size(); ++j) {
      const Bump& a = bumps[i];
      const Bump& b = bumps[j];
      if (a.height == b.height) continue;
      const Quadratic q = quadratic(fine, a, b);
      const Quadratic qc = quadratic(coarse, a, b);
      // amplitude of the second bump: the minimiser of the form, and the one
      // giving zero total mass
      const double ratios[2] = {q.ab / q.bb, fine.mass(a) / fine.mass(b)};
      for (int k = 0; k < 2; ++k) {
        const double r = ratios[k];
        const double d = q.at(r);
        const double est = std::abs(d - qc.at(r)) + (1.0 + r * r) * (q.rounding + qc.rounding);
        ++out.candidates;
        const double ratio = d / est;
        auto make = [&] {
          return DefectWitness{fine.field(a, b, r), d, est, a.height, b.height, a.sigma, b.sigma, r};
        };
        if (d < -3.0 * est && ratio < best_neg) {
          best_neg = ratio;
          out.negative = make();
        }
        if (d > 3.0 * est && ratio > best_pos) {
          best_pos = ratio;
          out.positive = make();
        }
      }
    }
  }
  return out;
}

CounterexampleSearch find_negative_defect(const KernelParams& kp) {
  CounterexampleSearch s = search_defect_witnesses(kp);
  if (!s.negative)
    throw NumericalFailure("no negative-defect witness beyond 3 est_error among " + std::to_string(s.candidates) +
                           " candidates");
  return s;
}

}  // namespace hls
