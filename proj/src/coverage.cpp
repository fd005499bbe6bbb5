#include "hls/coverage.hpp"

#include <algorithm>
#include <limits>

#include "hls/parallel.hpp"
#include "hls/quadrature.hpp"

namespace hls {

double halfspace_fraction(const Point& c, double h, const Point& e, double t) {
  // x = c + h (u - 1/2), u in [0,1]^N; x.e > t  <=>  sum b_k u_k > tau with b_k >= 0
  long double tau = t - dot(c, e);
  std::vector<long double> b;
  for (int k = 0; k < c.dim(); ++k) {
    const long double a = static_cast<long double>(h) * e[k];
    tau += 0.5L * a;
    if (a < 0) tau -= a;
    if (std::abs(a) > 1e-9L * h) b.push_back(std::abs(a));
  }
  if (b.empty()) return tau < 0 ? 1.0 : 0.0;
  const std::size_t d = b.size();
  long double total = 0, scale = 1;
  for (std::size_t k = 0; k < d; ++k) total += b[k], scale *= b[k] * static_cast<long double>(k + 1);
  if (tau <= 0) return 1.0;
  if (tau >= total) return 0.0;
  // P(sum b_k u_k <= tau) by inclusion-exclusion over the cube corners
  long double below = 0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    long double s = tau;
    int sign = 1;
    for (std::size_t k = 0; k < d; ++k)
      if (mask & (1u << k)) s -= b[k], sign = -sign;
    if (s > 0) below += sign * std::pow(s, static_cast<long double>(d));
  }
  below /= scale;
  return static_cast<double>(std::clamp(1.0L - below, 0.0L, 1.0L));
}

namespace {

// Tangent-plane estimate on 4^N subcells, refined once more near the centre.
// The refinement depends on the cell position only, so the fraction is
// continuous in the radius.
double ball_fraction_rec(const Point& c, double h, const Ball& b, int depth) {
  const int n = c.dim();
  const double reach = 0.5 * h * std::sqrt(static_cast<double>(n));
  const double dist = distance(c, b.center);
  if (dist + reach <= b.radius) return 1.0;
  if (dist - reach >= b.radius) return 0.0;
  if (n == 1) return std::clamp((std::min(c[0] + 0.5 * h, b.center[0] + b.radius) -
                                 std::max(c[0] - 0.5 * h, b.center[0] - b.radius)) / h,
                                0.0, 1.0);
  if (depth == 0 || (depth == 1 && dist < 2 * h)) {
    constexpr int k = 4;
    const double hs = h / k;
    double s = 0.0;
    const int total = n == 2 ? k * k : k * k * k;
    for (int idx = 0; idx < total; ++idx) {
      Point sub(n);
      int rem = idx;
      for (int d = 0; d < n; ++d) {
        sub[d] = c[d] - 0.5 * h + (rem % k + 0.5) * hs;
        rem /= k;
      }
      s += ball_fraction_rec(sub, hs, b, depth + 1);
    }
    return s / total;
  }
  if (dist == 0.0) {
    // centred on the cell: the ball volume, exact while the ball fits inside
    const double vol = n == 2 ? M_PI * b.radius * b.radius : 4.0 / 3.0 * M_PI * std::pow(b.radius, 3);
    return std::min(1.0, vol / std::pow(h, n));
  }
  Point nrm = (1.0 / dist) * (c - b.center);
  return 1.0 - halfspace_fraction(c, h, nrm, dot(nrm, b.center) + b.radius);
}

// Mass of |tail|^p on (x0, x1) in one dimension via x - y = sqrt(beta) tan(theta).
double tail_mass_1d(const AnalyticTail& tail, double p, double x0, double x1) {
  if (!(x1 > x0)) return 0.0;
  const double q = tail.exponent * p;
  const double sb = std::sqrt(tail.beta);
  const double t0 = std::atan((x0 - tail.center[0]) / sb), t1 = std::atan((x1 - tail.center[0]) / sb);
  const double pref = std::pow(std::abs(tail.alpha), p) * std::pow(tail.beta, 0.5 - q);
  if (std::abs(q - 1.0) < 1e-14) return pref * (t1 - t0);
  return pref * integrate_gl([&](double th) { return std::pow(std::cos(th), 2 * q - 2); }, t0, t1,
                             gauss_legendre(32), 16);
}

}  // namespace

double ball_fraction(const Point& c, double h, const Ball& b) { return ball_fraction_rec(c, h, b, 0); }

double box_fraction(const Point& c, double h, const Box& b) {
  double f = 1.0;
  for (int d = 0; d < c.dim(); ++d) {
    const double lo = std::max(c[d] - 0.5 * h, b.lo[d]), hi = std::min(c[d] + 0.5 * h, b.hi[d]);
    if (hi <= lo) return 0.0;
    f *= (hi - lo) / h;
  }
  return f;
}

CellMass::CellMass(const Field& f, double p) : f_(f), p_(p), m_(f.size()) {
  const double vol = f.grid().cell_volume();
  for (std::size_t i = 0; i < m_.size(); ++i) m_[i] = std::pow(std::abs(f[i]), p) * vol;
  constexpr double inf = std::numeric_limits<double>::infinity();
  total_ = pairwise_sum(m_) + tail_between(-inf, f.grid().lower(0)) + tail_between(f.grid().upper(0), inf);
}

double CellMass::tail_between(double x0, double x1) const {
  if (f_.dim() != 1 || !f_.tail()) return 0.0;
  const double lo = f_.grid().lower(0), hi = f_.grid().upper(0);
  return tail_mass_1d(*f_.tail(), p_, x0, std::min(x1, lo)) + tail_mass_1d(*f_.tail(), p_, std::max(x0, hi), x1);
}

double CellMass::in(const Region& region) const {
  if (region_dim(region) != f_.dim()) throw InvalidArgument("dimension mismatch");
  const Grid& g = f_.grid();
  std::vector<double> terms(m_.size());
  parallel_for(m_.size(), [&](std::size_t i) {
    if (m_[i] == 0.0) return;
    const Point c = g.point(i);
    const double frac = std::holds_alternative<Ball>(region)
                            ? ball_fraction(c, g.spacing, std::get<Ball>(region))
                            : halfspace_fraction(c, g.spacing, std::get<HalfSpace>(region).normal,
                                                 std::get<HalfSpace>(region).offset);
    terms[i] = m_[i] * frac;
  });
  double tail = 0.0;
  if (f_.dim() == 1 && f_.tail()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (const auto* b = std::get_if<Ball>(&region)) {
      tail = tail_between(b->center[0] - b->radius, b->center[0] + b->radius);
    } else {
      const auto& h = std::get<HalfSpace>(region);
      tail = h.normal[0] > 0 ? tail_between(h.offset, inf) : tail_between(-inf, -h.offset);
    }
  }
  return pairwise_sum(terms) + tail;
}

double CellMass::in(const Box& box) const {
  if (box.lo.dim() != f_.dim() || box.hi.dim() != f_.dim()) throw InvalidArgument("dimension mismatch");
  const Grid& g = f_.grid();
  std::vector<double> terms(m_.size());
  for (std::size_t i = 0; i < m_.size(); ++i)
    if (m_[i] != 0.0) terms[i] = m_[i] * box_fraction(g.point(i), g.spacing, box);
  return pairwise_sum(terms) + (f_.dim() == 1 ? tail_between(box.lo[0], box.hi[0]) : 0.0);
}

}  // namespace hls
