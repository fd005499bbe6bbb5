#include "hls/symmetrize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "hls/coverage.hpp"
#include "hls/errors.hpp"
#include "hls/parallel.hpp"

#include "family_fit.hpp"

namespace hls {

double total_power_mass(const Field& f, const KernelParams& kp) { return CellMass(f, kp.p()).total(); }

double region_power_mass(const Field& f, const KernelParams& kp, const Region& region) {
  return CellMass(f, kp.p()).in(region);
}

double hemiball_radius(const Field& f, const KernelParams& kp, const Point& a) {
  if (a.dim() != f.dim()) throw InvalidArgument("dimension mismatch");
  const CellMass cm(f, kp.p());
  const double total = cm.total();
  if (!(total > 0.0)) throw InvalidArgument("hemiball of the zero field");
  const Grid& g = f.grid();
  double reach = 0.0;
  for (int d = 0; d < g.dim; ++d) {
    const double far = std::max(std::abs(a[d] - g.lower(d)), std::abs(a[d] - g.upper(d)));
    reach += far * far;
  }
  return bisect_increasing([&](double r) { return cm.in(Ball(a, r)); }, 0.0, std::sqrt(reach) + g.spacing,
                           0.5 * total, total);
}

double hemispace_offset(const Field& f, const KernelParams& kp, const Point& e) {
  if (e.dim() != f.dim()) throw InvalidArgument("dimension mismatch");
  if (std::abs(e.norm() - 1.0) > 1e-12) throw InvalidArgument("hemispace direction must be a unit vector");
  const CellMass cm(f, kp.p());
  const double total = cm.total();
  if (!(total > 0.0)) throw InvalidArgument("hemispace of the zero field");
  const Grid& g = f.grid();
  double span = 0.0, mid = 0.0;
  for (int d = 0; d < g.dim; ++d) {
    span += std::abs(e[d]) * 0.5 * (g.upper(d) - g.lower(d));
    mid += e[d] * 0.5 * (g.upper(d) + g.lower(d));
  }
  // mass on the far side {x.e <= t} grows with t
  auto below = [&](double t) { return total - cm.in(HalfSpace(e, t)); };
  double lo = mid - span - g.spacing;
  for (int grow = 0; below(lo) > 0.5 * total; ++grow) {
    if (grow > 60) throw NumericalFailure("could not bracket half of the L^p mass");
    lo -= 2.0 * (span + g.spacing) * (1 << std::min(grow, 20));
  }
  return bisect_increasing(below, lo, mid + span + g.spacing, 0.5 * total, total);
}

Point power_centroid(const Field& f, const KernelParams& kp) {
  std::vector<double> m(f.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::pow(std::abs(f[i]), kp.p());
  const double total = pairwise_sum(m);
  if (!(total > 0.0)) throw InvalidArgument("centroid of the zero field");
  Point c = Point::zeros(f.dim());
  for (int d = 0; d < f.dim(); ++d) {
    std::vector<double> w(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) w[i] = m[i] * f.grid().point(i)[d];
    c[d] = pairwise_sum(w) / total;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Steps

std::string to_string(Choice c) {
  switch (c) {
    case Choice::inner: return "i";
    case Choice::outer: return "o";
    case Choice::none: return "none";
  }
  return "none";
}

StepResult symmetrization_step(const Field& f, const KernelParams& kp, const Region& region, double min_gain) {
  const SplitResult s = split_in_out(region, f, kp);
  const EnergyResult q = rayleigh_estimate(f, kp);
  const EnergyResult qi = rayleigh_estimate(s.inner, kp);
  const EnergyResult qo = rayleigh_estimate(s.outer, kp);
  StepRecord rec{region, q.value, q.value, std::max({q.est_error, qi.est_error, qo.est_error}), 0.0, Choice::none};
  const bool inner_better = qi.value >= qo.value;
  const double best = inner_better ? qi.value : qo.value;

  // the same splice at 2h; its gain differs from ours by the discretization error of the gain
  const Field cf = coarsen(f);
  const SplitResult cs = split_in_out(region, cf, kp);
  const double coarse_gain =
      rayleigh_quotient(inner_better ? cs.inner : cs.outer, kp) - rayleigh_quotient(cf, kp);
  rec.gain_est = std::abs((best - q.value) - coarse_gain);

  if (best - q.value > std::max(min_gain * q.value, rec.gain_est)) {
    rec.quotient_after = best;
    rec.choice = inner_better ? Choice::inner : Choice::outer;
    return {inner_better ? s.inner : s.outer, rec};
  }
  return {f, rec};
}

// ---------------------------------------------------------------------------
// Extremizer fit

namespace {

double fit_error(const Field& f, const KernelParams& kp, double alpha, double beta, const Point& y) {
  const ExtremizerSpec spec(alpha, beta, y);
  const Field model = make_extremizer(spec, kp, f.grid());
  const double norm = lp_norm(f, kp.p());
  return lp_norm(f.without_tail() - model.without_tail(), kp.p()) / norm;
}

}  // namespace

ExtremizerFit fit_extremizer(const Field& f, const KernelParams& kp) {
  const int n = f.dim();
  const double q = 0.5 * kp.weight_exponent();
  Point y0(n);
  for (int d = 0; d < n; ++d) y0[d] = hemispace_offset(f, kp, Point::unit(n, d));
  // (beta + r^2)^{-N} puts half of its mass inside r = sqrt(beta)
  const double r0 = hemiball_radius(f, kp, y0);
  const double beta0 = r0 * r0;
  const double alpha0 = std::max(f.eval(y0), 1e-300) * std::pow(beta0, q);

  const detail::FamilyParams p = detail::fit_family(f, q, {alpha0, beta0, y0});
  ExtremizerFit fit{p.alpha, p.beta, p.center, 0.0};
  fit.rel_error = fit_error(f, kp, fit.alpha, fit.beta, fit.center);
  const double start_error = fit_error(f, kp, alpha0, beta0, y0);
  if (!std::isfinite(fit.rel_error) || start_error < fit.rel_error) {
    fit = {alpha0, beta0, y0, start_error};
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Driver

int SymmetrizationTrace::effective_steps() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [](const StepRecord& s) { return s.choice != Choice::none; }));
}

SymmetrizationTrace run_symmetrization(const Field& f0, const KernelParams& kp, const Schedule& schedule) {
  if (f0.dim() != kp.dim) throw InvalidArgument("field dimension does not match kernel dimension");
  for (double v : f0.values())
    if (v < 0.0) throw InvalidArgument("symmetrization needs a nonnegative field");
  if (!(lp_norm(f0, kp.p()) > 0.0)) throw InvalidArgument("symmetrization of the zero field");
  if (schedule.max_sweeps < 1) throw InvalidArgument("max_sweeps must be positive");

  const int n = kp.dim;
  std::mt19937_64 rng(schedule.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss;

  SymmetrizationTrace trace;
  Field f = f0;
  double quotient = rayleigh_quotient(f, kp);
  auto apply = [&](const Region& region) {
    StepResult r = symmetrization_step(f, kp, region, schedule.min_gain);
    // keep the before/after chain on one evaluation
    r.record.quotient_before = quotient;
    if (r.record.choice == Choice::none) r.record.quotient_after = quotient;
    quotient = r.record.quotient_after;
    f = std::move(r.f);
    trace.steps.push_back(r.record);
  };

  for (int sweep = 0; sweep < schedule.max_sweeps; ++sweep) {
    const double start = quotient;
    for (int k = 0; k < n; ++k) {
      Point e = Point::unit(n, k);
      if (schedule.randomized) {
        for (int d = 0; d < n; ++d) e[d] = gauss(rng);
        e = (1.0 / e.norm()) * e;
      }
      apply(HalfSpace(e, hemispace_offset(f, kp, e)));
    }
    const Point c = power_centroid(f, kp);
    const double r0 = hemiball_radius(f, kp, c);
    std::vector<Point> centres{c};
    if (schedule.randomized) {
      for (int j = 0; j < 2 * n; ++j) {
        Point x = c;
        for (int d = 0; d < n; ++d) x[d] += r0 * unif(rng);
        centres.push_back(x);
      }
    } else {
      for (double s : {0.25, 0.5, 1.0, 2.0})
        for (int k = 0; k < n; ++k)
          for (double sign : {1.0, -1.0}) centres.push_back(c + (sign * s * r0) * Point::unit(n, k));
    }
    for (const Point& a : centres) apply(Ball(a, hemiball_radius(f, kp, a)));
    trace.sweeps = sweep + 1;
    if (quotient - start < schedule.tol_stop * start) {
      trace.converged = true;
      break;
    }
  }
  trace.final_field = f;
  trace.final_fit = fit_extremizer(f, kp);
  return trace;
}

void write_trace_csv(std::ostream& os, const SymmetrizationTrace& trace) {
  os << std::setprecision(17);
  os << "step,region_kind";
  const int n = trace.final_field.dim();
  for (int d = 0; d < n; ++d) os << ",center_" << d;
  os << ",radius_or_offset,quotient_before,quotient_after,choice\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    os << i << ',';
    if (const auto* b = std::get_if<Ball>(&s.region)) {
      os << "ball";
      for (int d = 0; d < n; ++d) os << ',' << b->center[d];
      os << ',' << b->radius;
    } else {
      const auto& h = std::get<HalfSpace>(s.region);
      os << "halfspace";
      for (int d = 0; d < n; ++d) os << ',' << h.normal[d];
      os << ',' << h.offset;
    }
    os << ',' << s.quotient_before << ',' << s.quotient_after << ',' << to_string(s.choice) << '\n';
  }
}

}  // namespace hls
