#include "run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hls/energy.hpp"
#include "hls/errors.hpp"
#include "hls/lizhu.hpp"
#include "hls/log.hpp"
#include "hls/parallel.hpp"
#include "hls/positivity.hpp"
#include "hls/symmetrize.hpp"

namespace hls::cli {

namespace {

using Cells = std::vector<std::string>;

std::string num(double x) { return format_number(x); }
std::string num(int x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "true" : "false"; }

void progress(const std::string& what) {
  if (verbose()) std::cerr << "hlsinv: " << what << '\n';
}

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

Report run_energy(const RunConfig& cfg) {
  const Field f = make_function(cfg);
  const KernelParams& kp = cfg.kernel;
  Report rep{Table({"name", "value", "quadrature", "est_error"}), {}, {}};
  progress("energy_direct");
  const EnergyResult e = energy_direct(f, f, kp);
  rep.table.add({"energy", num(e.value), to_string(e.quadrature), num(e.est_error)});
  const EnergyResult q = rayleigh_estimate(f, kp);
  const std::size_t rq = rep.table.add({"rayleigh_quotient", num(q.value), to_string(q.quadrature), num(q.est_error)});
  const double c = sharp_constant(kp);
  const std::size_t sc = rep.table.add({"sharp_constant", num(c), "closed_form", num(0.0)});
  const bool below = q.value <= c + q.est_error + 1e-12 * c;
  rep.verdict("rayleigh_quotient_below_sharp_constant", below, rq, {"value", "est_error"});
  rep.verdicts.back().quoted.emplace_back("sharp_constant", rep.table.at(sc, "value"));
  return rep;
}

Report run_transform(const RunConfig& cfg, const std::filesystem::path& out) {
  const Field f = make_function(cfg);
  const KernelParams& kp = cfg.kernel;
  Report rep{Table({"name", "value", "quadrature", "est_error"}), {}, {}};
  const EnergyResult e = energy_direct(f, f, kp);
  rep.table.add({"energy_f", num(e.value), to_string(e.quadrature), num(e.est_error)});
  const bool cayley = cfg.region->kind == "cayley";
  progress(cayley ? "cayley transform" : "region transform");
  const EnergyResult t = cayley ? cayley_energy(f, kp) : transformed_energy(make_region(cfg), f, kp);
  rep.table.add({"energy_transformed", num(t.value), to_string(t.quadrature), num(t.est_error)});
  const double combined = e.est_error + t.est_error;
  const std::size_t r2 = rep.table.add({"difference", num(t.value - e.value), "derived", num(combined)});
  rep.verdict("conformal_invariance", std::abs(t.value - e.value) <= combined, r2, {"value", "est_error"});
  const Field tf = cayley ? apply_cayley(f, kp) : apply_region_map(make_region(cfg), f, kp);
  // the map preserves the L^p mass, so a deficit on the grid is mass sent past the boundary
  double mass_f = 0.0, mass_tf = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mass_f += std::pow(std::abs(f[i]), kp.p());
    mass_tf += std::pow(std::abs(tf[i]), kp.p());
  }
  const double retained = mass_f > 0.0 ? mass_tf / mass_f : 1.0;
  rep.table.add({"power_mass_retained", num(retained), "derived", ""});
  if (retained < 0.99) rep.notes.push_back("part of the transformed mass lies outside the grid, widen it or move the region");
  save_field_csv((out / "transformed_field.csv").string(), tf);
  return rep;
}

Report run_positivity(const RunConfig& cfg) {
  const Field f = make_function(cfg);
  const KernelParams& kp = cfg.kernel;
  progress("positivity_defect");
  const PositivityReport p = positivity_defect(make_region(cfg), f, kp);
  Report rep{Table({"defect", "defect_via_g", "oracle_value", "strict_flag", "est_error", "via_g_est", "asymmetry",
                    "positivity_valid", "nonnegativity_bound", "strictness_bound"}),
             {},
             {}};
  const double lower = -cfg.tol.defect_sigma * p.est_error;
  const double strict_bound = cfg.tol.strict_factor * p.est_error;
  const std::size_t r = rep.table.add({num(p.defect), num(p.defect_via_g), p.oracle_value ? num(*p.oracle_value) : "",
                                       flag(p.strict_flag), num(p.est_error), num(p.via_g_est), num(p.asymmetry),
                                       flag(kp.positivity_valid()), num(lower), num(strict_bound)});
  if (kp.positivity_valid()) {
    rep.verdict("nonnegativity", p.defect >= lower, r, {"defect", "nonnegativity_bound"});
    if (kp.strict() && p.asymmetry > 0.1)
      rep.verdict("strictness", p.defect > strict_bound, r, {"defect", "strictness_bound", "asymmetry"});
  } else {
    rep.notes.push_back("lambda below N-2: the defect may take either sign, nonnegativity verdict suppressed");
  }
  return rep;
}

Report run_represent(const RunConfig& cfg) {
  const Field f = make_function(cfg);
  const KernelParams& kp = cfg.kernel;
  const int n = kp.dim;
  progress("halfspace_representation");
  const RepresentationResult r = halfspace_representation(f, kp);
  const Field tf = apply_reflection(HalfSpace(Point::unit(n, n - 1), 0.0), f);
  const EnergyResult d = energy_direct(tf, f, kp);
  Report rep{Table({"value", "est_error", "direct", "direct_est", "combined_est"}), {}, {}};
  const double combined = r.est_error + d.est_error;
  const std::size_t row = rep.table.add({num(r.value), num(r.est_error), num(d.value), num(d.est_error), num(combined)});
  rep.verdict("representation_matches_direct", std::abs(r.value - d.value) <= combined, row,
              {"value", "direct", "combined_est"});
  return rep;
}

Report run_symmetrize(const RunConfig& cfg, const std::filesystem::path& out) {
  const Field f0 = make_function(cfg);
  const KernelParams& kp = cfg.kernel;
  progress("run_symmetrization");
  const SymmetrizationTrace tr = run_symmetrization(f0, kp, cfg.schedule);
  {
    std::ofstream os(out / "trace.csv");
    write_trace_csv(os, tr);
  }
  save_field_csv((out / "final_field.csv").string(), tr.final_field);

  const int n = kp.dim;
  Cells header{"step", "region_kind"};
  for (int d = 0; d < n; ++d) header.push_back("center_" + std::to_string(d));
  for (const char* c : {"radius_or_offset", "quotient_before", "quotient_after", "choice", "est_error", "drop_bound",
                        "fit_error", "fit_tolerance"})
    header.push_back(c);
  Report rep{Table(header), {}, {}};
  std::size_t worst = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const StepRecord& s = tr.steps[i];
    Cells row{num(static_cast<int>(i))};
    if (const auto* b = std::get_if<Ball>(&s.region)) {
      row.push_back("ball");
      for (int d = 0; d < n; ++d) row.push_back(num(b->center[d]));
      row.push_back(num(b->radius));
    } else {
      const auto& h = std::get<HalfSpace>(s.region);
      row.push_back("halfspace");
      for (int d = 0; d < n; ++d) row.push_back(num(h.normal[d]));
      row.push_back(num(h.offset));
    }
    const double bound = cfg.tol.quotient_slack * s.est_error;
    const bool last = i + 1 == tr.steps.size();
    for (const std::string& c :
         {num(s.quotient_before), num(s.quotient_after), to_string(s.choice), num(s.est_error), num(bound),
          last ? num(tr.final_fit.rel_error) : std::string(), last ? num(cfg.tol.fit_error) : std::string()})
      row.push_back(c);
    rep.table.add(row);
    const double margin = (s.quotient_before - s.quotient_after) - bound;
    if (margin > worst_margin) worst_margin = margin, worst = i;
  }
  rep.verdict("quotient_monotone", worst_margin <= 0.0, worst, {"quotient_before", "quotient_after", "drop_bound"});
  rep.verdict("extremizer_fit", tr.final_fit.rel_error < cfg.tol.fit_error, tr.steps.size() - 1,
              {"fit_error", "fit_tolerance"});
  rep.notes.push_back(tr.converged ? "schedule converged" : "schedule stopped at max_sweeps");
  return rep;
}

Report run_hemiball(const RunConfig& cfg) {
  const Measure m = Measure::density(make_function(cfg));
  const int n = cfg.kernel.dim;
  progress("hemiball");
  const HemiBallResult hb = cfg.hemiball.center.empty()
                                ? hemiball_on_ray(m, to_point(cfg.hemiball.direction) *
                                                         (1.0 / to_point(cfg.hemiball.direction).norm()),
                                                  cfg.hemiball.u)
                                : hemiball_centered(m, to_point(cfg.hemiball.center));
  Cells header;
  for (int d = 0; d < n; ++d) header.push_back("center_" + std::to_string(d));
  for (const char* c : {"radius", "mass_imbalance", "total_mass", "tolerance"}) header.push_back(c);
  Report rep{Table(header), {}, {}};
  Cells row;
  for (int d = 0; d < n; ++d) row.push_back(num(hb.center[d]));
  const double tol = cfg.tol.hemiball * m.total_mass();
  for (double x : {hb.radius, hb.mass_imbalance, m.total_mass(), tol}) row.push_back(num(x));
  const std::size_t r = rep.table.add(row);
  rep.verdict("half_mass", std::abs(hb.mass_imbalance) <= tol, r, {"radius", "mass_imbalance", "tolerance"});
  return rep;
}

Report run_lizhu(const RunConfig& cfg) {
  const Field v = make_function(cfg);
  const int n = cfg.kernel.dim;
  Report rep{Table({"check", "measured", "tolerance", "pass"}), {}, {}};
  auto check = [&](const std::string& name, double measured, double tol, bool pass) {
    const std::size_t r = rep.table.add({name, num(measured), num(tol), flag(pass)});
    rep.verdict(name, pass, r, {"measured", "tolerance"});
  };

  progress("fit_invariant_density");
  const InvariantFit fit = fit_invariant_density(v);
  rep.table.add({"fit_alpha", num(fit.alpha), "", ""});
  rep.table.add({"fit_beta", num(fit.beta), "", ""});
  for (int d = 0; d < n; ++d) rep.table.add({"fit_center_" + std::to_string(d), num(fit.center[d]), "", ""});
  check("invariant_fit", fit.fit_error, cfg.tol.invariant_fit, fit.fit_error <= cfg.tol.invariant_fit);
  check("mass_divergence", fit.mass_divergent ? 1.0 : 0.0, 0.0, !fit.mass_divergent);

  const double r0 = std::sqrt(fit.beta);
  const Ball ball = cfg.region && cfg.region->kind == "ball" ? std::get<Ball>(make_region(cfg)) : Ball(fit.center, r0);
  progress("check_pointwise_invariance");
  const double dev = check_pointwise_invariance(v, ball);
  check("pointwise_invariance", dev, cfg.tol.invariance, dev <= cfg.tol.invariance);

  std::vector<Point> centers;
  for (const auto& c : cfg.lizhu.centers) centers.push_back(to_point(c));
  if (centers.empty())
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) centers.push_back(fit.center + (s * r0) * Point::unit(n, 0));
  progress("check_mass_identity");
  const double cv = check_mass_identity(v, centers);
  check("mass_identity", cv, cfg.tol.mass_identity, cv <= cfg.tol.mass_identity);

  std::vector<Point> probes;
  for (const auto& p : cfg.lizhu.probes) probes.push_back(to_point(p));
  if (probes.empty())
    for (double s : {0.5, 1.0}) probes.push_back((s * r0) * Point::unit(n, 0));
  for (std::size_t k = 0; k < probes.size(); ++k) {
    progress("check_radial_derivative");
    const RadialDerivative rd = check_radial_derivative(v, probes[k]);
    check("radial_derivative_" + std::to_string(k), std::abs(rd.lhs - rd.rhs), rd.tol, rd.agrees());
  }

  const Point origin = cfg.lizhu.origin.empty() ? fit.center : to_point(cfg.lizhu.origin);
  progress("check_radial_decreasing");
  const RadialReport rr = check_radial_decreasing(Measure::density(v), origin);
  check("radial_symmetry", rr.radial_violation, rr.tolerance, rr.radial());
  check("radial_decreasing", rr.monotone_violation, rr.tolerance, rr.decreasing());
  return rep;
}

Report run_counterexample(const RunConfig& cfg, const std::filesystem::path& out) {
  const KernelParams& kp = cfg.kernel;
  if (cfg.example == "newton") {
    progress("newton_zero_overlap");
    const NewtonExample ex = newton_zero_overlap(kp);
    Report rep{Table({"quantity", "value", "est_error", "bound"}), {}, {}};
    const std::size_t r0 = rep.table.add({"overlap", num(ex.overlap), num(ex.overlap_est), num(ex.overlap_est)});
    const std::size_t r1 =
        rep.table.add({"self_energy", num(ex.self_energy), num(ex.self_est), num(100.0 * ex.overlap_est)});
    rep.table.add({"total_mass", num(ex.total_mass), "", ""});
    rep.verdict("zero_overlap", std::abs(ex.overlap) <= ex.overlap_est, r0, {"value", "bound"});
    rep.verdict("nonzero_self_energy", ex.self_energy > 100.0 * ex.overlap_est, r1, {"value", "bound"});
    save_field_csv((out / "newton_field.csv").string(), ex.f);
    return rep;
  }
  progress("find_negative_defect");
  const CounterexampleSearch s = find_negative_defect(kp);
  Report rep{Table({"kind", "defect", "est_error", "threshold", "height_a", "height_b", "width_a", "width_b",
                    "amplitude_b"}),
             {},
             {}};
  auto add = [&](const std::string& kind, const DefectWitness& w) {
    return rep.table.add({kind, num(w.defect), num(w.est_error), num(3.0 * w.est_error), num(w.height_a),
                          num(w.height_b), num(w.width_a), num(w.width_b), num(w.amplitude_b)});
  };
  const std::size_t rn = add("negative", *s.negative);
  rep.verdict("negative_witness", s.negative->defect < -3.0 * s.negative->est_error, rn, {"defect", "threshold"});
  save_field_csv((out / "witness_negative.csv").string(), s.negative->f);
  if (s.positive) {
    const std::size_t rp = add("positive", *s.positive);
    rep.verdict("positive_witness", s.positive->defect > 3.0 * s.positive->est_error, rp, {"defect", "threshold"});
    save_field_csv((out / "witness_positive.csv").string(), s.positive->f);
  } else {
    rep.notes.push_back("no positive witness found");
    rep.verdicts.push_back({"positive_witness", false, {}});
  }
  return rep;
}

Report run_sharp_constant(const RunConfig& cfg) {
  Report rep{Table({"name", "value"}), {}, {}};
  const double c = sharp_constant(cfg.kernel);
  const std::size_t r = rep.table.add({"sharp_constant", num(c)});
  rep.verdict("finite_positive", std::isfinite(c) && c > 0.0, r, {"value"});
  return rep;
}

}  // namespace

Report run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  switch (cfg.command) {
    case Command::energy: return run_energy(cfg);
    case Command::transform: return run_transform(cfg, out_dir);
    case Command::positivity: return run_positivity(cfg);
    case Command::represent: return run_represent(cfg);
    case Command::symmetrize: return run_symmetrize(cfg, out_dir);
    case Command::hemiball: return run_hemiball(cfg);
    case Command::lizhu_check: return run_lizhu(cfg);
    case Command::counterexample: return run_counterexample(cfg, out_dir);
    case Command::sharp_constant: return run_sharp_constant(cfg);
  }
  throw ConfigError("unhandled command");
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Numerical checks for the sharp Hardy-Littlewood-Sobolev inequality", "hlsinv"};
  std::string config_path, out_dir = ".";
  int threads = 1;
  bool verbose_flag = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "directory for report.csv, summary.txt and field files");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--verbose", verbose_flag, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  set_verbose(verbose_flag);
  set_num_threads(threads);
  try {
    const RunConfig cfg = load_config(config_path);
    const Report rep = run(cfg, out_dir);
    rep.write(out_dir, to_string(cfg.command));
    if (verbose_flag) std::cerr << rep.summary(to_string(cfg.command));
    return rep.all_pass() ? kPass : kFail;
  } catch (const NumericalFailure& e) {
    std::cerr << "hlsinv: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "hlsinv: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "hlsinv: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "hlsinv: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace hls::cli
