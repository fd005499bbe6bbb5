#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hls/coverage.hpp"
#include "hls/energy.hpp"
#include "hls/field.hpp"

namespace hls {

/// Integral of |f|^p over the part of R^N inside the region (see CellMass).
double region_power_mass(const Field& f, const KernelParams& kp, const Region& region);
/// Integral of |f|^p over R^N (grid plus one-dimensional tail).
double total_power_mass(const Field& f, const KernelParams& kp);

/// Radius r with half of the |f|^p mass in B_r(a).
double hemiball_radius(const Field& f, const KernelParams& kp, const Point& a);
/// Offset t with half of the |f|^p mass in {x.e > t}; e must be a unit vector.
double hemispace_offset(const Field& f, const KernelParams& kp, const Point& e);

/// |f|^p-weighted mean of the grid sample points.
Point power_centroid(const Field& f, const KernelParams& kp);

enum class Choice { inner, outer, none };
std::string to_string(Choice c);

struct StepRecord {
  Region region;
  double quotient_before = 0.0;
  double quotient_after = 0.0;
  double est_error = 0.0;  ///< largest quotient estimate among f and its two splices
  double gain_est = 0.0;   ///< |gain at h - gain of the same splice at 2h|
  Choice choice = Choice::none;
};

struct StepResult {
  Field f;
  StepRecord record;
};

/// Splices f with its lifted image across the region and keeps the half with
/// the larger Rayleigh quotient. A gain below min_gain (relative) or below its
/// own discretization estimate keeps f.
StepResult symmetrization_step(const Field& f, const KernelParams& kp, const Region& region,
                               double min_gain = 1e-12);

struct Schedule {
  int max_sweeps = 50;
  double tol_stop = 1e-5;     ///< relative quotient gain over a sweep
  double min_gain = 1e-12;    ///< relative gain below which a step keeps f
  bool randomized = false;    ///< random centres and directions instead of axes
  std::uint64_t seed = 0;
};

struct ExtremizerFit {
  double alpha = 0.0;
  double beta = 0.0;
  Point center;
  double rel_error = 0.0;  ///< ||f - fit||_p / ||f||_p on the grid
};

/// Nonlinear least squares over (alpha, beta, y), started from the coordinate
/// medians of |f|^p and its half-mass radius.
ExtremizerFit fit_extremizer(const Field& f, const KernelParams& kp);

struct SymmetrizationTrace {
  std::vector<StepRecord> steps;
  int sweeps = 0;
  bool converged = false;
  Field final_field;
  ExtremizerFit final_fit;

  int effective_steps() const;
};

SymmetrizationTrace run_symmetrization(const Field& f0, const KernelParams& kp, const Schedule& schedule = {});

/// step,region_kind,center...,radius_or_offset,quotient_before,quotient_after,choice
void write_trace_csv(std::ostream& os, const SymmetrizationTrace& trace);

}  // namespace hls
