#pragma once

#include <optional>
#include <vector>

#include "hls/energy.hpp"
#include "hls/field.hpp"

namespace hls {

struct PositivityReport {
  double defect = 0.0;        ///< (I[f^i] + I[f^o]) / 2 - I[f]
  double defect_via_g = 0.0;  ///< I[Theta g, g] with g = (f - Theta f) restricted to the region
  double est_error = 0.0;     ///< estimate for defect (spacing h against 2h)
  double via_g_est = 0.0;     ///< estimate for defect_via_g
  std::optional<double> oracle_value;  ///< representation formula (N = 1 half-spaces)
  bool strict_flag = false;            ///< f = Theta f within tolerance
  double asymmetry = 0.0;              ///< ||f - Theta f||_p / ||f||_p
};

/// Symmetry tolerance on ||f - Theta f||_p / ||f||_p behind strict_flag.
inline constexpr double kInvariantTolerance = 1e-3;

PositivityReport positivity_defect(const Region& region, const Field& f, const KernelParams& kp);

/// I_lambda[Tf] for a lifted conformal map with an error estimate that
/// repeats the whole pipeline (map + energy) on the 2h-coarsened field.
EnergyResult transformed_energy(const Region& region, const Field& f, const KernelParams& kp);
EnergyResult cayley_energy(const Field& f, const KernelParams& kp);

/// Laplace-side kernel of the half-space representation:
///   lambda = N - 2:  pi exp(-t xi) / xi
///   lambda > N - 2:  2 sin(pi mu / 2) int_xi^inf exp(-tau t) (tau^2 - xi^2)^{-mu/2} dtau,  mu = N - lambda.
double kernel_k(const KernelParams& kp, double xi_perp, double t);

/// Prefactor turning the Laplace-side form into I_lambda[Theta_H f, f].
double representation_constant(const KernelParams& kp);

struct RepresentationResult {
  double value = 0.0;
  double est_error = 0.0;
};

/// Evaluates I_lambda[Theta_H f, f] for f supported in {x_N >= 0} through
/// the Laplace-transform representation. For N >= 2 the field must factor
/// as u(x') v(x_N).
RepresentationResult halfspace_representation(const Field& f, const KernelParams& kp);

/// Same for a piecewise-constant function on the half-line given by cells
/// [lo_i, hi_i] (lo_i >= 0) and values.
double halfline_representation(const std::vector<double>& lo, const std::vector<double>& hi,
                               const std::vector<double>& values, double lambda);

struct NewtonExample {
  Field f;
  double overlap = 0.0;        ///< I[Theta_H f, f]
  double overlap_est = 0.0;
  double self_energy = 0.0;    ///< I[f, f]
  double self_est = 0.0;
  double total_mass = 0.0;     ///< integral of f
  HalfSpace plane;             ///< {x_3 > 0}
};

/// Zero-mass radial difference of normalised balls of radii 1/2 and 1 about
/// (0, 0, 2) for N = 3, lambda = 1.
NewtonExample newton_zero_overlap(const KernelParams& kp);

struct DefectWitness {
  Field f;
  double defect = 0.0;
  double est_error = 0.0;
  double height_a = 0.0, height_b = 0.0;
  double width_a = 0.0, width_b = 0.0;
  double amplitude_b = 0.0;  // f = bump_a - amplitude_b * bump_b
};

struct CounterexampleSearch {
  std::optional<DefectWitness> negative;
  std::optional<DefectWitness> positive;
  int candidates = 0;
};

/// Grid search over zero-mass pairs of Gaussian bumps on the x_3 axis above
/// {x_3 = 0} (N = 3, lambda <= 1). Witnesses must clear 3 est_error.
CounterexampleSearch search_defect_witnesses(const KernelParams& kp);

/// As above, but throws NumericalFailure when no negative witness exists.
CounterexampleSearch find_negative_defect(const KernelParams& kp);

}  // namespace hls
