#pragma once

#include <string>
#include <vector>

#include "hls/field.hpp"

namespace hls {

enum class Quadrature { direct, radial, fourier };
std::string to_string(Quadrature q);

struct EnergyResult {
  double value = 0.0;
  Quadrature quadrature = Quadrature::direct;
  double est_error = 0.0;
};

/// I_lambda[f, g] for the piecewise-constant functions carried by the grid
/// samples. Each cell pair is integrated exactly against |x - y|^{-lambda};
/// est_error compares with the same evaluation on the 2h-coarsened fields.
EnergyResult energy_direct(const Field& f, const Field& g, const KernelParams& kp);

/// Only the value of energy_direct (no coarse comparison).
double energy_value(const Field& f, const Field& g, const KernelParams& kp);

/// 2^N block averages onto a grid of spacing 2h; odd extents are zero padded.
Field coarsen(const Field& f);

double sharp_constant(const KernelParams& kp);

double rayleigh_quotient(const Field& f, const KernelParams& kp);

/// Quotient with an error estimate from the 2h-coarsened field.
EnergyResult rayleigh_estimate(const Field& f, const KernelParams& kp);

/// A radial function sampled at cell midpoints r_i = (i + 1/2) dr.
struct RadialProfile {
  int dim = 1;
  double dr = 1.0;
  std::vector<double> values;
};

/// Samples f along the ray in direction e_0 from the origin of a radial field.
RadialProfile radial_profile_of(const Field& f, double dr, int count);

/// I_lambda through the exact spherical average of the kernel (N = 1 or 3).
EnergyResult energy_radial(const RadialProfile& f, const RadialProfile& g, const KernelParams& kp);

struct FourierCalibration {
  double a_const = 1.0;
  double calib_residual = 0.0;
};

/// Fourier-side form sum over frequency cells of |xi|^{lambda - N} Re(f^ conj g^)
/// without a prefactor (unitary transform, zero padded by 4 per axis).
double fourier_form(const Field& f, const Field& g, const KernelParams& kp);

/// Calibrates the Fourier prefactor on a Gaussian probe and checks it on a
/// Gaussian twice as wide.
FourierCalibration calibrate_fourier(const KernelParams& kp, const Field& probe);

EnergyResult energy_fourier(const Field& f, const Field& g, const KernelParams& kp,
                            const FourierCalibration& calib);

/// Coefficient of variation of (potential of f) / f^{p-1} over the central
/// half of the grid.
double el_residual(const Field& f, const KernelParams& kp);

}  // namespace hls
