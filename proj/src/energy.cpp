#include "hls/energy.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include "hls/errors.hpp"
#include "hls/kernel_table.hpp"
#include "hls/parallel.hpp"
#include "hls/quadrature.hpp"

namespace hls {

std::string to_string(Quadrature q) {
  switch (q) {
    case Quadrature::direct: return "direct";
    case Quadrature::radial: return "radial";
    case Quadrature::fourier: return "fourier";
  }
  return "unknown";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_pair(const Field& f, const Field& g, const KernelParams& kp) {
  if (!f.grid().same_as(g.grid())) throw GridMismatch("energy arguments live on different grids");
  if (f.dim() != kp.dim) throw InvalidArgument("field dimension does not match kernel dimension");
}

struct RawEnergy {
  double value = 0.0;
  double rounding = 0.0;
};

// Pair counts above this go through the FFT product; below it the direct
// loop is cheaper and sparse inputs stay exact to the last bit.
constexpr double kFftPairs = 3.0e7;

std::mutex g_fftw_mutex;

// Block-Toeplitz product (W g)_i = sum_j W(|a_i - b_j|) g_j through a circulant
// embedding of twice the extent per axis.
class ToeplitzFft {
 public:
  ToeplitzFft(const OffsetTable& table, const Grid& grid) : dim_(grid.dim), ext_(grid.extent) {
    for (int d = 0; d < dim_; ++d) pad_[d] = 2 * ext_[d];
    last_ = pad_[dim_ - 1] / 2 + 1;
    for (int d = 0; d < dim_; ++d) {
      real_ *= static_cast<std::size_t>(pad_[d]);
      cplx_ *= static_cast<std::size_t>(d == dim_ - 1 ? last_ : pad_[d]);
    }
    std::vector<double> c(real_, 0.0);
    std::array<int, 3> q{0, 0, 0};
    for (std::size_t i = 0; i < real_; ++i) {
      std::size_t rest = i;
      for (int d = dim_ - 1; d >= 0; --d) {
        q[d] = static_cast<int>(rest % pad_[d]);
        rest /= pad_[d];
      }
      std::array<int, 3> k{0, 0, 0};
      bool used = true;
      for (int d = 0; d < dim_; ++d) {
        k[d] = q[d] < ext_[d] ? q[d] : pad_[d] - q[d];
        if (q[d] == ext_[d]) used = false;
      }
      if (!used) continue;
      c[i] = table.at(k[0], k[1], k[2]);
      l1_ += c[i];
    }
    kernel_ = forward(c);
  }

  std::vector<double> apply(const Field& g) const {
    std::vector<double> x(real_, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) x[padded_index(g.grid().index(i))] = g[i];
    std::vector<std::complex<double>> y = forward(x);
    for (std::size_t i = 0; i < cplx_; ++i) y[i] *= kernel_[i];
    const std::vector<double> conv = inverse(y);
    std::vector<double> out(g.size());
    const double inv = 1.0 / static_cast<double>(real_);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = conv[padded_index(g.grid().index(i))] * inv;
    return out;
  }

  double kernel_l1() const { return l1_; }
  double log2_size() const { return std::log2(static_cast<double>(real_)); }

 private:
  std::size_t padded_index(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim_; ++d) flat = flat * pad_[d] + idx[d];
    return flat;
  }

  std::vector<std::complex<double>> forward(const std::vector<double>& x) const {
    double* in = fftw_alloc_real(real_);
    fftw_complex* out = fftw_alloc_complex(cplx_);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(g_fftw_mutex);
      plan = fftw_plan_dft_r2c(dim_, pad_.data(), in, out, FFTW_ESTIMATE);
    }
    std::copy(x.begin(), x.end(), in);
    fftw_execute(plan);
    std::vector<std::complex<double>> y(cplx_);
    for (std::size_t i = 0; i < cplx_; ++i) y[i] = {out[i][0], out[i][1]};
    {
      std::lock_guard<std::mutex> lock(g_fftw_mutex);
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return y;
  }

  std::vector<double> inverse(const std::vector<std::complex<double>>& y) const {
    fftw_complex* in = fftw_alloc_complex(cplx_);
    double* out = fftw_alloc_real(real_);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(g_fftw_mutex);
      plan = fftw_plan_dft_c2r(dim_, pad_.data(), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < cplx_; ++i) {
      in[i][0] = y[i].real();
      in[i][1] = y[i].imag();
    }
    fftw_execute(plan);
    std::vector<double> x(out, out + real_);
    {
      std::lock_guard<std::mutex> lock(g_fftw_mutex);
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return x;
  }

  int dim_;
  std::array<int, 3> ext_;
  std::array<int, 3> pad_{1, 1, 1};
  int last_ = 1;
  std::size_t real_ = 1, cplx_ = 1;
  double l1_ = 0.0;
  std::vector<std::complex<double>> kernel_;
};

double l2(const Field& f) {
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
  return std::sqrt(pairwise_sum(sq));
}

double dot(const Field& f, const std::vector<double>& w) {
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = f[i] * w[i];
  return pairwise_sum(t);
}

// Averages f.(W g) and g.(W f) so that swapping the arguments gives the same bits.
RawEnergy galerkin_fft(const Field& f, const Field& g, const OffsetTable& table, double scale) {
  const ToeplitzFft op(table, f.grid());
  const double a = dot(f, op.apply(g));
  const bool same = std::equal(f.values().begin(), f.values().end(), g.values().begin());
  const double b = same ? a : dot(g, op.apply(f));
  RawEnergy r;
  r.value = 0.5 * (a + b) * scale;
  // norm-wise bound for a convolution through forward and inverse transforms
  r.rounding = 16.0 * (op.log2_size() + 1.0) * kEps * op.kernel_l1() * l2(f) * l2(g) * scale;
  return r;
}

RawEnergy galerkin(const Field& f, const Field& g, const KernelParams& kp) {
  const Grid& grid = f.grid();
  const auto ext = grid.extent;
  const OffsetTable table = pair_weight_table(kp.dim, kp.lambda, ext);
  const std::size_t m = grid.size();
  const double scale = std::pow(grid.spacing, 2.0 * kp.dim - kp.lambda);

  std::vector<std::size_t> nz;
  for (std::size_t j = 0; j < m; ++j)
    if (g[j] != 0.0) nz.push_back(j);
  std::size_t nz_f = 0;
  for (std::size_t i = 0; i < m; ++i) nz_f += f[i] != 0.0;
  if (static_cast<double>(nz_f) * static_cast<double>(nz.size()) > kFftPairs) return galerkin_fft(f, g, table, scale);

  std::vector<std::array<int, 3>> nz_idx(nz.size());
  for (std::size_t q = 0; q < nz.size(); ++q) nz_idx[q] = grid.index(nz[q]);

  std::vector<double> rows(m, 0.0), abs_rows(m, 0.0);
  parallel_for(m, [&](std::size_t i) {
    const double fi = f[i];
    if (fi == 0.0) return;
    const auto a = grid.index(i);
    double s = 0.0, sa = 0.0;
    for (std::size_t q = 0; q < nz.size(); ++q) {
      const auto& b = nz_idx[q];
      const double w = table.at(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2]));
      const double gj = g[nz[q]];
      s += gj * w;
      sa += std::abs(gj) * w;
    }
    rows[i] = fi * s;
    abs_rows[i] = std::abs(fi) * sa;
  });
  RawEnergy r;
  r.value = pairwise_sum(rows) * scale;
  r.rounding = (static_cast<double>(nz.size()) + std::log2(static_cast<double>(m) + 1.0) + 4.0) * kEps *
               pairwise_sum(abs_rows) * scale;
  return r;
}

}  // namespace

double energy_value(const Field& f, const Field& g, const KernelParams& kp) {
  require_pair(f, g, kp);
  return galerkin(f, g, kp).value;
}

Field coarsen(const Field& f) {
  const Grid& g = f.grid();
  std::array<int, 3> ext{1, 1, 1};
  for (int d = 0; d < g.dim; ++d) ext[d] = (g.extent[d] + 1) / 2;
  Grid coarse(g.origin, 2.0 * g.spacing, ext);
  std::vector<double> v(coarse.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(1 << g.dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.index(i);
    for (int d = 0; d < g.dim; ++d) idx[d] /= 2;
    v[coarse.flat(idx)] += f[i] * inv;
  }
  return Field(coarse, std::move(v));
}

EnergyResult energy_direct(const Field& f, const Field& g, const KernelParams& kp) {
  require_pair(f, g, kp);
  const RawEnergy fine = galerkin(f, g, kp);
  const RawEnergy coarse = galerkin(coarsen(f), coarsen(g), kp);
  return {fine.value, Quadrature::direct, std::abs(fine.value - coarse.value) + fine.rounding + coarse.rounding};
}

double sharp_constant(const KernelParams& kp) {
  const double n = kp.dim, l = kp.lambda;
  const double log_c = 0.5 * l * std::log(std::numbers::pi) + std::lgamma(0.5 * (n - l)) - std::lgamma(n - 0.5 * l) +
                       (1.0 - l / n) * (std::lgamma(n) - std::lgamma(0.5 * n));
  return std::exp(log_c);
}

double rayleigh_quotient(const Field& f, const KernelParams& kp) {
  const double norm = lp_norm(f, kp.p());
  if (!(norm > 0.0)) throw InvalidArgument("Rayleigh quotient of the zero field");
  return energy_value(f, f, kp) / (norm * norm);
}

EnergyResult rayleigh_estimate(const Field& f, const KernelParams& kp) {
  const double norm = lp_norm(f, kp.p());
  if (!(norm > 0.0)) throw InvalidArgument("Rayleigh quotient of the zero field");
  const RawEnergy fine = galerkin(f, f, kp);
  const Field c = coarsen(f);
  const double cnorm = lp_norm(c, kp.p());
  const RawEnergy coarse = galerkin(c, c, kp);
  const double q = fine.value / (norm * norm);
  const double qc = cnorm > 0.0 ? coarse.value / (cnorm * cnorm) : 0.0;
  return {q, Quadrature::direct, std::abs(q - qc) + fine.rounding / (norm * norm)};
}

// ---------------------------------------------------------------------------
// Radial reduction

RadialProfile radial_profile_of(const Field& f, double dr, int count) {
  RadialProfile r;
  r.dim = f.dim();
  r.dr = dr;
  r.values.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Point x(f.dim());
    x[0] = (i + 0.5) * dr;
    r.values[static_cast<std::size_t>(i)] = f.eval(x);
  }
  return r;
}

namespace {

// Integral over [0, V] of P(w) S(w) for a cubic P given by values at
// w = 0, V/3, 2V/3, V; S(w) = w^a / a, or log w when a = 0.
double cubic_times_singular(const std::array<double, 4>& pv, double V, double a) {
  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  for (int r = 0; r < 4; ++r) {
    const double t = r / 3.0;
    for (int c = 0; c < 4; ++c) A(r, c) = std::pow(t, c);
    b(r) = pv[r];
  }
  const Eigen::Vector4d coef = A.partialPivLu().solve(b);
  double s = 0.0;
  for (int k = 0; k < 4; ++k) {
    double m;
    if (a == 0.0) {
      m = std::log(V) / (k + 1.0) - 1.0 / ((k + 1.0) * (k + 1.0));
    } else {
      m = std::pow(V, a) / (a * (k + a + 1.0));
    }
    s += coef(k) * m;
  }
  return V * s;
}

// Cell-pair integral of 8 pi^2 r s [R(r + s) - S(|r - s|)] over
// [r0, r0 + d] x [s0, s0 + d]; this is the N = 3 spherical reduction of
// |x - y|^{-lambda}.
double radial_pair_3d(double r0, double s0, double d, double lambda) {
  const double a = 2.0 - lambda;
  const bool log_case = std::abs(a) < 1e-14;
  auto R = [&](double u) { return log_case ? std::log(u) : std::pow(u, a) / a; };
  const GaussRule& g = gauss_legendre(8);
  auto tensor = [&](auto&& fn) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i)
      for (std::size_t j = 0; j < g.x.size(); ++j) {
        const double r = r0 + 0.5 * d * (g.x[i] + 1.0);
        const double t = s0 + 0.5 * d * (g.x[j] + 1.0);
        s += g.w[i] * g.w[j] * fn(r, t);
      }
    return 0.25 * d * d * s;
  };
  const double part_r = tensor([&](double r, double s) { return r * s * R(r + s); });

  double part_s;
  const double D = r0 - s0;
  if (std::abs(D) > 1.5 * d) {
    part_s = tensor([&](double r, double s) { return r * s * R(std::abs(r - s)); });
  } else {
    // (u, v) = (r + s, r - s); integrate u exactly, then v piecewise.
    auto inner = [&](double v) {
      const double lo = std::max(2 * r0 - v, 2 * s0 + v);
      const double hi = std::min(2 * r0 + 2 * d - v, 2 * s0 + 2 * d + v);
      if (hi <= lo) return 0.0;
      auto F = [&](double u) { return (u * u * u / 3.0 - v * v * u) / 4.0; };
      return 0.5 * (F(hi) - F(lo));
    };
    std::vector<double> brk{D - d, D, D + d, 0.0};
    std::sort(brk.begin(), brk.end());
    part_s = 0.0;
    for (std::size_t p = 0; p + 1 < brk.size(); ++p) {
      const double v1 = std::max(brk[p], D - d), v2 = std::min(brk[p + 1], D + d);
      if (v2 <= v1) continue;
      if (v1 >= 0.0 && v1 == 0.0) {
        std::array<double, 4> pv{};
        for (int q = 0; q < 4; ++q) pv[q] = inner(v2 * q / 3.0);
        part_s += cubic_times_singular(pv, v2, log_case ? 0.0 : a);
      } else if (v2 == 0.0) {
        std::array<double, 4> pv{};
        for (int q = 0; q < 4; ++q) pv[q] = inner(v1 * q / 3.0);
        part_s += cubic_times_singular(pv, -v1, log_case ? 0.0 : a);
      } else {
        part_s += integrate_gl([&](double v) { return inner(v) * R(std::abs(v)); }, v1, v2, g);
      }
    }
  }
  return 8.0 * std::numbers::pi * std::numbers::pi * (part_r - part_s);
}

double radial_raw(const RadialProfile& f, const RadialProfile& g, const KernelParams& kp) {
  const std::size_t n = f.values.size();
  std::vector<double> rows(n, 0.0);
  const double d = f.dr;
  if (kp.dim == 1) {
    const double scale = 2.0 * std::pow(d, 2.0 - kp.lambda);
    parallel_for(n, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const int diff = static_cast<int>(i) - static_cast<int>(j);
        s += g.values[j] * (pair_weight(1, kp.lambda, {diff, 0, 0}) +
                            pair_weight(1, kp.lambda, {static_cast<int>(i + j + 1), 0, 0}));
      }
      rows[i] = f.values[i] * s * scale;
    });
  } else {
    parallel_for(n, [&](std::size_t i) {
      if (f.values[i] == 0.0) return;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (g.values[j] == 0.0) continue;
        s += g.values[j] * radial_pair_3d(i * d, j * d, d, kp.lambda);
      }
      rows[i] = f.values[i] * s;
    });
  }
  return pairwise_sum(rows);
}

RadialProfile coarsen_profile(const RadialProfile& f) {
  RadialProfile c;
  c.dim = f.dim;
  c.dr = 2.0 * f.dr;
  c.values.assign((f.values.size() + 1) / 2, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) c.values[i / 2] += 0.5 * f.values[i];
  return c;
}

}  // namespace

EnergyResult energy_radial(const RadialProfile& f, const RadialProfile& g, const KernelParams& kp) {
  if (kp.dim != 1 && kp.dim != 3) throw InvalidArgument("radial energy supports N = 1 and N = 3 only");
  if (f.dim != kp.dim || g.dim != kp.dim) throw InvalidArgument("radial profile dimension mismatch");
  if (f.dr != g.dr || f.values.size() != g.values.size())
    throw GridMismatch("radial profiles use different radial grids");
  if (!(f.dr > 0.0)) throw InvalidArgument("radial spacing must be positive");
  const double fine = radial_raw(f, g, kp);
  const double coarse = radial_raw(coarsen_profile(f), coarsen_profile(g), kp);
  return {fine, Quadrature::radial, std::abs(fine - coarse) + 64 * kEps * std::abs(fine)};
}

// ---------------------------------------------------------------------------
// Fourier side

namespace {

struct Spectrum {
  std::array<int, 3> padded{1, 1, 1};
  std::vector<std::complex<double>> data;  // r2c layout, last axis halved
  int last_len = 1;
};

Spectrum transform(const Field& f) {
  const Grid& g = f.grid();
  const int n = g.dim;
  Spectrum s;
  for (int d = 0; d < n; ++d) s.padded[d] = 4 * g.extent[d];
  s.last_len = s.padded[n - 1] / 2 + 1;
  std::size_t real_size = 1, cplx_size = 1;
  for (int d = 0; d < n; ++d) {
    real_size *= static_cast<std::size_t>(s.padded[d]);
    cplx_size *= static_cast<std::size_t>(d == n - 1 ? s.last_len : s.padded[d]);
  }
  double* in = fftw_alloc_real(real_size);
  fftw_complex* out = fftw_alloc_complex(cplx_size);
  std::fill(in, in + real_size, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.index(i);
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) flat = flat * s.padded[d] + idx[d];
    in[flat] = f[i];
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_dft_r2c(n, s.padded.data(), in, out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  const double norm = std::pow(g.spacing, n) * std::pow(2.0 * std::numbers::pi, -0.5 * n);
  s.data.resize(cplx_size);
  for (std::size_t i = 0; i < cplx_size; ++i) s.data[i] = norm * std::complex<double>(out[i][0], out[i][1]);
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return s;
}

}  // namespace

double fourier_form(const Field& f, const Field& g, const KernelParams& kp) {
  require_pair(f, g, kp);
  const int n = kp.dim;
  const Spectrum F = transform(f);
  const Spectrum G = transform(g);
  std::array<int, 3> half{1, 1, 1};
  for (int d = 0; d < n; ++d) half[d] = F.padded[d] / 2 + 1;
  const OffsetTable box = box_weight_table(n, n - kp.lambda, half);
  std::array<int, 3> shape{1, 1, 1};
  for (int d = 0; d < n; ++d) shape[d] = d == n - 1 ? F.last_len : F.padded[d];
  const double dxi = 2.0 * std::numbers::pi / (F.padded[0] * f.grid().spacing);
  std::vector<double> terms(F.data.size());
  for (std::size_t i = 0; i < F.data.size(); ++i) {
    std::array<int, 3> k{0, 0, 0};
    std::size_t rem = i;
    for (int d = n - 1; d >= 0; --d) {
      k[d] = static_cast<int>(rem % shape[d]);
      rem /= shape[d];
    }
    const int kl = k[n - 1];
    double mult = 2.0;
    if (kl == 0 || (F.padded[n - 1] % 2 == 0 && kl == F.padded[n - 1] / 2)) mult = 1.0;
    for (int d = 0; d < n - 1; ++d) {
      if (k[d] > F.padded[d] / 2) k[d] -= F.padded[d];
      k[d] = std::abs(k[d]);
    }
    const double w = box.at(k[0], k[1], k[2]);
    terms[i] = mult * w * std::real(F.data[i] * std::conj(G.data[i]));
  }
  // Grids share one spacing, but padded lengths may differ per axis; use the
  // per-axis frequency cell via the geometric mean only when they agree.
  for (int d = 1; d < n; ++d) {
    if (F.padded[d] != F.padded[0]) throw InvalidArgument("Fourier evaluation needs equal extents on all axes");
  }
  return pairwise_sum(terms) * std::pow(dxi, kp.lambda);
}

namespace {

struct GaussianShape {
  Point center;
  double sigma = 1.0;
  double peak = 0.0;
};

GaussianShape moments(const Field& f) {
  const Grid& g = f.grid();
  double mass = 0.0, peak = 0.0;
  Point c = Point::zeros(g.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0.0) throw InvalidArgument("Fourier probe must be non-negative");
    mass += f[i];
    peak = std::max(peak, f[i]);
    c += f[i] * g.point(i);
  }
  if (!(mass > 0.0)) throw InvalidArgument("Fourier probe must be non-zero");
  c *= 1.0 / mass;
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) var += f[i] * (g.point(i) - c).norm2();
  var /= mass * g.dim;
  return {c, std::sqrt(var), peak};
}

}  // namespace

FourierCalibration calibrate_fourier(const KernelParams& kp, const Field& probe) {
  const GaussianShape shape = moments(probe);
  const EnergyResult direct = energy_direct(probe, probe, kp);
  if (direct.est_error > 1e-2 * std::abs(direct.value))
    throw NumericalFailure("Fourier probe is under-resolved: energy error estimate too large");
  const double form = fourier_form(probe, probe, kp);
  if (!(form > 0.0)) throw NumericalFailure("Fourier form of the probe is not positive");
  FourierCalibration c;
  c.a_const = direct.value / form;

  const double wide = 2.0 * shape.sigma;
  std::vector<double> v(probe.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = shape.peak * std::exp(-(probe.grid().point(i) - shape.center).norm2() / (2.0 * wide * wide));
  const Field second = probe.with_values(std::move(v));
  const double e2 = energy_value(second, second, kp);
  c.calib_residual = (c.a_const * fourier_form(second, second, kp) - e2) / e2;
  return c;
}

EnergyResult energy_fourier(const Field& f, const Field& g, const KernelParams& kp, const FourierCalibration& calib) {
  const double fine = calib.a_const * fourier_form(f, g, kp);
  const double coarse = calib.a_const * fourier_form(coarsen(f), coarsen(g), kp);
  return {fine, Quadrature::fourier, std::abs(fine - coarse) + std::abs(calib.calib_residual * fine)};
}

// ---------------------------------------------------------------------------

double el_residual(const Field& f, const KernelParams& kp) {
  if (f.dim() != kp.dim) throw InvalidArgument("field dimension does not match kernel dimension");
  const Grid& g = f.grid();
  double vmax = 0.0;
  for (double v : f.values()) {
    if (v < 0.0) throw InvalidArgument("Euler-Lagrange residual needs a non-negative field");
    vmax = std::max(vmax, v);
  }
  if (!(vmax > 0.0)) throw InvalidArgument("Euler-Lagrange residual of the zero field");
  const double pm1 = kp.p() - 1.0;
  const double guard = 1e-12 * std::pow(vmax, pm1);
  const OffsetTable box = box_weight_table(kp.dim, kp.lambda, g.extent);
  const double scale = std::pow(g.spacing, kp.dim - kp.lambda);

  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.index(i);
    bool inside = true;
    for (int d = 0; d < g.dim; ++d) {
      const int n = g.extent[d];
      if (idx[d] < n / 4 || idx[d] >= n - n / 4) inside = false;
    }
    if (inside && std::pow(f[i], pm1) >= guard) interior.push_back(i);
  }
  if (interior.empty()) throw NumericalFailure("no interior samples above the guard level");
  std::vector<double> ratio(interior.size());
  parallel_for(interior.size(), [&](std::size_t q) {
    const auto a = g.index(interior[q]);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (f[j] == 0.0) continue;
      const auto b = g.index(j);
      s += f[j] * box.at(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2]));
    }
    ratio[q] = s * scale / std::pow(f[interior[q]], pm1);
  });
  const double mean = pairwise_sum(ratio) / ratio.size();
  std::vector<double> dev(ratio.size());
  for (std::size_t q = 0; q < ratio.size(); ++q) dev[q] = (ratio[q] - mean) * (ratio[q] - mean);
  return std::sqrt(pairwise_sum(dev) / ratio.size()) / mean;
}

}  // namespace hls
