#include "hls/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "hls/errors.hpp"

namespace hls {

namespace {

template <unsigned N>
GaussRule build_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  GaussRule r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(w[i]);
    } else {
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
    }
  }
  return r;
}

// One axis piece of a cell region: interval [lo, hi] carrying the linear
// weight alpha + beta * w.
struct Piece {
  double lo, hi, alpha, beta;
};

std::vector<Piece> axis_pieces(int k, CubeWeight weight) {
  std::vector<Piece> out;
  if (weight == CubeWeight::box) {
    if (k == 0) {
      out.push_back({-0.5, 0.0, 1.0, 0.0});
      out.push_back({0.0, 0.5, 1.0, 0.0});
    } else {
      out.push_back({k - 0.5, k + 0.5, 1.0, 0.0});
    }
  } else {
    out.push_back({k - 1.0, double(k), 1.0 - k, 1.0});
    out.push_back({double(k), k + 1.0, 1.0 + k, -1.0});
  }
  return out;
}

// Polynomial in s (coefficients by power) times a linear factor a + b s.
void poly_mul_linear(std::array<double, 4>& p, int& deg, double a, double b) {
  std::array<double, 4> q{};
  for (int m = 0; m <= deg; ++m) {
    q[m] += a * p[m];
    q[m + 1] += b * p[m];
  }
  p = q;
  ++deg;
}

// Corner-singular cube [0, L]^N in coordinates y with per-axis weights
// alpha_d + beta_d * y_d. Duffy split into N pyramids y = s * c(v).
double singular_cube(int dim, double mu, double L, const std::array<double, 3>& alpha,
                     const std::array<double, 3>& beta) {
  const GaussRule& g = gauss_legendre(24);
  const int nv = dim - 1;
  const std::size_t q = g.x.size();
  std::size_t total_nodes = 1;
  for (int i = 0; i < nv; ++i) total_nodes *= q;
  double result = 0.0;
  for (int j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (std::size_t node = 0; node < total_nodes; ++node) {
      std::array<double, 3> c{};
      double wprod = 1.0;
      std::size_t rem = node;
      int vi = 0;
      for (int d = 0; d < dim; ++d) {
        if (d == j) {
          c[d] = 1.0;
          continue;
        }
        const std::size_t idx = rem % q;
        rem /= q;
        c[d] = 0.5 * (g.x[idx] + 1.0);
        wprod *= 0.5 * g.w[idx];
        ++vi;
      }
      double c2 = 0.0;
      for (int d = 0; d < dim; ++d) c2 += c[d] * c[d];
      std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
      int deg = 0;
      for (int d = 0; d < dim; ++d) poly_mul_linear(poly, deg, alpha[d], beta[d] * c[d]);
      double radial = 0.0;
      for (int m = 0; m <= deg; ++m) {
        const double e = dim - mu + m;
        radial += poly[m] * std::pow(L, e) / e;
      }
      acc += wprod * std::pow(c2, -0.5 * mu) * radial;
    }
    result += acc;
  }
  return result;
}

double regular_box(int dim, double mu, const std::array<Piece, 3>& pieces, const GaussRule& g) {
  const std::size_t q = g.x.size();
  std::size_t total_nodes = 1;
  for (int i = 0; i < dim; ++i) total_nodes *= q;
  double acc = 0.0;
  for (std::size_t node = 0; node < total_nodes; ++node) {
    std::size_t rem = node;
    double r2 = 0.0, w = 1.0;
    for (int d = 0; d < dim; ++d) {
      const std::size_t idx = rem % q;
      rem /= q;
      const Piece& p = pieces[d];
      const double half = 0.5 * (p.hi - p.lo);
      const double x = p.lo + half * (g.x[idx] + 1.0);
      r2 += x * x;
      w *= half * g.w[idx] * (p.alpha + p.beta * x);
    }
    acc += w * std::pow(r2, -0.5 * mu);
  }
  return acc;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  switch (n) {
    case 4: r = build_rule<4>(); break;
    case 8: r = build_rule<8>(); break;
    case 12: r = build_rule<12>(); break;
    case 16: r = build_rule<16>(); break;
    case 20: r = build_rule<20>(); break;
    case 24: r = build_rule<24>(); break;
    case 32: r = build_rule<32>(); break;
    case 48: r = build_rule<48>(); break;
    case 64: r = build_rule<64>(); break;
    default: throw InvalidArgument("unsupported Gauss-Legendre order " + std::to_string(n));
  }
  return cache.emplace(n, std::move(r)).first->second;
}

double power_integral_cube(int dim, double mu, const std::array<int, 3>& k, CubeWeight weight) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (!(mu > 0.0 && mu < dim)) throw InvalidArgument("power exponent out of range");
  std::array<std::vector<Piece>, 3> per_axis;
  int kinf = 0;
  for (int d = 0; d < dim; ++d) {
    per_axis[d] = axis_pieces(k[d], weight);
    kinf = std::max(kinf, std::abs(k[d]));
  }
  const GaussRule& g = gauss_legendre(kinf <= 2 ? 20 : 12);
  std::array<std::size_t, 3> counts{1, 1, 1};
  for (int d = 0; d < dim; ++d) counts[d] = per_axis[d].size();
  double total = 0.0;
  for (std::size_t a = 0; a < counts[0]; ++a)
    for (std::size_t b = 0; b < counts[1]; ++b)
      for (std::size_t c = 0; c < counts[2]; ++c) {
        const std::array<std::size_t, 3> sel{a, b, c};
        std::array<Piece, 3> pieces{};
        bool corner = true;
        for (int d = 0; d < dim; ++d) {
          pieces[d] = per_axis[d][sel[d]];
          if (pieces[d].lo != 0.0 && pieces[d].hi != 0.0) corner = false;
        }
        if (corner) {
          // Reflect every axis so the singular corner sits at the origin.
          std::array<double, 3> alpha{}, beta{};
          const double L = pieces[0].hi - pieces[0].lo;
          for (int d = 0; d < dim; ++d) {
            const Piece& p = pieces[d];
            alpha[d] = p.alpha;
            beta[d] = p.hi == 0.0 ? -p.beta : p.beta;
          }
          total += singular_cube(dim, mu, L, alpha, beta);
        } else {
          total += regular_box(dim, mu, pieces, g);
        }
      }
  return total;
}

}  // namespace hls
