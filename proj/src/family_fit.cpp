#include "family_fit.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace hls::detail {

namespace {

struct Residual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Field* f;
  double q;
  std::vector<Point> pts;

  int inputs() const { return f->dim() + 2; }
  int values() const { return static_cast<int>(pts.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    const double alpha = std::exp(x[0]), beta = std::exp(x[1]);
    Point y(f->dim());
    for (int d = 0; d < f->dim(); ++d) y[d] = x[2 + d];
    for (std::size_t i = 0; i < pts.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = (*f)[i] - alpha * std::pow(beta + (pts[i] - y).norm2(), -q);
    return 0;
  }
};

}  // namespace

FamilyParams fit_family(const Field& f, double exponent, const FamilyParams& start) {
  const int n = f.dim();
  Residual fn{&f, exponent, {}};
  fn.pts.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fn.pts.push_back(f.grid().point(i));
  Eigen::VectorXd x(n + 2);
  x[0] = std::log(start.alpha);
  x[1] = std::log(start.beta);
  for (int d = 0; d < n; ++d) x[2 + d] = start.center[d];
  Eigen::NumericalDiff<Residual> numdiff(fn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residual>> lm(numdiff);
  lm.parameters.maxfev = 2000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-14;
  lm.minimize(x);

  FamilyParams out{std::exp(x[0]), std::exp(x[1]), Point(n)};
  for (int d = 0; d < n; ++d) out.center[d] = x[2 + d];
  return out;
}

}  // namespace hls::detail
