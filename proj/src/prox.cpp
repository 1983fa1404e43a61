#include "bifactor/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifactor {

static void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("threshold parameter must be positive");
}

double soft_threshold(double x, double tau) {
  check_gamma(tau);
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x < 0.0 ? -mag : mag;
}

DenseMatrix svt(const DenseMatrix& a, double tau) {
  check_gamma(tau);
  const Index k = std::min(a.rows(), a.cols());
  ThinSvd svd = thin_svd(a, k);
  Index keep = 0;
  while (keep < k && svd.singular_values(keep) > tau) ++keep;
  if (keep == 0) return DenseMatrix::Zero(a.rows(), a.cols());
  Eigen::VectorXd s = svd.singular_values.head(keep).array() - tau;
  return svd.left.leftCols(keep) * s.asDiagonal() *
         svd.right.leftCols(keep).transpose();
}

double half_threshold_point(double gamma) {
  check_gamma(gamma);
  return std::cbrt(54.0 * gamma * gamma) / 4.0;
}

double two_thirds_threshold_point(double gamma) {
  check_gamma(gamma);
  return (2.0 / 3.0) * std::pow(3.0 * gamma * gamma * gamma, 0.25);
}

double half_threshold(double a, double gamma) {
  check_gamma(gamma);
  const double mag = std::abs(a);
  // At an exact tie between the interior stationary point and zero, prefer
  // the sparser solution (strict inequality).
  if (!(mag > half_threshold_point(gamma))) return 0.0;
  // phi = arccos((gamma/8) * (|a|/3)^{-3/2}); the argument lies in (0, 1/sqrt2]
  // for |a| above the threshold, clamped against rounding.
  double arg = (gamma / 8.0) * std::pow(mag / 3.0, -1.5);
  arg = std::clamp(arg, -1.0, 1.0);
  const double phi = std::acos(arg);
  const double pi = 3.14159265358979323846;
  return (2.0 / 3.0) * a * (1.0 + std::cos((2.0 * pi - 2.0 * phi) / 3.0));
}

double two_thirds_threshold(double c, double gamma) {
  check_gamma(gamma);
  const double mag = std::abs(c);
  if (!(mag > two_thirds_threshold_point(gamma))) return 0.0;
  // psi = (2/sqrt3) * sqrt(sqrt(gamma) * cosh(arccosh(27 c^2 / (16 gamma^{3/2})) / 3))
  double t = (27.0 * c * c / 16.0) * std::pow(gamma, -1.5);
  t = std::max(t, 1.0);
  const double psi = (2.0 / std::sqrt(3.0)) *
                     std::sqrt(std::sqrt(gamma) * std::cosh(std::acosh(t) / 3.0));
  const double inner = std::max(2.0 * mag / psi - psi * psi, 0.0);
  const double root = psi + std::sqrt(inner);
  const double value = root * root * root / 8.0;
  return c < 0.0 ? -value : value;
}

DenseMatrix half_threshold_matrix(const DenseMatrix& a, double gamma) {
  check_gamma(gamma);
  return a.unaryExpr(
      [gamma](double x) { return half_threshold(x, gamma); });
}

DenseMatrix two_thirds_threshold_matrix(const DenseMatrix& c, double gamma) {
  check_gamma(gamma);
  return c.unaryExpr(
      [gamma](double x) { return two_thirds_threshold(x, gamma); });
}

}  // namespace bifactor
