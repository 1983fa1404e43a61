#include "bifactor/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace bifactor {

double lp_quasi_norm_p(const DenseMatrix& s, double p) {
  if (!(p > 0.0 && p <= 2.0))
    throw std::invalid_argument("lp_quasi_norm_p: p must be in (0, 2]");
  double acc = 0.0;
  const double* ptr = s.data();
  for (Index t = 0; t < s.size(); ++t) acc += std::pow(std::abs(ptr[t]), p);
  return acc;
}

double schatten_quasi_norm_q(const DenseMatrix& x, double q) {
  if (!(q > 0.0 && q <= 2.0))
    throw std::invalid_argument("schatten_quasi_norm_q: q must be in (0, 2]");
  const Eigen::VectorXd sigma = singular_values(x);
  double acc = 0.0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > 0.0) acc += std::pow(sigma(i), q);
  return acc;
}

double nuclear_norm(const DenseMatrix& x) {
  return singular_values(x).sum();
}

static void check_factor_shapes(const DenseMatrix& u, const DenseMatrix& v) {
  if (u.cols() != v.cols())
    throw std::invalid_argument("factor penalty: U and V column counts differ");
}

double dn_penalty(const DenseMatrix& u, const DenseMatrix& v) {
  check_factor_shapes(u, v);
  const double s = nuclear_norm(u) + nuclear_norm(v);
  return s * s / 4.0;
}

double fn_penalty(const DenseMatrix& u, const DenseMatrix& v) {
  check_factor_shapes(u, v);
  const double s = (u.squaredNorm() + 2.0 * nuclear_norm(v)) / 3.0;
  return std::pow(s, 1.5);
}

std::pair<DenseMatrix, DenseMatrix> spectral_factorization(
    const DenseMatrix& x, Index d, FactorKind kind) {
  if (d < 1 || d > std::min(x.rows(), x.cols()))
    throw std::invalid_argument("spectral_factorization: d out of range");
  ThinSvd svd = thin_svd(x, d);
  // Values in the float-noise tail count as zero; their fractional powers
  // would otherwise leak into the attained penalties.
  const double cut = 1e-10 * svd.singular_values(0);
  Eigen::VectorXd su(d), sv(d);
  for (Index i = 0; i < d; ++i) {
    const double s =
        svd.singular_values(i) > cut ? svd.singular_values(i) : 0.0;
    if (kind == FactorKind::DN) {
      su(i) = std::sqrt(s);
      sv(i) = su(i);
    } else {
      su(i) = std::cbrt(s);
      sv(i) = su(i) * su(i);
    }
  }
  return {DenseMatrix(svd.left * su.asDiagonal()),
          DenseMatrix(svd.right * sv.asDiagonal())};
}

}  // namespace bifactor
