#include "bifactor/completion.hpp"

#include "bifactor/norms.hpp"
#include "bifactor/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace bifactor {

namespace {

constexpr double kDefaultRho = 1.05;

double hat_ratio(const DenseMatrix& hat, const DenseMatrix& base) {
  const double nb = base.norm();
  const double diff = (hat - base).norm();
  if (nb == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / nb;
}

// L = P_Om((D + mu UV^T - Y)/(1 + mu)) + P_Om^perp(UV^T - Y/mu).
DenseMatrix masked_l_update(const DenseMatrix& d, const ObservationMask& mask,
                            const DenseMatrix& uv, const DenseMatrix& y,
                            double mu) {
  DenseMatrix l = uv - y / mu;  // off-Omega branch everywhere first
  if (mask.is_full()) {
    l = (d + mu * uv - y) / (1.0 + mu);
    return l;
  }
  const double* dp = d.data();
  const double* uvp = uv.data();
  const double* yp = y.data();
  double* lp = l.data();
  for (Index idx : mask.linear())
    lp[idx] = (dp[idx] + mu * uvp[idx] - yp[idx]) / (1.0 + mu);
  return l;
}

struct Common {
  DenseMatrix dz;  // P_Om(D)
  double norm_d = 0.0;
  SolverOptions o;
};

Common prepare(const DenseMatrix& d, const ObservationMask& mask,
               const SolverOptions& opts, const char* who) {
  if (d.rows() != mask.rows() || d.cols() != mask.cols())
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
  if (mask.is_empty())
    throw std::invalid_argument(std::string(who) + ": empty observation mask");
  if (!all_finite(d))
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  Common c;
  c.dz = project(mask, d);
  c.norm_d = c.dz.norm();
  if (c.norm_d == 0.0)
    throw std::invalid_argument(std::string(who) + ": observed data is all zero");
  c.o = opts;
  if (c.o.d < 1 || c.o.d > std::min(d.rows(), d.cols()))
    throw std::invalid_argument(std::string(who) + ": rank d out of range");
  if (c.o.lambda <= 0.0) c.o.lambda = completion_lambda_default(d, mask);
  if (c.o.mu0 <= 0.0) c.o.mu0 = 1e-4;
  if (c.o.rho <= 0.0) c.o.rho = kDefaultRho;
  if (c.o.mu_max <= 0.0) c.o.mu_max = 1e20;
  if (!(c.o.epsilon > 0.0))
    throw std::invalid_argument(std::string(who) + ": epsilon must be positive");
  if (c.o.max_iters < 1)
    throw std::invalid_argument(std::string(who) + ": max_iters must be >= 1");
  return c;
}

// Warm start: a few alternating fill-in / rank-d truncation passes pull the
// spectral estimate away from the masking-noise directions before the
// factors are split off.
DenseMatrix impute_start(const DenseMatrix& dz, const ObservationMask& mask,
                         Index d, DenseMatrix& u, DenseMatrix& v) {
  constexpr int kImputeRounds = 8;
  DenseMatrix z = dz;
  ThinSvd svd = thin_svd(z, d);
  for (int t = 0; t < kImputeRounds; ++t) {
    z = dz + project_complement(
                 mask, DenseMatrix(svd.left * svd.singular_values.asDiagonal() *
                                   svd.right.transpose()));
    svd = thin_svd(z, d);
  }
  Eigen::VectorXd root = svd.singular_values.cwiseMax(0.0).cwiseSqrt();
  u = svd.left * root.asDiagonal();
  v = svd.right * root.asDiagonal();
  return z;
}

}  // namespace

double completion_lambda_default(const DenseMatrix& d,
                                 const ObservationMask& mask) {
  const double mn = static_cast<double>(d.rows()) * d.cols();
  const double frac = static_cast<double>(mask.count()) / mn;
  const double denom =
      std::sqrt(static_cast<double>(std::max(d.rows(), d.cols())) * frac);
  // The 1/100 keeps the data term dominant in the exact-recovery regime;
  // larger weights visibly bias the completion.
  return 0.01 * project(mask, d).norm() / denom;
}

SolverReport complete_dn(const DenseMatrix& d, const ObservationMask& mask,
                         const SolverOptions& opts) {
  Common c = prepare(d, mask, opts, "complete_dn");
  const Index m = d.rows(), n = d.cols();
  const SolverOptions& o = c.o;

  DenseMatrix u, v;
  DenseMatrix l = impute_start(c.dz, mask, o.d, u, v);
  DenseMatrix uhat = u, vhat = v;
  DenseMatrix y1 = DenseMatrix::Zero(m, o.d);
  DenseMatrix y2 = DenseMatrix::Zero(n, o.d);
  DenseMatrix y3 = DenseMatrix::Zero(m, n);
  double mu = o.mu0;

  const DenseMatrix id = DenseMatrix::Identity(o.d, o.d);
  SolverReport rep;
  rep.opts = o;

  for (int k = 0; k < o.max_iters; ++k) {
    const DenseMatrix pulled = l + y3 / mu;
    u = solve_gram(pulled * v + uhat - y1 / mu, v.transpose() * v + id);
    v = solve_gram(pulled.transpose() * u + vhat - y2 / mu,
                   u.transpose() * u + id);
    uhat = svt(u + y1 / mu, o.lambda / (2.0 * mu));
    vhat = svt(v + y2 / mu, o.lambda / (2.0 * mu));
    const DenseMatrix uv = u * v.transpose();
    l = masked_l_update(c.dz, mask, uv, y3, mu);
    y1 += mu * (u - uhat);
    y2 += mu * (v - vhat);
    y3 += mu * (l - uv);

    const double eps1_rel = (l - uv).norm() / c.norm_d;
    const double eps2 = std::max(hat_ratio(uhat, u), hat_ratio(vhat, v));
    rep.residual_trace.push_back(eps1_rel);
    rep.stop_metric_trace.push_back(std::max(eps1_rel, eps2));
    rep.objective_trace.push_back(
        0.5 * o.lambda * (nuclear_norm(uhat) + nuclear_norm(vhat)) +
        0.5 * project(mask, l - c.dz).squaredNorm());
    rep.mu_trace.push_back(mu);
    rep.yu_norm_trace.push_back(spectral_norm(y1));
    rep.yv_norm_trace.push_back(spectral_norm(y2));
    if (rep.stop_metric_trace.back() < o.epsilon) {
      rep.termination = Termination::Converged;
      break;
    }
    mu = std::min(o.rho * mu, o.mu_max);
  }

  rep.iterations = static_cast<int>(rep.stop_metric_trace.size());
  rep.U = u;
  rep.V = v;
  rep.L = u * v.transpose();
  rep.S = project(mask, c.dz - rep.L);  // observed residual
  return rep;
}

SolverReport complete_fn(const DenseMatrix& d, const ObservationMask& mask,
                         const SolverOptions& opts) {
  Common c = prepare(d, mask, opts, "complete_fn");
  const Index m = d.rows(), n = d.cols();
  const SolverOptions& o = c.o;

  DenseMatrix u, v;
  DenseMatrix l = impute_start(c.dz, mask, o.d, u, v);
  DenseMatrix vhat = v;
  DenseMatrix y1 = DenseMatrix::Zero(n, o.d);  // multiplier of Vhat = V
  DenseMatrix y2 = DenseMatrix::Zero(m, n);    // multiplier of L = UV^T
  double mu = o.mu0;

  const DenseMatrix id = DenseMatrix::Identity(o.d, o.d);
  SolverReport rep;
  rep.opts = o;

  for (int k = 0; k < o.max_iters; ++k) {
    u = solve_gram((mu * l + y2) * v,
                   mu * (v.transpose() * v).eval() +
                       (2.0 * o.lambda / 3.0) * id);
    v = solve_gram((l + y2 / mu).transpose() * u + vhat - y1 / mu,
                   u.transpose() * u + id);
    vhat = svt(v + y1 / mu, 2.0 * o.lambda / (3.0 * mu));
    const DenseMatrix uv = u * v.transpose();
    l = masked_l_update(c.dz, mask, uv, y2, mu);
    y1 += mu * (v - vhat);
    y2 += mu * (l - uv);

    const double eps1_rel = (l - uv).norm() / c.norm_d;
    const double eps2 = hat_ratio(vhat, v);
    rep.residual_trace.push_back(eps1_rel);
    rep.stop_metric_trace.push_back(std::max(eps1_rel, eps2));
    rep.objective_trace.push_back(
        (o.lambda / 3.0) * (u.squaredNorm() + 2.0 * nuclear_norm(vhat)) +
        0.5 * project(mask, l - c.dz).squaredNorm());
    rep.mu_trace.push_back(mu);
    rep.yv_norm_trace.push_back(spectral_norm(y1));
    if (rep.stop_metric_trace.back() < o.epsilon) {
      rep.termination = Termination::Converged;
      break;
    }
    mu = std::min(o.rho * mu, o.mu_max);
  }

  rep.iterations = static_cast<int>(rep.stop_metric_trace.size());
  rep.U = u;
  rep.V = v;
  rep.L = u * v.transpose();
  rep.S = project(mask, c.dz - rep.L);
  return rep;
}

const char* to_string(CompletionMethod m) {
  return m == CompletionMethod::DN ? "dn" : "fn";
}

CompletionMethod completion_method_from_string(const std::string& name) {
  if (name == "dn") return CompletionMethod::DN;
  if (name == "fn") return CompletionMethod::FN;
  throw std::invalid_argument("unknown completion method: " + name);
}

SolverReport complete(CompletionMethod method, const DenseMatrix& d,
                      const ObservationMask& mask, const SolverOptions& opts) {
  return method == CompletionMethod::DN ? complete_dn(d, mask, opts)
                                        : complete_fn(d, mask, opts);
}

}  // namespace bifactor
