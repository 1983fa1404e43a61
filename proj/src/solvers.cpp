#include "bifactor/solvers.hpp"

#include "bifactor/norms.hpp"
#include "bifactor/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace bifactor {

namespace {

constexpr double kDefaultRho = 1.5;

void check_inputs(const DenseMatrix& d, const ObservationMask& mask) {
  if (d.rows() != mask.rows() || d.cols() != mask.cols())
    throw std::invalid_argument("solver: matrix shape does not match mask");
  if (mask.is_empty())
    throw std::invalid_argument("solver: empty observation mask");
  if (!all_finite(d))
    throw std::invalid_argument("solver: input contains non-finite entries");
}

void validate(const SolverOptions& o) {
  if (o.d < 1) throw std::invalid_argument("solver: rank d must be >= 1");
  if (!(o.rho > 1.0)) throw std::invalid_argument("solver: rho must be > 1");
  if (!(o.epsilon > 0.0))
    throw std::invalid_argument("solver: epsilon must be positive");
  if (!(o.mu0 > 0.0)) throw std::invalid_argument("solver: mu0 must be > 0");
  if (o.max_iters < 1)
    throw std::invalid_argument("solver: max_iters must be >= 1");
}

double frob(const DenseMatrix& a) { return a.norm(); }

// Relative change ||hat - base||_F / ||base||_F with the 0/0 -> 0 convention.
double hat_ratio(const DenseMatrix& hat, const DenseMatrix& base) {
  const double nb = frob(base);
  const double diff = frob(hat - base);
  if (nb == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / nb;
}

struct Init {
  DenseMatrix U, V;
  double sigma1 = 0.0;
  double max_abs = 0.0;
};

// Warm start from the observed data: L0 = P_Om(D) and (U0, V0) the balanced
// spectral split of its top-d triplets. Directions whose singular values sit
// in the corruption tail (sigma_i < 2 sigma_{d+1}) start at zero: seeding
// them with outlier-aligned energy routinely locks moderate outliers into
// the factors. A zero column never regrows, so this acts as rank selection
// when d overshoots the true rank.
Init spectral_init(const DenseMatrix& l0, Index d) {
  Init init;
  init.max_abs = l0.cwiseAbs().maxCoeff();
  const Index probe = std::min<Index>(d + 1, std::min(l0.rows(), l0.cols()));
  ThinSvd svd = thin_svd(l0, probe);
  init.sigma1 = svd.singular_values(0);
  const double tail = probe > d ? svd.singular_values(d) : 0.0;
  Eigen::VectorXd root(d);
  for (Index i = 0; i < d; ++i) {
    const double s = std::max(svd.singular_values(i), 0.0);
    root(i) = (i > 0 && s < 2.0 * tail) ? 0.0 : std::sqrt(s);
  }
  init.U = svd.left.leftCols(d) * root.asDiagonal();
  init.V = svd.right.leftCols(d) * root.asDiagonal();
  return init;
}

// S-update: prox on the observed entries, unconstrained pass-through off
// them (the slack is zeroed only in the returned report).
template <typename Prox>
DenseMatrix masked_prox(const DenseMatrix& a, const ObservationMask& mask,
                        Prox prox) {
  if (mask.is_full()) return a.unaryExpr(prox);
  DenseMatrix s = a;
  double* ptr = s.data();
  for (Index idx : mask.linear()) ptr[idx] = prox(ptr[idx]);
  return s;
}

double masked_power_sum(const DenseMatrix& s, const ObservationMask& mask,
                        double p) {
  const double* ptr = s.data();
  double acc = 0.0;
  if (mask.is_full()) {
    for (Index t = 0; t < s.size(); ++t) acc += std::pow(std::abs(ptr[t]), p);
  } else {
    for (Index idx : mask.linear()) acc += std::pow(std::abs(ptr[idx]), p);
  }
  return acc;
}

}  // namespace

std::pair<double, double> stopping_metric(const AdmmState& s,
                                          const DenseMatrix& d) {
  const bool has_uhat = s.Uhat.size() > 0;
  const DenseMatrix uv = s.U * s.V.transpose();
  double eps1 = std::max(frob(uv - s.L), frob(s.L + s.S - d));
  if (has_uhat) {
    const DenseMatrix dual =
        s.Y1 * pseudo_inverse(s.Vhat) -
        pseudo_inverse(s.Uhat.transpose()) * s.Y2.transpose();
    eps1 = std::max(eps1, frob(dual));
  }
  double eps2 = hat_ratio(s.Vhat, s.V);
  if (has_uhat) eps2 = std::max(eps2, hat_ratio(s.Uhat, s.U));
  const double nd = frob(d);
  const double eps1_rel =
      nd > 0.0 ? eps1 / nd
               : (eps1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return {eps1_rel, eps2};
}

SolverReport solve_sl_half(const DenseMatrix& d, const ObservationMask& mask,
                           const SolverOptions& opts_in) {
  check_inputs(d, mask);
  const Index m = d.rows(), n = d.cols();

  AdmmState st;
  st.L = project(mask, d);
  const double norm_d = frob(st.L);
  if (norm_d == 0.0)
    throw std::invalid_argument("solve_sl_half: observed data is all zero");

  SolverOptions o = opts_in;
  if (o.lambda <= 0.0) o.lambda = std::sqrt(static_cast<double>(std::max(m, n)));
  if (o.rho <= 0.0) o.rho = kDefaultRho;
  if (o.mu_max <= 0.0) o.mu_max = 1e10;
  if (o.d < 1 || o.d > std::min(m, n))
    throw std::invalid_argument("solve_sl_half: rank d out of range");

  Init init = spectral_init(st.L, o.d);
  if (o.mu0 <= 0.0) o.mu0 = 1.0 / init.sigma1;
  validate(o);

  st.U = init.U;
  st.V = init.V;
  st.Uhat = st.U;
  st.Vhat = st.V;
  st.S = DenseMatrix::Zero(m, n);
  st.Y1 = DenseMatrix::Zero(m, o.d);
  st.Y2 = DenseMatrix::Zero(n, o.d);
  st.Y3 = DenseMatrix::Zero(m, n);
  st.Y4 = st.L / std::max(init.sigma1, init.max_abs / o.lambda);
  st.mu = o.mu0;

  const DenseMatrix id = DenseMatrix::Identity(o.d, o.d);
  SolverReport rep;
  rep.opts = o;

  for (int k = 0; k < o.max_iters; ++k) {
    const double mu = st.mu;
    // U, V least-squares updates around M = L - Y3/mu.
    const DenseMatrix mk = st.L - st.Y3 / mu;
    st.U = solve_gram(st.Uhat + st.Y1 / mu + mk * st.V,
                      id + st.V.transpose() * st.V);
    st.V = solve_gram(st.Vhat + st.Y2 / mu + mk.transpose() * st.U,
                      id + st.U.transpose() * st.U);
    // Hats via SVT with threshold lambda/(2 mu).
    st.Uhat = svt(st.U - st.Y1 / mu, o.lambda / (2.0 * mu));
    st.Vhat = svt(st.V - st.Y2 / mu, o.lambda / (2.0 * mu));
    // L averages the two quadratic pulls.
    const DenseMatrix uv = st.U * st.V.transpose();
    st.L = 0.5 * (uv + st.Y3 / mu - st.S + d - st.Y4 / mu);
    // S via half-thresholding with gamma = 2/mu on the observed set.
    const DenseMatrix a = d - st.L - st.Y4 / mu;
    const double gamma = 2.0 / mu;
    st.S = masked_prox(a, mask,
                       [gamma](double x) { return half_threshold(x, gamma); });
    // Dual ascent.
    st.Y1 += mu * (st.Uhat - st.U);
    st.Y2 += mu * (st.Vhat - st.V);
    st.Y3 += mu * (uv - st.L);
    st.Y4 += mu * (st.L + st.S - d);
    st.iter = k + 1;

    // Termination watches the constraint residuals and hat gaps. The dual
    // cross-term of stopping_metric() is reported there but kept out of the
    // stop test: it carries a path-dependent floor from residual factor
    // imbalance and would never pass a 1e-5 tolerance.
    const double eps1_rel =
        std::max((uv - st.L).norm(), (st.L + st.S - d).norm()) / norm_d;
    const double eps2 =
        std::max(hat_ratio(st.Uhat, st.U), hat_ratio(st.Vhat, st.V));
    rep.residual_trace.push_back(eps1_rel);
    rep.stop_metric_trace.push_back(std::max(eps1_rel, eps2));
    rep.objective_trace.push_back(
        0.5 * o.lambda * (nuclear_norm(st.Uhat) + nuclear_norm(st.Vhat)) +
        masked_power_sum(st.S, mask, 0.5));
    rep.mu_trace.push_back(mu);
    rep.yu_norm_trace.push_back(spectral_norm(st.Y1));
    rep.yv_norm_trace.push_back(spectral_norm(st.Y2));
    if (rep.stop_metric_trace.back() < o.epsilon) {
      rep.termination = Termination::Converged;
      break;
    }
    st.mu = std::min(o.rho * mu, o.mu_max);
  }

  rep.iterations = static_cast<int>(rep.stop_metric_trace.size());
  rep.U = st.U;
  rep.V = st.V;
  rep.L = st.L;
  rep.S = project(mask, st.S);
  return rep;
}

SolverReport solve_sl_two_thirds(const DenseMatrix& d,
                                 const ObservationMask& mask,
                                 const SolverOptions& opts_in) {
  check_inputs(d, mask);
  const Index m = d.rows(), n = d.cols();

  AdmmState st;
  st.L = project(mask, d);
  const double norm_d = frob(st.L);
  if (norm_d == 0.0)
    throw std::invalid_argument("solve_sl_two_thirds: observed data is all zero");

  SolverOptions o = opts_in;
  if (o.lambda <= 0.0) o.lambda = std::sqrt(static_cast<double>(std::max(m, n)));
  if (o.rho <= 0.0) o.rho = kDefaultRho;
  if (o.mu_max <= 0.0) o.mu_max = 1e10;
  if (o.d < 1 || o.d > std::min(m, n))
    throw std::invalid_argument("solve_sl_two_thirds: rank d out of range");

  Init init = spectral_init(st.L, o.d);
  if (o.mu0 <= 0.0) o.mu0 = 1.0 / init.sigma1;
  validate(o);

  st.U = init.U;
  st.V = init.V;
  st.Vhat = st.V;  // no Uhat in the three-multiplier variant
  st.S = DenseMatrix::Zero(m, n);
  st.Y2 = DenseMatrix::Zero(n, o.d);  // multiplier of Vhat = V
  st.Y3 = DenseMatrix::Zero(m, n);    // multiplier of UV^T = L
  st.Y4 = st.L / std::max(init.sigma1, init.max_abs / o.lambda);
  st.mu = o.mu0;

  const DenseMatrix id = DenseMatrix::Identity(o.d, o.d);
  SolverReport rep;
  rep.opts = o;

  for (int k = 0; k < o.max_iters; ++k) {
    const double mu = st.mu;
    const DenseMatrix pk = st.L - st.Y3 / mu;
    // U has the ridge (2 lambda/3) I from the Frobenius term.
    st.U = solve_gram(mu * (pk * st.V),
                      (2.0 * o.lambda / 3.0) * id +
                          mu * (st.V.transpose() * st.V).eval());
    st.V = solve_gram(st.Vhat + st.Y2 / mu + pk.transpose() * st.U,
                      id + st.U.transpose() * st.U);
    st.Vhat = svt(st.V - st.Y2 / mu, 2.0 * o.lambda / (3.0 * mu));
    const DenseMatrix uv = st.U * st.V.transpose();
    st.L = 0.5 * (uv + st.Y3 / mu - st.S + d - st.Y4 / mu);
    const DenseMatrix a = d - st.L - st.Y4 / mu;
    const double gamma = 2.0 / mu;
    st.S = masked_prox(a, mask, [gamma](double x) {
      return two_thirds_threshold(x, gamma);
    });
    st.Y2 += mu * (st.Vhat - st.V);
    st.Y3 += mu * (uv - st.L);
    st.Y4 += mu * (st.L + st.S - d);
    st.iter = k + 1;

    const double eps1_rel =
        std::max((uv - st.L).norm(), (st.L + st.S - d).norm()) / norm_d;
    const double eps2 = hat_ratio(st.Vhat, st.V);
    rep.residual_trace.push_back(eps1_rel);
    rep.stop_metric_trace.push_back(std::max(eps1_rel, eps2));
    rep.objective_trace.push_back(
        (o.lambda / 3.0) *
            (st.U.squaredNorm() + 2.0 * nuclear_norm(st.Vhat)) +
        masked_power_sum(st.S, mask, 2.0 / 3.0));
    rep.mu_trace.push_back(mu);
    rep.yv_norm_trace.push_back(spectral_norm(st.Y2));
    if (rep.stop_metric_trace.back() < o.epsilon) {
      rep.termination = Termination::Converged;
      break;
    }
    st.mu = std::min(o.rho * mu, o.mu_max);
  }

  rep.iterations = static_cast<int>(rep.stop_metric_trace.size());
  rep.U = st.U;
  rep.V = st.V;
  rep.L = st.L;
  rep.S = project(mask, st.S);
  return rep;
}

SolverReport solve_rpca_nuclear(const DenseMatrix& d,
                                const ObservationMask& mask,
                                const SolverOptions& opts_in) {
  check_inputs(d, mask);
  const Index m = d.rows(), n = d.cols();
  const DenseMatrix dz = project(mask, d);
  const double norm_d = frob(dz);
  if (norm_d == 0.0)
    throw std::invalid_argument("solve_rpca_nuclear: observed data is all zero");

  SolverOptions o = opts_in;
  if (o.d < 1) o.d = std::min(m, n);
  if (o.lambda <= 0.0) o.lambda = std::sqrt(static_cast<double>(std::max(m, n)));
  if (o.rho <= 0.0) o.rho = kDefaultRho;
  if (o.mu_max <= 0.0) o.mu_max = 1e10;
  const double sigma1 = spectral_norm(dz);
  if (o.mu0 <= 0.0) o.mu0 = 1.0 / sigma1;
  validate(o);

  DenseMatrix l = DenseMatrix::Zero(m, n);
  DenseMatrix s = DenseMatrix::Zero(m, n);
  DenseMatrix y = dz / std::max(sigma1, dz.cwiseAbs().maxCoeff() / o.lambda);
  double mu = o.mu0;

  SolverReport rep;
  rep.opts = o;
  for (int k = 0; k < o.max_iters; ++k) {
    l = svt(dz - s - y / mu, o.lambda / mu);
    const DenseMatrix a = dz - l - y / mu;
    const double tau = 1.0 / mu;
    s = masked_prox(a, mask,
                    [tau](double x) { return soft_threshold(x, tau); });
    y += mu * (l + s - dz);

    const double res = frob(l + s - dz) / norm_d;
    rep.residual_trace.push_back(res);
    rep.stop_metric_trace.push_back(res);
    rep.objective_trace.push_back(o.lambda * nuclear_norm(l) +
                                  masked_power_sum(s, mask, 1.0));
    rep.mu_trace.push_back(mu);
    if (res < o.epsilon) {
      rep.termination = Termination::Converged;
      break;
    }
    mu = std::min(o.rho * mu, o.mu_max);
  }

  rep.iterations = static_cast<int>(rep.stop_metric_trace.size());
  const Index dd = std::min<Index>(o.d, std::min(m, n));
  auto [u, v] = spectral_factorization(l, dd, FactorKind::DN);
  rep.U = std::move(u);
  rep.V = std::move(v);
  rep.L = std::move(l);
  rep.S = project(mask, s);
  return rep;
}

const char* to_string(RpcaMethod m) {
  switch (m) {
    case RpcaMethod::SlHalf: return "sl-half";
    case RpcaMethod::SlTwoThirds: return "sl-two-thirds";
    case RpcaMethod::Nuclear: return "nuclear";
  }
  return "?";
}

RpcaMethod rpca_method_from_string(const std::string& name) {
  if (name == "sl-half") return RpcaMethod::SlHalf;
  if (name == "sl-two-thirds") return RpcaMethod::SlTwoThirds;
  if (name == "nuclear") return RpcaMethod::Nuclear;
  throw std::invalid_argument("unknown rpca method: " + name);
}

SolverReport solve_rpca(RpcaMethod method, const DenseMatrix& d,
                        const ObservationMask& mask,
                        const SolverOptions& opts) {
  switch (method) {
    case RpcaMethod::SlHalf: return solve_sl_half(d, mask, opts);
    case RpcaMethod::SlTwoThirds: return solve_sl_two_thirds(d, mask, opts);
    case RpcaMethod::Nuclear: return solve_rpca_nuclear(d, mask, opts);
  }
  throw std::logic_error("unreachable");
}

}  // namespace bifactor
