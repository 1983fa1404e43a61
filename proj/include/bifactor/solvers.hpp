// ADMM solvers for robust PCA under three low-rank penalties:
//
//   sl-half       min (lambda/2)(||Uh||_* + ||Vh||_*) + ||P_Om(S)||_{1/2}^{1/2}
//                 s.t. Uh = U, Vh = V, U V^T = L, L + S = D
//   sl-two-thirds min (lambda/3)(||U||_F^2 + 2||Vh||_*) + ||P_Om(S)||_{2/3}^{2/3}
//                 s.t. Vh = V, U V^T = L, L + S = D
//   nuclear       min lambda ||L||_* + ||P_Om(S)||_1,  s.t. L + S = D
//
// The factored solvers run one pass of U -> V -> (hats via SVT) -> L -> S
// per outer iteration, then ascend the multipliers and grow mu.
#pragma once

#include "bifactor/dense.hpp"

#include <string>
#include <vector>

namespace bifactor {

struct SolverOptions {
  Index d = 0;            // factorization rank, >= 1
  double lambda = 0.0;    // <= 0: sqrt(max(m, n))
  double mu0 = 0.0;       // <= 0: 1/sigma_1(P_Om(D))  (1e-4 for completion)
  double rho = 0.0;       // <= 0: 1.3                 (must be > 1)
  double mu_max = 0.0;    // <= 0: 1e10                (1e20 for completion)
  double epsilon = 1e-5;  // stopping tolerance (1e-4 suggested for real data)
  int max_iters = 500;
};

// All iterates of one factored ADMM run. The three-multiplier variant
// (sl-two-thirds) leaves Uhat and Y1 empty; multipliers are stored by role:
// Y1 ~ Uhat-U, Y2 ~ Vhat-V, Y3 ~ UV^T-L, Y4 ~ L+S-D.
struct AdmmState {
  DenseMatrix U, V, Uhat, Vhat, L, S;
  DenseMatrix Y1, Y2, Y3, Y4;
  double mu = 0.0;
  int iter = 0;
};

// Stopping metric of the factored solvers:
//   eps1 = max{||UV^T - L||_F, ||L+S-D||_F, ||Y1 pinv(Vhat) - pinv(Uhat^T) Y2^T||_F}
//   eps2 = max{||Uhat-U||_F/||U||_F, ||Vhat-V||_F/||V||_F}
// returned as (eps1/||D||_F, eps2); iteration stops when max of the two < eps.
// Terms involving Uhat/Y1 are skipped when absent (three-multiplier variant).
// A zero-norm denominator counts as 0 when the numerator is zero, +inf
// otherwise.
std::pair<double, double> stopping_metric(const AdmmState& state,
                                          const DenseMatrix& d);

enum class Termination { Converged, MaxIters };

struct SolverReport {
  DenseMatrix U, V, L, S;  // S is restricted to the observed set
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;     // eps1 / ||D||_F per iteration
  std::vector<double> stop_metric_trace;  // max(eps1/||D||_F, eps2)
  std::vector<double> mu_trace;
  // Spectral norms of the SVT-derived multipliers after each update; bounded
  // by lambda/2 (sl-half, both) and 2*lambda/3 (sl-two-thirds, yv only).
  std::vector<double> yu_norm_trace;
  std::vector<double> yv_norm_trace;
  Termination termination = Termination::MaxIters;
  int iterations = 0;
  SolverOptions opts;  // effective values after defaults were resolved
};

// Unknown entries of `d` must be zero (callers loading nan-encoded files get
// this for free). Throws on non-finite input, shape mismatch, an empty mask,
// or all-zero observed data.
SolverReport solve_sl_half(const DenseMatrix& d, const ObservationMask& mask,
                           const SolverOptions& opts);
SolverReport solve_sl_two_thirds(const DenseMatrix& d,
                                 const ObservationMask& mask,
                                 const SolverOptions& opts);

// Convex baseline; full-matrix SVT each iteration, stops on the feasibility
// residual ||L+S-D||_F/||D||_F alone. U and V are filled with the balanced
// spectral split of the final L so reports stay uniform.
SolverReport solve_rpca_nuclear(const DenseMatrix& d,
                                const ObservationMask& mask,
                                const SolverOptions& opts);

enum class RpcaMethod { SlHalf, SlTwoThirds, Nuclear };

const char* to_string(RpcaMethod m);
RpcaMethod rpca_method_from_string(const std::string& name);

SolverReport solve_rpca(RpcaMethod method, const DenseMatrix& d,
                        const ObservationMask& mask, const SolverOptions& opts);

}  // namespace bifactor
