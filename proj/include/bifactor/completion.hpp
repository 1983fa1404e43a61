// Matrix completion / image recovery by factor-penalized least squares:
//
//   complete_dn  min (lambda/2)(||Uh||_* + ||Vh||_*) + 1/2 ||P_Om(L - D)||_F^2
//                s.t. L = U V^T, U = Uh, V = Vh
//   complete_fn  min (lambda/3)(||U||_F^2 + 2||Vh||_*) + 1/2 ||P_Om(L - D)||_F^2
//                s.t. L = U V^T, V = Vh
//
// The masked L-update interpolates: on the observed set
// (1 + mu) L = D + mu U V^T - Y, off it L = U V^T - Y/mu.
#pragma once

#include "bifactor/solvers.hpp"

namespace bifactor {

// Default regularization weight when opts.lambda <= 0:
//   ||P_Om(D)||_F / sqrt(max(m, n) * |Om| / (m n)), scaled down 100x so the
//   data term dominates in the exact-recovery regime.
double completion_lambda_default(const DenseMatrix& d,
                                 const ObservationMask& mask);

// Masked L-update shared by both solvers:
//   L = P_Om((D + mu UV^T - Y) / (1 + mu)) + P_Om^perp(UV^T - Y/mu).
DenseMatrix completion_l_update(const DenseMatrix& d,
                                const ObservationMask& mask,
                                const DenseMatrix& uv, const DenseMatrix& y,
                                double mu);

SolverReport complete_dn(const DenseMatrix& d, const ObservationMask& mask,
                         const SolverOptions& opts);
SolverReport complete_fn(const DenseMatrix& d, const ObservationMask& mask,
                         const SolverOptions& opts);

enum class CompletionMethod { DN, FN };

const char* to_string(CompletionMethod m);
CompletionMethod completion_method_from_string(const std::string& name);

SolverReport complete(CompletionMethod method, const DenseMatrix& d,
                      const ObservationMask& mask, const SolverOptions& opts);

}  // namespace bifactor
