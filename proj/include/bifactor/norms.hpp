// Sparsity and low-rankness penalties: entrywise lp sums, Schatten
// quasi-norms, and the two bilinear factor penalties together with the
// spectral factorizations that attain them.
#pragma once

#include "bifactor/dense.hpp"

namespace bifactor {

// sum_ij |S_ij|^p for p in (0, 2].
double lp_quasi_norm_p(const DenseMatrix& s, double p);

// sum_i sigma_i(X)^q for q in (0, 2].
double schatten_quasi_norm_q(const DenseMatrix& x, double q);

// Sum of singular values.
double nuclear_norm(const DenseMatrix& x);

// Double nuclear penalty (||U||_* + ||V||_*)^2 / 4. Over all factorizations
// X = U V^T this attains ||X||_{S_1/2}^{1/2} summed, i.e. (sum sigma^1/2)^2.
double dn_penalty(const DenseMatrix& u, const DenseMatrix& v);

// Frobenius/nuclear hybrid penalty [(||U||_F^2 + 2||V||_*) / 3]^{3/2},
// attaining (sum sigma^{2/3})^{3/2}.
double fn_penalty(const DenseMatrix& u, const DenseMatrix& v);

enum class FactorKind { DN, FN };

// Minimizing factorization of X with inner dimension d:
//   DN: (L sigma^{1/2}, R sigma^{1/2});  FN: (L sigma^{1/3}, R sigma^{2/3}).
// Exact (U V^T = X) whenever d >= rank(X).
std::pair<DenseMatrix, DenseMatrix> spectral_factorization(
    const DenseMatrix& x, Index d, FactorKind kind);

}  // namespace bifactor
