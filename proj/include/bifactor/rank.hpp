// Rank estimation for corrupted / incomplete data: inspect the top-k
// singular values of the observed matrix and pick the index minimizing the
// ratio of consecutive singular values. Spectral gaps are reported alongside
// as diagnostics.
#pragma once

#include "bifactor/dense.hpp"

namespace bifactor {

struct RankEstimate {
  Index rank = 0;                    // argmin of the consecutive ratio
  Eigen::VectorXd singular_values;   // inspected top-k values
  Eigen::VectorXd criterion_values;  // ratios sigma_{i+1}/sigma_i, length k-1
  Eigen::VectorXd gap_values;        // gaps sigma_i - sigma_{i+1}, length k-1
};

// k defaults to min(100, min(m, n)) when <= 0. Indices with
// sigma_i <= 1e-10 * sigma_1 are excluded from the argmin; ties resolve to
// the smallest index. Throws if the observed data is all zero.
RankEstimate estimate_rank(const DenseMatrix& d, const ObservationMask& mask,
                           Index k = 0);

}  // namespace bifactor
