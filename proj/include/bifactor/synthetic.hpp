// Synthetic data generation and recovery metrics. An instance is
// D = P_Om(L* + S* + N) with L* = P Q^T from standard Gaussian factors,
// S* holding uniform [-5, 5] outliers on a random support inside the
// observed set, and N = nf * randn. Everything is a pure function of the
// config (draws happen in a fixed documented order on one RngStream).
#pragma once

#include "bifactor/dense.hpp"

#include <cstdint>

namespace bifactor {

enum class DRule { Estimate, Fixed, OneQuarterOverR };

struct ExperimentConfig {
  Index m = 0, n = 0;
  Index r = 0;                 // true rank
  double outlier_ratio = 0.0;  // in [0, 1)
  double noise_factor = 0.0;   // nf >= 0
  double missing_ratio = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
  int trials = 1;
  DRule d_rule = DRule::Estimate;
  Index d_fixed = 0;  // used when d_rule == Fixed
};

struct GroundTruth {
  DenseMatrix Lstar;
  DenseMatrix Sstar;
  ObservationMask mask;
  DenseMatrix D;  // P_Om(L* + S* + N), zeros off the mask
};

GroundTruth gen_synthetic(const ExperimentConfig& cfg);

// ||L - Lbar||_F / ||Lbar||_F; throws on a zero reference.
double rse(const DenseMatrix& l, const DenseMatrix& lbar);

// F-measure of the detected outlier support on the observed set; an entry
// counts as detected when |S_ij| > threshold, the true support is the
// nonzero set of S*. Returns 0 when precision + recall is 0. The default
// threshold suits noise-free data; against dense Gaussian noise the
// benchmark harness extracts supports at 3x the noise scale instead (the
// recovered S carries the noise there, since L + S = D is a hard
// constraint).
double f_measure(const DenseMatrix& s, const DenseMatrix& sstar,
                 const ObservationMask& mask, double threshold = 1e-3);

// 10 log10(peak^2 / MSE); +infinity when the images agree exactly.
double psnr(const DenseMatrix& image, const DenseMatrix& reference,
            double peak = 255.0);

// Exactly rank-r nonnegative test image with values in [0, 255]: product of
// uniform [0, 1) factors rescaled so the maximum hits the peak.
DenseMatrix gen_lowrank_image(Index rows, Index cols, Index rank,
                              std::uint64_t seed);

}  // namespace bifactor
