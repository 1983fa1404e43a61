#include "bifactor/synthetic.hpp"

#include "bifactor/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifactor {

namespace {

void fill_normal(DenseMatrix& a, RngStream& rng) {
  double* ptr = a.data();
  for (Index t = 0; t < a.size(); ++t) ptr[t] = rng.normal();
}

// First `take` elements of a uniform random permutation of `pool`,
// returned sorted.
std::vector<Index> sample_without_replacement(std::vector<Index> pool,
                                              std::size_t take,
                                              RngStream& rng) {
  take = std::min(take, pool.size());
  for (std::size_t t = 0; t < take; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(
                                  rng.below(static_cast<std::uint64_t>(
                                      pool.size() - t)));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

GroundTruth gen_synthetic(const ExperimentConfig& cfg) {
  if (cfg.m <= 0 || cfg.n <= 0 || cfg.r <= 0 ||
      cfg.r > std::min(cfg.m, cfg.n))
    throw std::invalid_argument("gen_synthetic: bad dimensions or rank");
  if (cfg.outlier_ratio < 0.0 || cfg.outlier_ratio >= 1.0 ||
      cfg.missing_ratio < 0.0 || cfg.missing_ratio >= 1.0 ||
      cfg.noise_factor < 0.0)
    throw std::invalid_argument("gen_synthetic: ratio out of range");

  RngStream rng(cfg.seed);
  const Index m = cfg.m, n = cfg.n;
  const std::size_t total = static_cast<std::size_t>(m * n);

  // Draw order is part of the reproducibility contract:
  // P, Q, mask, outlier support, outlier values, noise.
  DenseMatrix p(m, cfg.r), q(n, cfg.r);
  fill_normal(p, rng);
  fill_normal(q, rng);

  GroundTruth gt;
  gt.Lstar = p * q.transpose();

  if (cfg.missing_ratio == 0.0) {
    gt.mask = ObservationMask::full(m, n);
  } else {
    const std::size_t missing =
        static_cast<std::size_t>(std::llround(cfg.missing_ratio * total));
    std::vector<Index> all(total);
    for (std::size_t t = 0; t < total; ++t) all[t] = static_cast<Index>(t);
    gt.mask = ObservationMask(
        m, n, sample_without_replacement(std::move(all), total - missing, rng));
  }

  gt.Sstar = DenseMatrix::Zero(m, n);
  const std::size_t outliers =
      static_cast<std::size_t>(std::llround(cfg.outlier_ratio * total));
  if (outliers > 0) {
    const std::vector<Index> support =
        sample_without_replacement(gt.mask.linear(), outliers, rng);
    for (Index idx : support) gt.Sstar.data()[idx] = rng.uniform(-5.0, 5.0);
  }

  DenseMatrix d = gt.Lstar + gt.Sstar;
  if (cfg.noise_factor > 0.0) {
    DenseMatrix noise(m, n);
    fill_normal(noise, rng);
    d += cfg.noise_factor * noise;
  }
  gt.D = project(gt.mask, d);
  return gt;
}

double rse(const DenseMatrix& l, const DenseMatrix& lbar) {
  if (l.rows() != lbar.rows() || l.cols() != lbar.cols())
    throw std::invalid_argument("rse: shape mismatch");
  const double ref = lbar.norm();
  if (ref == 0.0) throw std::invalid_argument("rse: zero reference matrix");
  return (l - lbar).norm() / ref;
}

double f_measure(const DenseMatrix& s, const DenseMatrix& sstar,
                 const ObservationMask& mask, double threshold) {
  if (s.rows() != sstar.rows() || s.cols() != sstar.cols())
    throw std::invalid_argument("f_measure: shape mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  const double* sp = s.data();
  const double* tpr = sstar.data();
  for (Index idx : mask.linear()) {
    const bool detected = std::abs(sp[idx]) > threshold;
    const bool truth = tpr[idx] != 0.0;
    if (detected && truth) ++tp;
    else if (detected) ++fp;
    else if (truth) ++fn;
  }
  const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  if (prec + rec == 0.0) return 0.0;
  return 2.0 * prec * rec / (prec + rec);
}

double psnr(const DenseMatrix& image, const DenseMatrix& reference,
            double peak) {
  if (image.rows() != reference.rows() || image.cols() != reference.cols())
    throw std::invalid_argument("psnr: shape mismatch");
  const double mse =
      (image - reference).squaredNorm() / static_cast<double>(image.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

DenseMatrix gen_lowrank_image(Index rows, Index cols, Index rank,
                              std::uint64_t seed) {
  if (rank < 1 || rank > std::min(rows, cols))
    throw std::invalid_argument("gen_lowrank_image: rank out of range");
  RngStream rng(seed);
  DenseMatrix p(rows, rank), q(cols, rank);
  double* pp = p.data();
  for (Index t = 0; t < p.size(); ++t) pp[t] = rng.uniform01();
  double* qp = q.data();
  for (Index t = 0; t < q.size(); ++t) qp[t] = rng.uniform01();
  DenseMatrix img = p * q.transpose();
  const double top = img.maxCoeff();
  if (top > 0.0) img *= 255.0 / top;
  return img;
}

}  // namespace bifactor
