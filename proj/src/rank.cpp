#include "bifactor/rank.hpp"

#include <stdexcept>

namespace bifactor {

RankEstimate estimate_rank(const DenseMatrix& d, const ObservationMask& mask,
                           Index k) {
  if (k <= 0) k = std::min<Index>(100, std::min(d.rows(), d.cols()));
  if (k < 2) throw std::invalid_argument("estimate_rank: k must be >= 2");
  if (mask.is_empty())
    throw std::invalid_argument("estimate_rank: empty observation mask");

  const Eigen::VectorXd sigma = singular_values(project(mask, d)).head(k);
  if (!(sigma(0) > 0.0))
    throw std::invalid_argument("estimate_rank: rank undefined (zero data)");

  RankEstimate out;
  out.singular_values = sigma;
  out.criterion_values.resize(k - 1);
  out.gap_values.resize(k - 1);
  const double floor = 1e-10 * sigma(0);
  Index best = 0;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < k - 1; ++i) {
    const double ratio =
        sigma(i) > 0.0 ? sigma(i + 1) / sigma(i)
                       : std::numeric_limits<double>::quiet_NaN();
    out.criterion_values(i) = ratio;
    out.gap_values(i) = sigma(i) - sigma(i + 1);
    if (sigma(i) > floor && ratio < best_ratio) {
      best_ratio = ratio;
      best = i + 1;  // rank = 1-based index of the last kept value
    }
  }
  if (best == 0)
    throw std::invalid_argument("estimate_rank: rank undefined (zero data)");
  out.rank = best;
  return out;
}

}  // namespace bifactor
