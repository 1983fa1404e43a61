// Dense matrix core: container typedef, observation masks, thin SVD,
// masked projections, SPD solves and the Moore-Penrose pseudo-inverse.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bifactor {

// Row-major carrier for all dense data (D, L, S, U, V, ...).
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

bool all_finite(const DenseMatrix& a);

// Index set of observed entries with projection operators P_Omega and its
// complement. Stored as a sorted list of row-major linear indices; a dense
// boolean view is materialized once density exceeds 25%.
class ObservationMask {
 public:
  ObservationMask() = default;
  // `linear` must contain row-major linear indices; sorted/deduplicated here,
  // duplicates and out-of-range indices are rejected.
  ObservationMask(Index rows, Index cols, std::vector<Index> linear);

  static ObservationMask full(Index rows, Index cols);
  static ObservationMask empty(Index rows, Index cols);
  static ObservationMask from_pairs(
      Index rows, Index cols, const std::vector<std::pair<Index, Index>>& ij);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t count() const { return linear_.size(); }
  double density() const;
  bool is_full() const { return static_cast<Index>(count()) == rows_ * cols_; }
  bool is_empty() const { return linear_.empty(); }

  bool observed(Index i, Index j) const;
  const std::vector<Index>& linear() const { return linear_; }
  ObservationMask complement() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> linear_;        // sorted, unique
  std::vector<std::uint8_t> dense_;  // nonempty iff density > 0.25
};

// P_Omega(A): entries on the mask kept, all others zero.
DenseMatrix project(const ObservationMask& mask, const DenseMatrix& a);
// P_Omega^perp(A) = A - P_Omega(A).
DenseMatrix project_complement(const ObservationMask& mask,
                               const DenseMatrix& a);

// Top-k singular triplets. Columns of `left`/`right` are orthonormal,
// singular values nonincreasing and nonnegative. Sign convention: the
// largest-magnitude entry of every left singular vector is nonnegative
// (first such entry on ties), so repeated runs are bit-identical.
struct ThinSvd {
  DenseMatrix left;                // m x k
  Eigen::VectorXd singular_values; // k, nonincreasing
  DenseMatrix right;               // n x k
};

ThinSvd thin_svd(const DenseMatrix& a, Index k);

// All singular values of `a`, nonincreasing (no singular vectors computed).
Eigen::VectorXd singular_values(const DenseMatrix& a);

// Largest singular value.
double spectral_norm(const DenseMatrix& a);

// Returns B * G^{-1} where G is d x d symmetric positive definite
// (alpha*I + M^T M). Uses a Cholesky factorization, never an explicit
// inverse. Throws if G is not SPD.
DenseMatrix solve_gram(const DenseMatrix& b, const DenseMatrix& g);

// Moore-Penrose pseudo-inverse via thin SVD; inverts only singular values
// above max(m, n) * machine-epsilon * sigma_max.
DenseMatrix pseudo_inverse(const DenseMatrix& a);

// Text format: first line "rows cols", then `rows` lines of `cols`
// space-separated decimal values; unobserved entries are written as "nan"
// and become the mask complement on load (their value is set to 0).
struct LoadedMatrix {
  DenseMatrix values;
  ObservationMask mask;
};

LoadedMatrix load_matrix(const std::string& path);
void write_matrix(const std::string& path, const DenseMatrix& a);
void write_matrix(const std::string& path, const DenseMatrix& a,
                  const ObservationMask& mask);

}  // namespace bifactor
