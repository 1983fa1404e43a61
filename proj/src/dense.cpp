#include "bifactor/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bifactor {

bool all_finite(const DenseMatrix& a) {
  return a.allFinite();
}

ObservationMask::ObservationMask(Index rows, Index cols,
                                 std::vector<Index> linear)
    : rows_(rows), cols_(cols), linear_(std::move(linear)) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("mask: dimensions must be positive");
  const Index total = rows_ * cols_;
  std::sort(linear_.begin(), linear_.end());
  for (std::size_t t = 0; t < linear_.size(); ++t) {
    if (linear_[t] < 0 || linear_[t] >= total)
      throw std::invalid_argument("mask: index out of range");
    if (t > 0 && linear_[t] == linear_[t - 1])
      throw std::invalid_argument("mask: duplicate index");
  }
  if (density() > 0.25) {
    dense_.assign(static_cast<std::size_t>(total), 0);
    for (Index idx : linear_) dense_[static_cast<std::size_t>(idx)] = 1;
  }
}

ObservationMask ObservationMask::full(Index rows, Index cols) {
  std::vector<Index> linear(static_cast<std::size_t>(rows * cols));
  for (std::size_t t = 0; t < linear.size(); ++t)
    linear[t] = static_cast<Index>(t);
  return ObservationMask(rows, cols, std::move(linear));
}

ObservationMask ObservationMask::empty(Index rows, Index cols) {
  return ObservationMask(rows, cols, {});
}

ObservationMask ObservationMask::from_pairs(
    Index rows, Index cols, const std::vector<std::pair<Index, Index>>& ij) {
  std::vector<Index> linear;
  linear.reserve(ij.size());
  for (const auto& [i, j] : ij) {
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw std::invalid_argument("mask: index out of range");
    linear.push_back(i * cols + j);
  }
  return ObservationMask(rows, cols, std::move(linear));
}

double ObservationMask::density() const {
  return rows_ * cols_ == 0
             ? 0.0
             : static_cast<double>(count()) /
                   static_cast<double>(rows_ * cols_);
}

bool ObservationMask::observed(Index i, Index j) const {
  const Index idx = i * cols_ + j;
  if (!dense_.empty()) return dense_[static_cast<std::size_t>(idx)] != 0;
  return std::binary_search(linear_.begin(), linear_.end(), idx);
}

ObservationMask ObservationMask::complement() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(rows_ * cols_) - count());
  std::size_t t = 0;
  for (Index idx = 0; idx < rows_ * cols_; ++idx) {
    if (t < linear_.size() && linear_[t] == idx) {
      ++t;
    } else {
      out.push_back(idx);
    }
  }
  return ObservationMask(rows_, cols_, std::move(out));
}

static void check_shape(const ObservationMask& mask, const DenseMatrix& a) {
  if (a.rows() != mask.rows() || a.cols() != mask.cols())
    throw std::invalid_argument("projection: matrix shape does not match mask");
}

DenseMatrix project(const ObservationMask& mask, const DenseMatrix& a) {
  check_shape(mask, a);
  if (mask.is_full()) return a;
  DenseMatrix out = DenseMatrix::Zero(a.rows(), a.cols());
  const double* src = a.data();
  double* dst = out.data();
  for (Index idx : mask.linear()) dst[idx] = src[idx];
  return out;
}

DenseMatrix project_complement(const ObservationMask& mask,
                               const DenseMatrix& a) {
  check_shape(mask, a);
  if (mask.is_full()) return DenseMatrix::Zero(a.rows(), a.cols());
  DenseMatrix out = a;
  double* dst = out.data();
  for (Index idx : mask.linear()) dst[idx] = 0.0;
  return out;
}

// Flips singular-vector pairs so the largest-magnitude entry of each left
// vector is nonnegative (first such entry decides on a tie).
static void fix_signs(DenseMatrix& left, DenseMatrix& right) {
  for (Index j = 0; j < left.cols(); ++j) {
    Index arg = 0;
    double best = 0.0;
    for (Index i = 0; i < left.rows(); ++i) {
      const double mag = std::abs(left(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (left(arg, j) < 0.0) {
      left.col(j) = -left.col(j);
      right.col(j) = -right.col(j);
    }
  }
}

ThinSvd thin_svd(const DenseMatrix& a, Index k) {
  if (k < 1 || k > std::min(a.rows(), a.cols()))
    throw std::invalid_argument("thin_svd: k out of range");
  Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw std::runtime_error("thin_svd: SVD iteration failed to converge");
  ThinSvd out;
  out.left = svd.matrixU().leftCols(k);
  out.right = svd.matrixV().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  fix_signs(out.left, out.right);
  return out;
}

Eigen::VectorXd singular_values(const DenseMatrix& a) {
  Eigen::BDCSVD<DenseMatrix> svd(a);
  if (svd.info() != Eigen::Success)
    throw std::runtime_error("singular_values: SVD failed to converge");
  return svd.singularValues();
}

double spectral_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

DenseMatrix solve_gram(const DenseMatrix& b, const DenseMatrix& g) {
  if (g.rows() != g.cols())
    throw std::invalid_argument("solve_gram: G must be square");
  if (b.cols() != g.rows())
    throw std::invalid_argument("solve_gram: B and G dimensions mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_gram: G is not positive definite");
  // X G = B  <=>  G X^T = B^T (G symmetric).
  Eigen::MatrixXd xt = llt.solve(Eigen::MatrixXd(b.transpose()));
  return DenseMatrix(xt.transpose());
}

DenseMatrix pseudo_inverse(const DenseMatrix& a) {
  const Index k = std::min(a.rows(), a.cols());
  ThinSvd svd = thin_svd(a, k);
  const double smax = svd.singular_values.size() ? svd.singular_values(0) : 0.0;
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * smax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
  for (Index i = 0; i < k; ++i)
    if (svd.singular_values(i) > tol) inv(i) = 1.0 / svd.singular_values(i);
  return svd.right * inv.asDiagonal() * svd.left.transpose();
}

LoadedMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw std::runtime_error("bad matrix header in " + path);
  DenseMatrix values = DenseMatrix::Zero(rows, cols);
  std::vector<Index> observed;
  observed.reserve(static_cast<std::size_t>(rows * cols));
  std::string tok;
  for (Index idx = 0; idx < rows * cols; ++idx) {
    if (!(in >> tok))
      throw std::runtime_error("truncated matrix data in " + path);
    if (tok == "nan" || tok == "NaN" || tok == "NAN") continue;
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::runtime_error("bad matrix entry '" + tok + "' in " + path);
    }
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite matrix entry in " + path);
    values.data()[idx] = v;
    observed.push_back(idx);
  }
  return LoadedMatrix{std::move(values),
                      ObservationMask(rows, cols, std::move(observed))};
}

static void write_matrix_impl(const std::string& path, const DenseMatrix& a,
                              const ObservationMask* mask) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path);
  out << a.rows() << ' ' << a.cols() << '\n';
  char buf[40];
  std::size_t t = 0;
  const auto& lin = mask ? mask->linear() : std::vector<Index>{};
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      const Index idx = i * a.cols() + j;
      bool obs = true;
      if (mask) {
        while (t < lin.size() && lin[t] < idx) ++t;
        obs = t < lin.size() && lin[t] == idx;
      }
      if (!obs) {
        out << "nan";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_matrix(const std::string& path, const DenseMatrix& a) {
  write_matrix_impl(path, a, nullptr);
}

void write_matrix(const std::string& path, const DenseMatrix& a,
                  const ObservationMask& mask) {
  check_shape(mask, a);
  write_matrix_impl(path, a, &mask);
}

}  // namespace bifactor
