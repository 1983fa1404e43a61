// Closed-form proximal operators: soft thresholding, singular value
// thresholding, and the half / two-thirds thresholding operators that solve
//   min_x (x - a)^2 + gamma * |x|^p   for p = 1/2 and p = 2/3.
#pragma once

#include "bifactor/dense.hpp"

namespace bifactor {

// max(|x| - tau, 0) * sgn(x).
double soft_threshold(double x, double tau);

// Soft-thresholds the singular values of A, keeping the singular subspaces
// of the surviving values.
DenseMatrix svt(const DenseMatrix& a, double tau);

// Global minimizer of (x - a)^2 + gamma * |x|^{1/2}. Zero at and below the
// tie threshold cbrt(54 gamma^2)/4; odd in a.
double half_threshold(double a, double gamma);

// Global minimizer of (x - c)^2 + gamma * |x|^{2/3}. Zero at and below the
// tie threshold (2/3) * (3 gamma^3)^{1/4}; odd in c.
double two_thirds_threshold(double c, double gamma);

// Magnitude of `a` at which the half-threshold output becomes nonzero.
double half_threshold_point(double gamma);
// Same for the two-thirds operator.
double two_thirds_threshold_point(double gamma);

DenseMatrix half_threshold_matrix(const DenseMatrix& a, double gamma);
DenseMatrix two_thirds_threshold_matrix(const DenseMatrix& c, double gamma);

}  // namespace bifactor
