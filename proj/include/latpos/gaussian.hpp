#pragma once

#include "latpos/core.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace latpos {

/// Isotropic normal density in R^d with squared distance `dist2` from the
/// mean and per-coordinate variance `var`.
inline double isotropic_pdf(double dist2, double var, int dim) {
  return std::exp(-0.5 * dist2 / var) /
         std::pow(2.0 * std::numbers::pi * var, 0.5 * dim);
}

/// phi(x; c, s): normal density with mean c and covariance s^2 I.
inline double normal_pdf(const Eigen::Ref<const Vector> &x,
                         const Eigen::Ref<const Vector> &c, double s) {
  return isotropic_pdf((x - c).squaredNorm(), s * s, static_cast<int>(x.size()));
}

/// One factor phi(x; center, scale) of a Gaussian product.
struct GaussianFactor {
  Vector center;
  double scale;
};

/// prod_m phi(x; center_m, scale_m) == coefficient * phi(x; center, scale).
struct GaussianProduct {
  double coefficient;
  Vector center;
  double scale;
};

/// Collapses a product of isotropic Gaussian densities into one scaled
/// Gaussian density. Requires at least two factors of equal dimension.
GaussianProduct gaussian_product(std::span<const GaussianFactor> factors);

} // namespace latpos
