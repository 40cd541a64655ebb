#include "latpos/gaussian.hpp"

namespace latpos {

GaussianProduct gaussian_product(std::span<const GaussianFactor> factors) {
  require(factors.size() >= 2, "factors", "need at least two factors");
  const auto dim = factors.front().center.size();
  for (const auto &f : factors) {
    require(f.center.size() == dim, "factors", "dimension mismatch");
    require(f.scale > 0.0, "factors", "scale must be positive");
  }

  const std::size_t m = factors.size();
  std::vector<double> precision(m);
  double total = 0.0;
  double log_var_product = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double var = factors[i].scale * factors[i].scale;
    precision[i] = 1.0 / var;
    total += precision[i];
    log_var_product += std::log(var);
  }

  Vector center = Vector::Zero(dim);
  for (std::size_t i = 0; i < m; ++i)
    center += (precision[i] / total) * factors[i].center;

  // 1^T (Gamma * (Theta - diag(Theta) 1^T)) 1 with Gamma_rc = prec_r prec_c.
  double xi = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double self = factors[r].center.squaredNorm();
    for (std::size_t c = 0; c < m; ++c)
      xi += precision[r] * precision[c] *
            (factors[r].center.dot(factors[c].center) - self);
  }

  const double two_pi = 2.0 * std::numbers::pi;
  const double log_prefactor =
      0.5 * static_cast<double>(dim) *
      (std::log(two_pi) - static_cast<double>(m) * std::log(two_pi) -
       std::log(total) - log_var_product);
  return {std::exp(log_prefactor + 0.5 * xi / total), std::move(center),
          1.0 / std::sqrt(total)};
}

} // namespace latpos
