#include "latpos/messaging.hpp"

#include <algorithm>
#include <cmath>

namespace latpos {

double pair_intensity_posterior(const Eigen::Ref<const Vector> &wi,
                                const Eigen::Ref<const Vector> &wj, double rate_i,
                                double rate_j, const Matrix &gram) {
  require(wi.size() == gram.rows() && wj.size() == gram.rows(), "w",
          "weight length must match the basis size");
  return rate_i * rate_j * wi.dot(gram * wj);
}

double pair_intensity_kernel(const Eigen::Ref<const Vector> &xi,
                             const Eigen::Ref<const Vector> &xj, double rate_i,
                             double rate_j) {
  require(xi.size() == xj.size(), "x", "dimension mismatch");
  return rate_i * rate_j * std::exp(-(xi - xj).squaredNorm());
}

PairClocks::PairClocks(int actors, Rng &rng) : n_(actors) {
  require(actors >= 2, "actors", "need at least two actors");
  std::exponential_distribution<double> unit(1.0);
  residual_.resize(static_cast<std::size_t>(actors) * (actors - 1) / 2);
  for (double &r : residual_)
    r = unit(rng);
}

void PairClocks::set_residual(int i, int j, double value) {
  require(value > 0.0, "residual", "must be positive");
  residual_[pair_index(i, j, n_)] = value;
}

std::vector<MessageEvent> PairClocks::advance(double t, const Matrix &intensities,
                                              double dt, Rng &rng) {
  require(intensities.rows() == n_ && intensities.cols() == n_, "intensities",
          "must be n x n");
  require(dt > 0.0, "dt", "must be positive");
  std::exponential_distribution<double> unit(1.0);
  std::vector<MessageEvent> events;
  for (int i = 0; i < n_ - 1; ++i)
    for (int j = i + 1; j < n_; ++j) {
      const double rate = intensities(i, j);
      require(rate >= 0.0 && std::isfinite(rate), "intensities",
              "must be finite and non-negative");
      if (rate == 0.0)
        continue;
      double &residual = residual_[pair_index(i, j, n_)];
      double budget = rate * dt;
      double elapsed = 0.0;
      while (residual <= budget) {
        budget -= residual;
        elapsed += residual / rate;
        events.push_back({t + std::min(elapsed, dt), i, j});
        residual = unit(rng);
      }
      residual -= budget;
    }
  std::stable_sort(events.begin(), events.end(),
                   [](const MessageEvent &a, const MessageEvent &b) { return a.t < b.t; });
  return events;
}

} // namespace latpos
