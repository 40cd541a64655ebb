#pragma once

#include "latpos/core.hpp"
#include "latpos/rng.hpp"

#include <vector>

namespace latpos {

/// One undirected message between actors i < j (zero-based) at time t.
struct MessageEvent {
  double t = 0.0;
  int i = 0;
  int j = 0;

  friend bool operator==(const MessageEvent &, const MessageEvent &) = default;
};

/// lambda_i lambda_j w_i^T G w_j for a pairing matrix G (the basis Gram
/// matrix for posterior-driven intensities).
double pair_intensity_posterior(const Eigen::Ref<const Vector> &wi,
                                const Eigen::Ref<const Vector> &wj, double rate_i,
                                double rate_j, const Matrix &gram);

/// lambda_i lambda_j exp(-|x_i - x_j|^2).
double pair_intensity_kernel(const Eigen::Ref<const Vector> &xi,
                             const Eigen::Ref<const Vector> &xj, double rate_i,
                             double rate_j);

/// Index of the unordered pair (i, j), i < j, in row-major upper-triangular order.
inline std::size_t pair_index(int i, int j, int n) {
  const auto a = static_cast<std::size_t>(i);
  const auto b = static_cast<std::size_t>(j);
  const auto m = static_cast<std::size_t>(n);
  return a * (2 * m - a - 1) / 2 + (b - a - 1);
}

/// Residual unit-exponential clocks, one per unordered pair. Simulates the
/// pair counting processes by the time-change construction: each clock is
/// decremented by the integrated intensity and fires when it crosses zero.
class PairClocks {
public:
  PairClocks(int actors, Rng &rng);

  int actors() const noexcept { return n_; }
  double residual(int i, int j) const { return residual_[pair_index(i, j, n_)]; }
  void set_residual(int i, int j, double value);

  /// Advances all clocks over [t, t + dt] under constant intensities
  /// (upper triangle of `intensities` is read). Crossing times are linearly
  /// interpolated within the step; a clock that fires restarts from a fresh
  /// unit exponential at the crossing time. Events come back time-sorted.
  std::vector<MessageEvent> advance(double t, const Matrix &intensities, double dt,
                                    Rng &rng);

private:
  int n_;
  std::vector<double> residual_;
};

} // namespace latpos
