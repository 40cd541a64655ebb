#pragma once

#include "latpos/basis.hpp"
#include "latpos/core.hpp"

#include <cstdint>
#include <vector>

namespace latpos {

/// Cluster labels 1..k, one per row of the clustered matrix.
using Labels = std::vector<int>;

struct KMeansResult {
  Labels labels;
  Matrix centroids; ///< k x d
  double inertia = 0.0;
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` runs.
/// Deterministic for a given seed.
KMeansResult kmeans(const Matrix &X, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300);

/// Adjusted Rand index (Hubert & Arabie) from the contingency table. Two
/// trivial partitions (both all-singletons or both one block) score 1.
double ari(const Labels &a, const Labels &b);

/// Trailing mean of ari(series[t], reference) over `window` entries; the
/// first window - 1 values average the available prefix.
std::vector<double> moving_ari(const std::vector<Labels> &series, const Labels &reference,
                               int window);

struct LatencyReport {
  double zeta = 0.0;      ///< truth settles from here on
  double zeta_hat = 0.0;  ///< embedding settles from here on
  double delta = 0.0;     ///< zeta_hat - zeta
  bool sustained = true;      ///< truth reached the threshold
  bool sustained_hat = true;  ///< estimate reached the threshold
  std::vector<double> mari;     ///< truth curve
  std::vector<double> mari_hat; ///< estimate curve
};

struct LatencyOptions {
  double epsilon = 0.1;
  int clusters = 2;
  int window = 10;
  std::uint64_t seed = 0;
};

/// Earliest grid time from which the curve stays >= threshold to the end.
/// Returns false (and sets `when` to the last time) if it never gets there.
bool settle_time(const std::vector<double> &curve, const std::vector<double> &times,
                 double threshold, double &when);

/// Latency of clusterings of `estimated` relative to those of `truth`, both
/// evaluated against the clustering of the final true configuration.
/// Positions are one n x d matrix per grid time.
LatencyReport latency(const std::vector<Matrix> &estimated, const std::vector<Matrix> &truth,
                      const std::vector<double> &times, const LatencyOptions &options);

/// D_ij = sum_grid p_i log(p_i / p_j) * cell width, densities floored at
/// 1e-300, on an equally spaced 1-d grid.
Matrix kl_matrix(const Matrix &W, const BasisSet &basis, const std::vector<double> &grid);

} // namespace latpos
