#include "latpos/evaluation.hpp"

#include "latpos/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace latpos {

namespace {

// k-means++ seeding: first center uniform, then proportional to D^2.
Matrix seed_centroids(const Matrix &X, int k, Rng &rng) {
  const Eigen::Index n = X.rows();
  Matrix C(k, X.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  C.row(0) = X.row(pick(rng));
  Vector d2 = (X.rowwise() - C.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double u = unif(rng) * total;
      for (chosen = 0; chosen < n - 1; ++chosen) {
        u -= d2[chosen];
        if (u < 0.0)
          break;
      }
    } else {
      chosen = pick(rng); // all points coincide with existing centers
    }
    C.row(c) = X.row(chosen);
    d2 = d2.cwiseMin((X.rowwise() - C.row(c)).rowwise().squaredNorm());
  }
  return C;
}

double assign(const Matrix &X, const Matrix &C, std::vector<int> &labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index best = 0;
    inertia += (C.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return inertia;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

} // namespace

KMeansResult kmeans(const Matrix &X, int k, std::uint64_t seed, int restarts, int max_iter) {
  const Eigen::Index n = X.rows();
  require(k >= 1, "k", "must be positive");
  require(k <= n, "k", "must not exceed the number of points");
  require(restarts >= 1, "restarts", "must be positive");
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int rep = 0; rep < restarts; ++rep) {
    Matrix C = seed_centroids(X, k, rng);
    double inertia = assign(X, C, labels);
    for (int it = 0; it < max_iter; ++it) {
      Matrix sums = Matrix::Zero(k, X.cols());
      Vector counts = Vector::Zero(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
        counts[labels[static_cast<std::size_t>(i)]] += 1.0;
      }
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0.0)
          C.row(c) = sums.row(c) / counts[c]; // empty clusters keep their center
      const double next = assign(X, C, labels);
      if (next > inertia * (1.0 + 1e-12) + 1e-300)
        throw NumericalError("k-means objective increased");
      const bool done = next >= inertia;
      inertia = next;
      if (done)
        break;
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.centroids = C;
      best.labels.assign(labels.begin(), labels.end());
    }
  }
  for (auto &l : best.labels)
    ++l;
  return best;
}

double ari(const Labels &a, const Labels &b) {
  require(a.size() == b.size(), "labels", "length mismatch");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t k = 0; k < a.size(); ++k) {
    table[{a[k], b[k]}] += 1.0;
    rows[a[k]] += 1.0;
    cols[b[k]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto &[key, v] : table)
    index += choose2(v);
  for (const auto &[key, v] : rows)
    sum_a += choose2(v);
  for (const auto &[key, v] : cols)
    sum_b += choose2(v);
  const double total = choose2(n);
  if (total == 0.0)
    return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected)
    return 1.0; // both partitions trivial in the same way
  return (index - expected) / (max_index - expected);
}

std::vector<double> moving_ari(const std::vector<Labels> &series, const Labels &reference,
                               int window) {
  require(window >= 1, "window", "must be at least 1");
  std::vector<double> point(series.size()), out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t)
    point[t] = ari(series[t], reference);
  double running = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    running += point[t];
    if (t >= static_cast<std::size_t>(window))
      running -= point[t - static_cast<std::size_t>(window)];
    const auto count = std::min<std::size_t>(t + 1, static_cast<std::size_t>(window));
    out[t] = running / static_cast<double>(count);
  }
  return out;
}

bool settle_time(const std::vector<double> &curve, const std::vector<double> &times,
                 double threshold, double &when) {
  require(curve.size() == times.size() && !curve.empty(), "times", "length mismatch");
  std::size_t m = curve.size();
  while (m > 0 && curve[m - 1] >= threshold)
    --m;
  if (m == curve.size()) {
    when = times.back();
    return false;
  }
  when = times[m];
  return true;
}

LatencyReport latency(const std::vector<Matrix> &estimated, const std::vector<Matrix> &truth,
                      const std::vector<double> &times, const LatencyOptions &options) {
  require(estimated.size() == truth.size() && truth.size() == times.size() && !times.empty(),
          "trajectories", "must share one time grid");
  require(options.epsilon > 0.0 && options.epsilon < 1.0, "epsilon", "must lie in (0, 1)");
  SeedTree seeds(options.seed);
  const Labels reference = kmeans(truth.back(), options.clusters, seeds.seed("kmeans")).labels;
  std::vector<Labels> true_labels, est_labels;
  for (std::size_t t = 0; t < times.size(); ++t) {
    true_labels.push_back(kmeans(truth[t], options.clusters, seeds.seed("kmeans", 2 * t + 1)).labels);
    est_labels.push_back(kmeans(estimated[t], options.clusters, seeds.seed("kmeans", 2 * t + 2)).labels);
  }
  LatencyReport out;
  out.mari = moving_ari(true_labels, reference, options.window);
  out.mari_hat = moving_ari(est_labels, reference, options.window);
  const double threshold = 1.0 - options.epsilon;
  out.sustained = settle_time(out.mari, times, threshold, out.zeta);
  out.sustained_hat = settle_time(out.mari_hat, times, threshold, out.zeta_hat);
  out.delta = out.zeta_hat - out.zeta;
  return out;
}

Matrix kl_matrix(const Matrix &W, const BasisSet &basis, const std::vector<double> &grid) {
  require(basis.dim() == 1, "basis", "KL matrices need a one-dimensional basis");
  require(grid.size() >= 2, "grid", "needs at least two points");
  const double width = grid[1] - grid[0];
  require(width > 0.0, "grid", "must be increasing");
  const Eigen::Index n = W.rows();
  Matrix logp(n, static_cast<Eigen::Index>(grid.size()));
  Matrix p(n, logp.cols());
  Vector x(1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index g = 0; g < logp.cols(); ++g) {
      x[0] = grid[static_cast<std::size_t>(g)];
      const double v = std::max(basis.density(W.row(i).transpose(), x), 1e-300);
      p(i, g) = v;
      logp(i, g) = std::log(v);
    }
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        D(i, j) = (p.row(i).array() * (logp.row(i) - logp.row(j)).array()).sum() * width;
  return D;
}

} // namespace latpos
