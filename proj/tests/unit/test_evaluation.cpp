#include "latpos/basis.hpp"
#include "latpos/evaluation.hpp"

#include "../oracle/partitions.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace latpos;

TEST_CASE("kmeans") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N01;
  Matrix X(10, 1);
  for (int i = 0; i < 10; ++i)
    X(i, 0) = (i < 5 ? 0.0 : 10.0) + 0.1 * N01(rng);

  const auto one = kmeans(X, 1, 1);
  for (int l : one.labels)
    CHECK(l == 1);
  CHECK(one.centroids(0, 0) == doctest::Approx(X.mean()));

  const auto all = kmeans(X, 10, 1);
  CHECK(all.inertia == doctest::Approx(0.0).scale(1.0));
  CHECK(std::set<int>(all.labels.begin(), all.labels.end()).size() == 10);

  // exhaustive search over every 2-labelling
  double best = std::numeric_limits<double>::infinity();
  int best_mask = 0;
  for (int mask = 1; mask < (1 << 10) - 1; ++mask) {
    double s[2] = {0, 0}, n[2] = {0, 0}, ss = 0;
    for (int i = 0; i < 10; ++i) {
      const int g = (mask >> i) & 1;
      s[g] += X(i, 0);
      n[g] += 1;
      ss += X(i, 0) * X(i, 0);
    }
    const double inertia = ss - s[0] * s[0] / n[0] - s[1] * s[1] / n[1];
    if (inertia < best) {
      best = inertia;
      best_mask = mask;
    }
  }
  const auto two = kmeans(X, 2, 7);
  CHECK(two.inertia == doctest::Approx(best).epsilon(1e-10));
  Labels brute(10);
  for (int i = 0; i < 10; ++i)
    brute[i] = ((best_mask >> i) & 1) + 1;
  CHECK(ari(two.labels, brute) == 1.0);

  CHECK(kmeans(X, 2, 7).labels == two.labels);
  CHECK_THROWS_AS(kmeans(X, 11, 1), ValidationError);
}

TEST_CASE("adjusted Rand index") {
  const Labels a{1, 1, 2, 2, 3, 3};
  CHECK(ari(a, a) == 1.0);
  CHECK(ari(a, Labels{3, 3, 1, 1, 2, 2}) == 1.0);
  const Labels x{1, 1, 2, 2}, y{1, 2, 1, 2};
  CHECK(ari(x, y) == doctest::Approx(oracle::ari_pairs(x, y)).epsilon(1e-14));
  CHECK(ari(x, y) == doctest::Approx(-0.5));
  CHECK(ari(a, Labels{1, 2, 1, 2, 1, 2}) == ari(Labels{1, 2, 1, 2, 1, 2}, a));
  CHECK(ari(a, Labels{1, 1, 2, 2, 3, 4}) < 1.0);
  CHECK_THROWS_AS(ari(x, a), ValidationError);
}

TEST_CASE("moving ARI") {
  const Labels ref{1, 1, 2, 2};
  CHECK(moving_ari({ref, ref, ref}, ref, 5) == std::vector<double>{1, 1, 1});
  const Labels anti{1, 2, 1, 2};
  const std::vector<Labels> series{ref, anti, ref, anti};
  const auto w1 = moving_ari(series, ref, 1);
  for (std::size_t t = 0; t < series.size(); ++t)
    CHECK(w1[t] == doctest::Approx(ari(series[t], ref)).epsilon(1e-15));
  const auto w2 = moving_ari(series, ref, 2);
  CHECK(w2[0] == 1.0);
  for (std::size_t t = 1; t < series.size(); ++t)
    CHECK(w2[t] == doctest::Approx(0.5 * (1.0 + ari(anti, ref))));
}

namespace {
std::vector<Matrix> two_groups(int steps, double gap_start, double gap_end) {
  std::vector<Matrix> out;
  for (int m = 0; m < steps; ++m) {
    const double g = gap_start + (gap_end - gap_start) * m / (steps - 1);
    Matrix X(6, 1);
    X << 0.0, 0.1, 0.2, 0.5 + g, 0.6 + g, 0.7 + g;
    X(2, 0) = m < steps / 2 ? 0.55 + g : 0.2; // actor 3 switches group halfway
    out.push_back(X);
  }
  return out;
}
} // namespace

TEST_CASE("latency") {
  const int steps = 40;
  std::vector<double> times;
  for (int m = 0; m < steps; ++m)
    times.push_back(0.25 * m);
  const auto truth = two_groups(steps, 0.0, 2.0);

  LatencyOptions opt;
  opt.window = 3;
  const auto same = latency(truth, truth, times, opt);
  CHECK(same.delta == 0.0);
  CHECK(same.sustained);
  CHECK(same.zeta > 0.0);

  // an estimate that never separates the groups
  std::vector<Matrix> mixed;
  for (int m = 0; m < steps; ++m) {
    Matrix X(6, 1);
    X << 0.0, 1.0, 0.0, 1.0, 0.0, 1.0;
    mixed.push_back(X);
  }
  const auto never = latency(mixed, truth, times, opt);
  CHECK_FALSE(never.sustained_hat);
  CHECK(never.zeta_hat == times.back());
  CHECK(never.delta == doctest::Approx(times.back() - never.zeta));

  // a stricter threshold never settles earlier
  double prev = -1.0;
  for (double eps : {0.5, 0.2, 0.05}) {
    opt.epsilon = eps;
    const auto r = latency(truth, truth, times, opt);
    CHECK(r.zeta >= prev);
    prev = r.zeta;
  }
}

TEST_CASE("KL matrix") {
  const double s = 0.2;
  Matrix centers(2, 1);
  centers << 0.0, 0.3;
  const auto b = BasisSet::gaussian(centers, s);
  std::vector<double> grid;
  for (int k = 0; k <= 6000; ++k)
    grid.push_back(-3.0 + k * 1e-3);
  Matrix W(2, 2);
  W << 1, 0, 0, 1;
  const Matrix D = kl_matrix(W, b, grid);
  CHECK(D(0, 0) == 0.0);
  CHECK(D(0, 1) == doctest::Approx(0.09 / (2 * s * s)).epsilon(1e-6));

  Matrix same(3, 2);
  same << 0.4, 0.6, 0.4, 0.6, 0.4, 0.6;
  CHECK(kl_matrix(same, b, grid).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto g = BasisSet::gaussian_grid(0.0, 1.0, 0.1, 0.1);
  Matrix R(5, g.size());
  for (int i = 0; i < R.size(); ++i)
    R.data()[i] = U(rng);
  for (int i = 0; i < 5; ++i)
    R.row(i) /= R.row(i).sum();
  std::vector<double> g2;
  for (int k = 0; k <= 3000; ++k)
    g2.push_back(-1.0 + k * 1e-3);
  const Matrix K = kl_matrix(R, g, g2);
  CHECK(K.minCoeff() >= -1e-12);
  CHECK(K.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("settle time") {
  const std::vector<double> t{0, 1, 2, 3, 4};
  double when = 0;
  CHECK(settle_time({0.2, 0.95, 0.5, 0.92, 1.0}, t, 0.9, when));
  CHECK(when == 3.0);
  CHECK_FALSE(settle_time({0.2, 0.95, 0.5, 0.92, 0.1}, t, 0.9, when));
  CHECK(when == 4.0);
}
