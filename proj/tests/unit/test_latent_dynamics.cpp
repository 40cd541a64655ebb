#include "latpos/experiment.hpp"
#include "latpos/latent_dynamics.hpp"

#include "../oracle/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace latpos;

namespace {
Vector v1(double x) { return Vector::Constant(1, x); }
const double kAlpha = std::sqrt(1.0 / 3.0);
} // namespace

TEST_CASE("coefficients: drift vanishes at the component center") {
  const auto dd = coefficients(v1(0.7), ActorParams{0.3, 0.5, 1.0},
                               MixturePopulation::single(0.7, 0.4));
  CHECK(dd.drift[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(dd.diffusion(0, 0) > 0.0);
}

TEST_CASE("coefficients: full confidence freezes the actor") {
  const auto dd = coefficients(v1(0.2), ActorParams{1.0 - 1e-12, 0.5, 1.0},
                               MixturePopulation::single(1.0, 0.4));
  CHECK(std::abs(dd.drift[0]) < 1e-10);
  CHECK(std::abs(dd.diffusion(0, 0)) < 1e-20);
}

TEST_CASE("coefficients: Exp-1 parameters against quadrature") {
  const oracle::Mixture mix{{1.0}, {0.0}, {kAlpha}};
  const auto dd =
      coefficients(v1(1.0), ActorParams{0.1, kAlpha, 5.0}, MixturePopulation::single(0.0, kAlpha));
  const double b = oracle::drift(1.0, 0.1, kAlpha, mix);
  const double a = oracle::diffusion(1.0, 0.1, kAlpha, mix);
  CHECK(std::abs(dd.drift[0] - b) < 1e-6 * std::abs(b));
  CHECK(std::abs(dd.diffusion(0, 0) - a) < 1e-6 * std::abs(a));
}

TEST_CASE("coefficients: histogram path agrees with quadrature") {
  const HistogramDensity h(0.0, 0.25, {1.0, 0.5, 1.5, 1.0});
  const ActorParams p{0.2, 0.25, 1.0};
  for (double x : {-0.1, 0.3, 0.55, 1.2}) {
    const auto dd = coefficients(v1(x), p, h);
    double b = 0.0, a = 0.0;
    for (int k = 0; k < h.bins(); ++k) {
      const auto f = [&](double y, int power) {
        const double u = y - x;
        return std::exp(-0.5 * u * u / (0.25 * 0.25)) * std::pow(u, power) * h.heights()[k];
      };
      b += oracle::integrate([&](double y) { return f(y, 1); }, h.lower(k), h.lower(k + 1));
      a += oracle::integrate([&](double y) { return f(y, 2); }, h.lower(k), h.lower(k + 1));
    }
    CHECK(dd.drift[0] == doctest::Approx(2 * 0.8 * b).epsilon(1e-10));
    CHECK(dd.diffusion(0, 0) == doctest::Approx(0.64 * a).epsilon(1e-10));
  }
}

TEST_CASE("sqrt_spd") {
  CHECK((sqrt_spd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-14);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  Matrix e = Matrix::Zero(2, 2);
  e.diagonal() << 2.0, 3.0;
  CHECK((sqrt_spd(d) - e).norm() < 1e-14);

  Rng rng(5);
  std::normal_distribution<double> N01;
  Matrix G(4, 4);
  for (int i = 0; i < 16; ++i)
    G.data()[i] = N01(rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  Vector lam(4);
  lam << 0.5, 2.0, 0.5, 2.0;
  const Matrix A = Q * lam.asDiagonal() * Q.transpose();
  const Matrix S = sqrt_spd(A);
  CHECK((S * S - A).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((S - S.transpose()).norm() < 1e-12);

  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = -1e-11;
  CHECK(sqrt_spd(neg).norm() == 0.0);
  neg(0, 0) = -1e-6;
  CHECK_THROWS_AS(sqrt_spd(neg), NumericalError);
}

TEST_CASE("simulate_paths: near-full confidence keeps actors put") {
  const std::vector<ActorParams> params(3, ActorParams{1.0 - 1e-12, 0.5, 1.0});
  const auto sched = PopulationSchedule::constant(MixturePopulation::single(2.0, 0.5), 1.0);
  Matrix X0(3, 1);
  X0 << -1.0, 0.0, 1.0;
  const auto tr = simulate_paths(X0, params, sched, 0.01, 1.0, SeedTree(1));
  CHECK(tr.positions.size() == 101);
  CHECK((tr.positions.back() - X0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("simulate_paths: drift toward a population far to the right") {
  const std::vector<ActorParams> params(1, ActorParams{0.1, 1.0, 1.0});
  const auto sched = PopulationSchedule::constant(MixturePopulation::single(6.0, 0.5), 1.0);
  const Matrix X0 = Matrix::Zero(1, 1);
  const auto tr = simulate_paths(X0, params, sched, 0.01, 1.0, SeedTree(2), {false});
  for (std::size_t m = 1; m < tr.positions.size(); ++m)
    CHECK(tr.positions[m](0, 0) > tr.positions[m - 1](0, 0));
}

// Frozen regression: 94 of seeds 1..100 stay inside [-2, 3] for all 500 steps
// (the excursions are upward, above 3, during the first population phase).
TEST_CASE("simulate_paths: Exp-1 envelope") {
  auto cfg = exp1_config("cI", 1);
  const double T = 500 * cfg.dt;
  const auto sched = cfg.schedule.build(T);
  const std::vector<ActorParams> params(8, ActorParams{cfg.omega, cfg.sigma, cfg.lambda});
  const auto &pop = std::get<MixturePopulation>(sched.population(0));
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SeedTree seeds(seed);
    auto rng = seeds.stream("population");
    Matrix X0(8, 1);
    for (int i = 0; i < 8; ++i)
      X0.row(i) = pop.sample(rng).transpose();
    const auto tr = simulate_paths(X0, params, sched, cfg.dt, T, seeds);
    bool ok = true;
    for (const auto &X : tr.positions)
      ok = ok && X.minCoeff() >= -2.0 && X.maxCoeff() <= 3.0;
    inside += ok;
  }
  CHECK(inside >= 90);
}

TEST_CASE("bounded confidence") {
  Vector x(2);
  x << 0.0, 0.2;
  CHECK(bounded_confidence_interact(x, 0, 1, 0.25, 0.5));
  CHECK(x[0] == doctest::Approx(0.1));
  CHECK(x[1] == doctest::Approx(0.1));

  x << 0.0, 0.2;
  bounded_confidence_interact(x, 0, 1, 0.25, 1.0);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.2);

  x << 0.0, 0.5;
  Rng rng(9);
  for (int m = 0; m < 1000; ++m)
    bounded_confidence_step(x, {0.25, 0.5, 5.0}, 0.1, rng);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.5);

  // pairwise sums are preserved by every interaction
  Vector y(20);
  for (int k = 0; k < 20; ++k)
    y[k] = 0.05 * k;
  const double total = y.sum();
  for (int m = 0; m < 200; ++m)
    bounded_confidence_step(y, {0.25, 0.2, 0.5}, 0.05, rng);
  CHECK(y.sum() == doctest::Approx(total).epsilon(1e-12));
  CHECK_THROWS_AS(bounded_confidence_step(y, {1.5, 0.2, 0.5}, 0.05, rng), ValidationError);
}
