#include "latpos/latent_dynamics.hpp"

#include "latpos/gaussian.hpp"

#include <cmath>

namespace latpos {

void ActorParams::validate() const {
  require(confidence > 0.0 && confidence < 1.0, "confidence", "must lie in (0, 1)");
  require(visibility > 0.0, "visibility", "must be positive");
  require(message_rate >= 0.0, "message_rate", "must be non-negative");
}

DriftDiffusion component_coefficients(const Eigen::Ref<const Vector> &x,
                                      const ActorParams &params,
                                      const Vector &center, double scale) {
  const auto d = x.size();
  const double sigma2 = params.visibility * params.visibility;
  const double alpha2 = scale * scale;
  const double spread2 = sigma2 + alpha2;
  const double shrink = sigma2 / spread2;
  const double residual_var = sigma2 * alpha2 / spread2;
  const double kernel_mass =
      std::pow(2.0 * std::numbers::pi * sigma2, 0.5 * static_cast<double>(d));
  const Vector offset = x - center;
  const double g = isotropic_pdf(offset.squaredNorm(), spread2, static_cast<int>(d));
  const double keep = 1.0 - params.confidence;

  DriftDiffusion out;
  out.drift = (-2.0 * keep * shrink * kernel_mass * g) * offset;
  out.diffusion = (keep * keep * kernel_mass * g) *
                  (shrink * shrink * offset * offset.transpose() +
                   residual_var * Matrix::Identity(d, d));
  return out;
}

namespace {

DriftDiffusion histogram_coefficients(double x, const ActorParams &params,
                                      const HistogramDensity &hist) {
  // Exact integrals of psi((y-x)/sigma) (y-x)^m over each uniform bin.
  const double s = params.visibility;
  const double s2 = s * s;
  const double erf_scale = s * std::sqrt(std::numbers::pi / 2.0);
  double first = 0.0;
  double second = 0.0;
  for (int k = 0; k < hist.bins(); ++k) {
    const double h = hist.heights()[static_cast<std::size_t>(k)];
    if (h == 0.0)
      continue;
    const double u1 = hist.lower(k) - x;
    const double u2 = hist.lower(k + 1) - x;
    const double e1 = std::exp(-0.5 * u1 * u1 / s2);
    const double e2 = std::exp(-0.5 * u2 * u2 / s2);
    const double gauss = erf_scale * (std::erf(u2 / (s * std::numbers::sqrt2)) -
                                      std::erf(u1 / (s * std::numbers::sqrt2)));
    first += h * s2 * (e1 - e2);
    second += h * (s2 * (u1 * e1 - u2 * e2) + s2 * gauss);
  }
  const double keep = 1.0 - params.confidence;
  DriftDiffusion out;
  out.drift = Vector::Constant(1, 2.0 * keep * first);
  out.diffusion = Matrix::Constant(1, 1, keep * keep * second);
  return out;
}

} // namespace

DriftDiffusion coefficients(const Eigen::Ref<const Vector> &x,
                            const ActorParams &params, const Population &pop) {
  require(x.size() == population_dim(pop), "x", "dimension mismatch");
  if (const auto *hist = std::get_if<HistogramDensity>(&pop))
    return histogram_coefficients(x[0], params, *hist);

  const auto &mix = std::get<MixturePopulation>(pop);
  DriftDiffusion total{Vector::Zero(x.size()), Matrix::Zero(x.size(), x.size())};
  for (const auto &comp : mix.components()) {
    auto part = component_coefficients(x, params, comp.center, comp.scale);
    total.drift += comp.weight * part.drift;
    total.diffusion += comp.weight * part.diffusion;
  }
  return total;
}

Matrix sqrt_spd(const Matrix &a) {
  require(a.rows() == a.cols(), "a", "must be square");
  require((a - a.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()),
          "a", "must be symmetric");
  if (a.rows() == 1) {
    const double v = a(0, 0);
    if (v < -1e-10)
      throw NumericalError("sqrt_spd: negative diffusion coefficient");
    return Matrix::Constant(1, 1, std::sqrt(std::max(v, 0.0)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  Vector values = eig.eigenvalues();
  if (values.minCoeff() < -1e-10)
    throw NumericalError("sqrt_spd: diffusion matrix is not positive semidefinite");
  values = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

LatentTrajectory simulate_paths(const Matrix &init, const CoefficientField &field,
                                double dt, double horizon, std::span<Rng> rngs,
                                PathOptions options) {
  require(dt > 0.0, "dt", "must be positive");
  require(horizon > 0.0, "T", "must be positive");
  require(static_cast<Eigen::Index>(rngs.size()) == init.rows(), "rngs",
          "need one stream per actor");
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  require(steps >= 1, "dt", "horizon shorter than one step");

  LatentTrajectory out;
  out.times.reserve(static_cast<std::size_t>(steps + 1));
  out.positions.reserve(static_cast<std::size_t>(steps + 1));
  out.times.push_back(0.0);
  out.positions.push_back(init);

  const auto d = init.cols();
  const double sqrt_dt = std::sqrt(dt);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x = init;
  Vector z(d);
  for (long m = 0; m < steps; ++m) {
    const double t = static_cast<double>(m) * dt;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Vector xi = x.row(i).transpose();
      const auto coef = field(xi, static_cast<int>(i), t);
      Vector next = xi + coef.drift * dt;
      if (options.second_order) {
        auto &rng = rngs[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < d; ++k)
          z[k] = normal(rng);
        next += sqrt_spd(coef.diffusion) * z * sqrt_dt;
      }
      x.row(i) = next.transpose();
    }
    out.times.push_back(static_cast<double>(m + 1) * dt);
    out.positions.push_back(x);
  }
  return out;
}

LatentTrajectory simulate_paths(const Matrix &init,
                                std::span<const ActorParams> params,
                                const PopulationSchedule &schedule, double dt,
                                double horizon, const SeedTree &seeds,
                                PathOptions options) {
  require(static_cast<Eigen::Index>(params.size()) == init.rows(), "params",
          "need one parameter set per actor");
  require(init.cols() == schedule.dim(), "init", "dimension mismatch");
  for (const auto &p : params)
    p.validate();
  std::vector<Rng> rngs;
  rngs.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    rngs.push_back(seeds.stream("diffusion", i));
  CoefficientField field = [&](const Eigen::Ref<const Vector> &x, int actor,
                               double t) {
    return coefficients(x, params[static_cast<std::size_t>(actor)], schedule.at(t));
  };
  return simulate_paths(init, field, dt, horizon, rngs, options);
}

bool bounded_confidence_interact(Vector &positions, int i, int j, double radius,
                                 double confidence) {
  const double xi = positions[i];
  const double xj = positions[j];
  if (std::abs(xi - xj) > radius)
    return false;
  positions[i] = confidence * xi + (1.0 - confidence) * xj;
  positions[j] = confidence * xj + (1.0 - confidence) * xi;
  return true;
}

void bounded_confidence_step(Vector &positions,
                             const BoundedConfidenceParams &params, double dt,
                             Rng &rng) {
  require(params.radius > 0.0 && params.radius < 1.0, "radius", "must lie in (0, 1)");
  require(params.confidence > 0.0 && params.confidence < 1.0, "confidence",
          "must lie in (0, 1)");
  require(params.pair_rate >= 0.0, "pair_rate", "must be non-negative");
  require(dt > 0.0, "dt", "must be positive");
  if (params.pair_rate == 0.0)
    return;
  std::poisson_distribution<int> opportunities(params.pair_rate * dt);
  const auto n = static_cast<int>(positions.size());
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int count = opportunities(rng);
      for (int c = 0; c < count; ++c)
        bounded_confidence_interact(positions, i, j, params.radius, params.confidence);
    }
}

} // namespace latpos
