#pragma once

#include "latpos/core.hpp"
#include "latpos/population.hpp"
#include "latpos/rng.hpp"

#include <functional>
#include <span>
#include <vector>

namespace latpos {

/// Per-actor model parameters.
struct ActorParams {
  double confidence = 0.5;   ///< omega in (0, 1): share of own position kept
  double visibility = 1.0;   ///< sigma > 0: reach of the interaction kernel
  double message_rate = 1.0; ///< lambda >= 0: baseline messaging rate

  void validate() const;
};

/// Drift vector b(x) and diffusion matrix a(x) of the actor generator
/// A f = b . grad f + sum_kl a_kl d_k d_l f.
struct DriftDiffusion {
  Vector drift;
  Matrix diffusion;
};

/// Closed-form coefficients for a single unweighted Gaussian component.
DriftDiffusion component_coefficients(const Eigen::Ref<const Vector> &x,
                                      const ActorParams &params,
                                      const Vector &center, double scale);

/// Coefficients against a whole population: weighted sum of closed forms for
/// Gaussian mixtures, exact per-bin integrals for histograms.
DriftDiffusion coefficients(const Eigen::Ref<const Vector> &x,
                            const ActorParams &params, const Population &pop);

/// Symmetric non-negative square root. Eigenvalues in [-1e-10, 0) are clamped
/// to zero; anything more negative raises NumericalError.
Matrix sqrt_spd(const Matrix &a);

struct LatentTrajectory {
  std::vector<double> times;
  std::vector<Matrix> positions; ///< one n x d matrix per time
};

/// Coefficient field (x, actor, t) -> (b, a) driving the Euler scheme.
using CoefficientField =
    std::function<DriftDiffusion(const Eigen::Ref<const Vector> &, int, double)>;

struct PathOptions {
  bool second_order = true; ///< false drops the diffusion term
};

/// Euler-Maruyama: X += b dt + sqrt(a) z sqrt(dt). `rngs` holds one stream per
/// actor. Number of steps is round(horizon / dt).
LatentTrajectory simulate_paths(const Matrix &init, const CoefficientField &field,
                                double dt, double horizon, std::span<Rng> rngs,
                                PathOptions options = {});

/// Actor paths under the population schedule; actor i draws from the
/// substream ("diffusion", i) of `seeds`.
LatentTrajectory simulate_paths(const Matrix &init,
                                std::span<const ActorParams> params,
                                const PopulationSchedule &schedule, double dt,
                                double horizon, const SeedTree &seeds,
                                PathOptions options = {});

/// Pairwise averaging rule of the bounded-confidence model. Moves both
/// actors if they are within `radius`; returns whether they interacted.
bool bounded_confidence_interact(Vector &positions, int i, int j, double radius,
                                 double confidence);

struct BoundedConfidenceParams {
  double radius = 0.25;     ///< Delta in (0, 1)
  double confidence = 0.2;  ///< omega in (0, 1)
  double pair_rate = 0.02;  ///< Poisson rate of interaction opportunities per pair
};

/// One time step of the interacting-particle model on the real line: each
/// unordered pair receives Poisson(pair_rate * dt) opportunities, swept in
/// (i, j) order.
void bounded_confidence_step(Vector &positions,
                             const BoundedConfidenceParams &params, double dt,
                             Rng &rng);

} // namespace latpos
