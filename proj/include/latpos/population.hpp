#pragma once

#include "latpos/core.hpp"
#include "latpos/rng.hpp"

#include <span>
#include <variant>
#include <vector>

namespace latpos {

/// One isotropic Gaussian component q * phi(y; center, scale).
struct MixtureComponent {
  double weight = 1.0;
  Vector center;
  double scale = 1.0;
};

/// Latent-space population density as a finite isotropic Gaussian mixture.
/// Weights must sum to one (1e-12); every center shares the same dimension.
class MixturePopulation {
public:
  explicit MixturePopulation(std::vector<MixtureComponent> components);

  /// One-component population on the real line.
  static MixturePopulation single(double center, double scale);

  int dim() const noexcept { return dim_; }
  const std::vector<MixtureComponent> &components() const noexcept {
    return components_;
  }

  double density(const Eigen::Ref<const Vector> &y) const;

  /// int y_coord^order mu(y) dy; coord is zero-based.
  double moment(int coord, int order) const;

  /// Picks a component by weight, then draws from it.
  Vector sample(Rng &rng) const;

private:
  std::vector<MixtureComponent> components_;
  int dim_ = 0;
};

/// Piecewise-constant density on the real line: cell k covers
/// [origin + k*width, origin + (k+1)*width) with height heights[k].
class HistogramDensity {
public:
  HistogramDensity(double origin, double width, std::vector<double> heights);

  double origin() const noexcept { return origin_; }
  double width() const noexcept { return width_; }
  int bins() const noexcept { return static_cast<int>(heights_.size()); }
  const std::vector<double> &heights() const noexcept { return heights_; }
  double lower(int k) const noexcept { return origin_ + k * width_; }
  double upper() const noexcept { return lower(bins()); }

  double density(double y) const;
  double mass() const;

private:
  double origin_;
  double width_;
  std::vector<double> heights_;
};

/// Histogram of `samples` on the grid of multiples of `bin_width`, padded
/// with one empty bin on each side. Integrates to one.
HistogramDensity empirical_estimate(std::span<const double> samples,
                                    double bin_width);

using Population = std::variant<MixturePopulation, HistogramDensity>;

int population_dim(const Population &pop);
double eval_density(const Population &pop, const Eigen::Ref<const Vector> &y);

/// Right-continuous step map t -> Population over [0, end_time].
class PopulationSchedule {
public:
  PopulationSchedule(std::vector<double> starts, std::vector<Population> pops,
                     double end_time);

  static PopulationSchedule constant(Population pop, double end_time);

  const Population &at(double t) const { return pops_[index_at(t)]; }
  std::size_t index_at(double t) const;

  std::size_t size() const noexcept { return pops_.size(); }
  double start(std::size_t k) const { return starts_.at(k); }
  const Population &population(std::size_t k) const { return pops_.at(k); }
  double end_time() const noexcept { return end_; }
  int dim() const { return population_dim(pops_.front()); }

private:
  std::vector<double> starts_;
  std::vector<Population> pops_;
  double end_;
};

} // namespace latpos
