#include "latpos/population.hpp"

#include "latpos/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latpos {

MixturePopulation::MixturePopulation(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "components", "mixture needs a component");
  dim_ = static_cast<int>(components_.front().center.size());
  require(dim_ >= 1, "center", "dimension must be at least one");
  double total = 0.0;
  for (const auto &c : components_) {
    require(c.weight > 0.0 && c.weight <= 1.0, "weight", "must lie in (0, 1]");
    require(c.scale > 0.0, "scale", "must be positive");
    require(static_cast<int>(c.center.size()) == dim_, "center",
            "all components must share one dimension");
    require(c.center.allFinite(), "center", "must be finite");
    total += c.weight;
  }
  require(std::abs(total - 1.0) <= 1e-12, "weight", "weights must sum to one");
}

MixturePopulation MixturePopulation::single(double center, double scale) {
  return MixturePopulation({{1.0, Vector::Constant(1, center), scale}});
}

double MixturePopulation::density(const Eigen::Ref<const Vector> &y) const {
  require(y.size() == dim_, "y", "dimension mismatch");
  double value = 0.0;
  for (const auto &c : components_)
    value += c.weight * normal_pdf(y, c.center, c.scale);
  return value;
}

double MixturePopulation::moment(int coord, int order) const {
  require(coord >= 0 && coord < dim_, "coord", "out of range");
  require(order >= 0, "order", "must be non-negative");
  // E[(c + a Z)^m] = sum_{j even} C(m, j) c^(m-j) a^j (j-1)!!
  double value = 0.0;
  for (const auto &comp : components_) {
    const double c = comp.center[coord];
    const double a = comp.scale;
    double binom = 1.0;
    double double_factorial = 1.0;
    double term_sum = 0.0;
    for (int j = 0; j <= order; ++j) {
      if (j > 0)
        binom = binom * (order - j + 1) / j;
      if (j % 2 == 0) {
        if (j >= 2)
          double_factorial *= (j - 1);
        term_sum += binom * std::pow(c, order - j) * std::pow(a, j) *
                    double_factorial;
      }
    }
    value += comp.weight * term_sum;
  }
  return value;
}

Vector MixturePopulation::sample(Rng &rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  std::size_t pick = components_.size() - 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    cumulative += components_[k].weight;
    if (u < cumulative) {
      pick = k;
      break;
    }
  }
  const auto &comp = components_[pick];
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(dim_);
  for (int k = 0; k < dim_; ++k)
    y[k] = comp.center[k] + comp.scale * normal(rng);
  return y;
}

HistogramDensity::HistogramDensity(double origin, double width,
                                   std::vector<double> heights)
    : origin_(origin), width_(width), heights_(std::move(heights)) {
  require(width_ > 0.0, "width", "must be positive");
  require(!heights_.empty(), "heights", "need at least one bin");
  for (double h : heights_)
    require(h >= 0.0 && std::isfinite(h), "heights", "must be non-negative");
  require(std::abs(mass() - 1.0) <= 1e-9, "heights", "must integrate to one");
}

double HistogramDensity::density(double y) const {
  const double pos = (y - origin_) / width_;
  if (pos < 0.0)
    return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  return k < heights_.size() ? heights_[k] : 0.0;
}

double HistogramDensity::mass() const {
  return std::accumulate(heights_.begin(), heights_.end(), 0.0) * width_;
}

HistogramDensity empirical_estimate(std::span<const double> samples,
                                    double bin_width) {
  require(!samples.empty(), "samples", "need at least one sample");
  require(bin_width > 0.0, "bin_width", "must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const auto lo = static_cast<long>(std::floor(*lo_it / bin_width)) - 1;
  const auto hi = static_cast<long>(std::floor(*hi_it / bin_width)) + 1;
  std::vector<double> counts(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (double y : samples) {
    auto k = static_cast<long>(std::floor(y / bin_width)) - lo;
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bin_width);
  for (double &c : counts)
    c *= norm;
  return HistogramDensity(static_cast<double>(lo) * bin_width, bin_width,
                          std::move(counts));
}

int population_dim(const Population &pop) {
  if (const auto *mix = std::get_if<MixturePopulation>(&pop))
    return mix->dim();
  return 1;
}

double eval_density(const Population &pop, const Eigen::Ref<const Vector> &y) {
  if (const auto *mix = std::get_if<MixturePopulation>(&pop))
    return mix->density(y);
  require(y.size() == 1, "y", "histogram populations are one-dimensional");
  return std::get<HistogramDensity>(pop).density(y[0]);
}

PopulationSchedule::PopulationSchedule(std::vector<double> starts,
                                       std::vector<Population> pops,
                                       double end_time)
    : starts_(std::move(starts)), pops_(std::move(pops)), end_(end_time) {
  require(!pops_.empty(), "records", "schedule needs at least one record");
  require(starts_.size() == pops_.size(), "records", "start/population mismatch");
  require(starts_.front() == 0.0, "t_start", "first record must start at 0");
  require(std::is_sorted(starts_.begin(), starts_.end()) &&
              std::adjacent_find(starts_.begin(), starts_.end()) == starts_.end(),
          "t_start", "record starts must be strictly increasing");
  require(end_ > 0.0 && end_ >= starts_.back(), "end_time",
          "must be positive and not precede the last record");
  const int d = population_dim(pops_.front());
  for (const auto &p : pops_)
    require(population_dim(p) == d, "records", "all populations share one dimension");
}

PopulationSchedule PopulationSchedule::constant(Population pop, double end_time) {
  std::vector<Population> pops;
  pops.push_back(std::move(pop));
  return PopulationSchedule({0.0}, std::move(pops), end_time);
}

std::size_t PopulationSchedule::index_at(double t) const {
  const double slack = 1e-12 * std::max(1.0, end_);
  if (!(t >= -slack && t <= end_ + slack))
    throw ValidationError("t", "outside the schedule horizon [0, T]");
  std::size_t k = 0;
  for (std::size_t m = 1; m < starts_.size(); ++m) {
    if (t + 1e-12 * std::max(1.0, std::abs(starts_[m])) >= starts_[m])
      k = m;
  }
  return k;
}

} // namespace latpos
