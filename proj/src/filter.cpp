#include "latpos/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace latpos {

Vector pde_step(const Vector &w, const Matrix &r_mix, const BasisSet &basis, double dt) {
  require(w.size() == basis.size(), "w", "length must match the basis size");
  require(r_mix.rows() == basis.size() && r_mix.cols() == basis.size(), "R",
          "must be K x K");
  require(dt > 0.0, "dt", "must be positive");
  return w + basis.solve(Vector(r_mix * w)) * dt;
}

namespace {

// Increment of <phi_r, p_i> for one pair: alpha * T - beta * (P W_i), with
//   alpha = dN / pairing - lambda_i lambda_j dt,
//   beta  = dN - lambda_i lambda_j pairing dt.
// Written so that dN = 0 never divides by the pairing.
struct JumpCoefficients {
  double alpha;
  double beta;
};

JumpCoefficients jump_coefficients(double dN, double pairing, double rates, double dt) {
  if (dN > 0.0 && !(pairing > 0.0 && std::isfinite(pairing)))
    throw NumericalError("message between actors whose posteriors have non-positive "
                         "pairing; the posterior weights are numerically invalid");
  const double alpha = (dN > 0.0 ? dN / pairing : 0.0) - rates * dt;
  const double beta = dN - rates * pairing * dt;
  return {alpha, beta};
}

} // namespace

void jump_step(Matrix &W, int i, int j, double dN, const BasisSet &basis,
               const Coupling &coupling, double rate_i, double rate_j, double dt) {
  require(W.cols() == basis.size(), "W", "columns must match the basis size");
  require(i >= 0 && j >= 0 && i < W.rows() && j < W.rows() && i != j, "pair",
          "invalid actor pair");
  require(dt > 0.0, "dt", "must be positive");
  require(dN >= 0.0, "dN", "must be non-negative");
  const Vector wi = W.row(i).transpose();
  const Vector wj = W.row(j).transpose();
  const auto inter = coupling.interact(wi, wj);
  const auto [alpha, beta] = jump_coefficients(dN, inter.pairing, rate_i * rate_j, dt);
  W.row(i) += (alpha * basis.solve(inter.to_i) - beta * wi).transpose();
  W.row(j) += (alpha * basis.solve(inter.to_j) - beta * wj).transpose();
}

Vector point_weights(const BasisSet &basis, const Eigen::Ref<const Vector> &x0) {
  require(x0.size() == basis.dim(), "x0", "dimension mismatch");
  const int K = basis.size();
  Vector w = Vector::Zero(K);
  if (basis.kind() == BasisKind::haar) {
    const double pos = (x0[0] - basis.origin()) / basis.width();
    const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, K - 1);
    w[k] = 1.0;
    return w;
  }
  if (basis.uniform_grid()) {
    const double pos = (x0[0] - basis.centers()(0, 0)) / basis.grid_spacing();
    if (pos <= 0.0) {
      w[0] = 1.0;
    } else if (pos >= K - 1) {
      w[K - 1] = 1.0;
    } else {
      const int k = static_cast<int>(std::floor(pos));
      const double frac = pos - k;
      w[k] = 1.0 - frac;
      w[k + 1] = frac;
    }
    return w;
  }
  Eigen::Index best = 0;
  (basis.centers().rowwise() - x0.transpose()).rowwise().squaredNorm().minCoeff(&best);
  w[best] = 1.0;
  return w;
}

namespace {

double population_mass(const Population &pop, double a, double b) {
  if (const auto *hist = std::get_if<HistogramDensity>(&pop)) {
    double mass = 0.0;
    for (int k = 0; k < hist->bins(); ++k) {
      const double lo = std::max(a, hist->lower(k));
      const double hi = std::min(b, hist->lower(k + 1));
      if (hi > lo)
        mass += (hi - lo) * hist->heights()[static_cast<std::size_t>(k)];
    }
    return mass;
  }
  double mass = 0.0;
  for (const auto &c : std::get<MixturePopulation>(pop).components()) {
    const auto cdf = [&](double x) {
      return 0.5 * std::erfc(-(x - c.center[0]) / (c.scale * std::numbers::sqrt2));
    };
    mass += c.weight * (cdf(b) - cdf(a));
  }
  return mass;
}

} // namespace

Vector density_weights(const BasisSet &basis, const Population &pop) {
  require(basis.dim() == 1 && population_dim(pop) == 1, "basis",
          "density weights need a one-dimensional basis");
  const int K = basis.size();
  Vector w(K);
  if (basis.kind() == BasisKind::haar) {
    for (int k = 0; k < K; ++k)
      w[k] = population_mass(pop, basis.origin() + k * basis.width(),
                             basis.origin() + (k + 1) * basis.width());
  } else {
    require(basis.uniform_grid(), "basis", "needs an equally spaced Gaussian basis");
    const double h = basis.grid_spacing();
    for (int k = 0; k < K; ++k) {
      const double c = basis.centers()(k, 0);
      w[k] = population_mass(pop, c - 0.5 * h, c + 0.5 * h);
    }
  }
  const double total = w.sum();
  if (!(total > 0.0))
    throw NumericalError("population puts no mass on the basis support");
  return w / total;
}

double project_to_simplex(Eigen::Ref<Vector> w) {
  double removed = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] < 0.0) {
      removed -= w[k];
      w[k] = 0.0;
    }
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("posterior weights collapsed (no positive mass left)");
  w /= total;
  return removed;
}

ProjectionFilter::ProjectionFilter(BasisSet basis, std::vector<ActorParams> actors,
                                   PopulationSchedule schedule, Matrix initial,
                                   FilterOptions options)
    : basis_(std::move(basis)), actors_(std::move(actors)), schedule_(std::move(schedule)),
      options_(options), W_(std::move(initial)) {
  const int n = static_cast<int>(actors_.size());
  require(n >= 2, "actors", "need at least two actors");
  require(options_.dt > 0.0, "dt", "must be positive");
  require(options_.subdiv >= 0, "subdiv", "must be non-negative");
  require(schedule_.dim() == basis_.dim(), "schedule", "dimension mismatch with the basis");
  require(W_.rows() == n && W_.cols() == basis_.size(), "initial",
          "must be n x K");
  for (int i = 0; i < n; ++i) {
    require(W_.row(i).minCoeff() >= 0.0, "initial", "weights must be non-negative");
    require(std::abs(W_.row(i).sum() - 1.0) <= 1e-9, "initial", "rows must sum to one");
  }
  subdiv_ = options_.subdiv > 0 ? options_.subdiv : n * n;
  support_.resize(static_cast<std::size_t>(n));
  coupling_ = make_coupling(basis_, options_.intensity);

  for (const auto &p : actors_) {
    p.validate();
    const auto same = [&](const ActorParams &q) {
      return q.confidence == p.confidence && q.visibility == p.visibility;
    };
    auto it = std::find_if(groups_.begin(), groups_.end(), same);
    if (it == groups_.end()) {
      groups_.push_back(p);
      it = groups_.end() - 1;
    }
    group_of_.push_back(static_cast<std::size_t>(it - groups_.begin()));
  }
}

Matrix ProjectionFilter::intensities() const {
  const int n = actors();
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double kappa = coupling_->pairing(W_.row(i).transpose(), W_.row(j).transpose());
      out(i, j) = out(j, i) = actors_[static_cast<std::size_t>(i)].message_rate *
                              actors_[static_cast<std::size_t>(j)].message_rate *
                              std::max(kappa, 0.0);
    }
  return out;
}

const Matrix &ProjectionFilter::propagator(std::size_t group, double t) {
  const std::size_t record = schedule_.index_at(t);
  const auto key = std::make_pair(record, group);
  if (auto it = propagators_.find(key); it != propagators_.end())
    return it->second;
  // Schedules only move forward; keep the cache to the current record.
  std::erase_if(propagators_, [&](const auto &kv) { return kv.first.first != record; });
  const Matrix R = assemble_R(basis_, groups_[group], schedule_.population(record),
                              options_.mode);
  return propagators_[key] = drift_propagator(basis_, R, options_.dt, options_.scheme);
}

double ProjectionFilter::project_row(int i) {
  const Vector before = W_.row(i).transpose();
  Vector row = before;
  if (options_.projection == ProjectionRule::clamp) {
    project_to_simplex(row);
  } else {
    row = basis_.nonnegative_projection(before, &support_[static_cast<std::size_t>(i)]);
    const double total = row.sum();
    if (!(total > 0.0) || !std::isfinite(total))
      throw NumericalError("posterior weights collapsed (no positive mass left)");
    row /= total;
  }
  W_.row(i) = row.transpose();
  return (row - before).lpNorm<1>();
}

StepLog ProjectionFilter::step(std::span<const MessageEvent> events) {
  const int n = actors();
  const double dt = options_.dt;
  const double slack = 1e-9 * std::max(1.0, t_ + dt);
  std::vector<double> counts(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
  for (const auto &e : events) {
    require(e.i >= 0 && e.j > e.i && e.j < n, "events", "actor id out of range");
    require(e.t > t_ - slack && e.t <= t_ + dt + slack, "events",
            "event outside the current step window");
    counts[pair_index(e.i, e.j, n)] += 1.0;
  }

  StepLog log;
  log.t = t_ + dt;
  log.events = static_cast<int>(events.size());
  log.mass_defect = Vector::Zero(n);
  log.projected = Vector::Zero(n);
  const auto audit = [&](int i) {
    log.mass_defect[i] = std::max(log.mass_defect[i], std::abs(W_.row(i).sum() - 1.0));
    log.projected[i] += project_row(i);
  };

  // Drift part with the population at the start of the step.
  for (int i = 0; i < n; ++i) {
    const Matrix &E = propagator(group_of_[static_cast<std::size_t>(i)], t_);
    W_.row(i) = (E * W_.row(i).transpose()).transpose();
    audit(i);
  }

  // Jump part. Within a subiteration every pair reads the same weights, so
  // the increments of all pairs add up and each row needs one solve.
  const double sub_dt = dt / subdiv_;
  const double sub_frac = 1.0 / subdiv_;
  Matrix rhs(basis_.size(), n);
  Vector beta(n);
  const bool reuse = coupling_->reuses_products();
  Matrix GW;
  for (int s = 0; s < subdiv_; ++s) {
    rhs.setZero();
    beta.setZero();
    if (reuse)
      GW.noalias() = coupling_->pairing_matrix() * W_.transpose();
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dN = counts[pair_index(i, j, n)] * sub_frac;
        const double rates = actors_[static_cast<std::size_t>(i)].message_rate *
                             actors_[static_cast<std::size_t>(j)].message_rate;
        const Vector wi = W_.row(i).transpose();
        const Vector wj = W_.row(j).transpose();
        const double kappa = reuse ? wi.dot(GW.col(j)) : coupling_->pairing(wi, wj);
        // Pairs with no messages and a negligible compensator do not move.
        if (dN == 0.0 && rates * kappa * sub_dt < 1e-15)
          continue;
        const auto inter = reuse ? coupling_->interact_given(wi, wj, GW.col(i), GW.col(j))
                                 : coupling_->interact(wi, wj);
        const auto [alpha, b] = jump_coefficients(dN, inter.pairing, rates, sub_dt);
        rhs.col(i) += alpha * inter.to_i;
        rhs.col(j) += alpha * inter.to_j;
        beta[i] += b;
        beta[j] += b;
      }
    const Matrix delta = basis_.solve(rhs);
    for (int i = 0; i < n; ++i) {
      if (beta[i] == 0.0 && rhs.col(i).isZero(0.0))
        continue;
      W_.row(i) += (delta.col(i) - beta[i] * W_.row(i).transpose()).transpose();
      audit(i);
    }
  }
  t_ = static_cast<double>(++steps_) * dt;
  return log;
}

void validate_events(std::span<const MessageEvent> events, int actors) {
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto &e = events[k];
    require(e.i >= 0 && e.i < e.j && e.j < actors, "events",
            "actor ids must satisfy 1 <= i < j <= n");
    require(std::isfinite(e.t) && e.t >= 0.0, "events", "event times must be non-negative");
    if (k > 0 && e.t < events[k - 1].t)
      throw ValidationError("events", "events not time-sorted");
  }
}

FilterTrajectory filter_stream(std::span<const MessageEvent> events, const Matrix &initial,
                               const BasisSet &basis, const PopulationSchedule &schedule,
                               std::span<const ActorParams> actors, double horizon,
                               const FilterOptions &options) {
  const int n = static_cast<int>(actors.size());
  validate_events(events, n);
  require(horizon > 0.0, "T", "must be positive");
  const auto steps = static_cast<long>(std::llround(horizon / options.dt));
  require(steps >= 1, "dt", "horizon shorter than one step");
  require(events.empty() || events.back().t <= steps * options.dt * (1 + 1e-12), "events",
          "event after the filtering horizon");

  ProjectionFilter filter(basis, {actors.begin(), actors.end()}, schedule, initial, options);
  FilterTrajectory out;
  out.times.push_back(0.0);
  out.weights.push_back(filter.weights());
  std::size_t next = 0;
  for (long m = 0; m < steps; ++m) {
    const double end = static_cast<double>(m + 1) * options.dt;
    std::size_t stop = next;
    while (stop < events.size() && events[stop].t <= end + 1e-9 * std::max(1.0, end))
      ++stop;
    out.logs.push_back(filter.step(events.subspan(next, stop - next)));
    next = stop;
    out.times.push_back(end);
    out.weights.push_back(filter.weights());
  }
  return out;
}

} // namespace latpos
