#pragma once

#include "latpos/basis.hpp"
#include "latpos/generator.hpp"
#include "latpos/messaging.hpp"

#include <map>
#include <memory>
#include <span>
#include <vector>

namespace latpos {

/// One explicit Euler step of the drift term: solves P dW = R W dt and
/// returns W + dW (no projection).
Vector pde_step(const Vector &w, const Matrix &r_mix, const BasisSet &basis, double dt);

/// Jump term for one pair over an interval of length dt with dN messages
/// (dN may be fractional when event counts are spread over subintervals).
/// Both rows are computed from the incoming weights and written back
/// unprojected. Throws NumericalError when dN > 0 but the pair's pairing
/// is not positive.
void jump_step(Matrix &W, int i, int j, double dN, const BasisSet &basis,
               const Coupling &coupling, double rate_i, double rate_j, double dt);

/// How weights are returned to the simplex after each update.
/// l2: nearest nonnegative mixture in the L2 norm of densities (the basis'
///     own metric), then rescaled to sum one; identical to clamp for Haar.
/// clamp: negative weights set to zero, then rescaled to sum one.
enum class ProjectionRule { l2, clamp };

struct FilterOptions {
  double dt = 0.05;
  int subdiv = 0; ///< jump subintervals per step; 0 means n^2
  FilterMode mode = FilterMode::drift;
  PdeScheme scheme = PdeScheme::exponential;
  IntensityMode intensity = IntensityMode::posterior;
  ProjectionRule projection = ProjectionRule::l2;
};

/// Per-step audit record.
struct StepLog {
  double t = 0.0;           ///< end of the step
  int events = 0;           ///< messages inside (t - dt, t]
  Vector mass_defect;       ///< per actor, max |1^T W_i - 1| before projection
  Vector projected;         ///< per actor, L1 weight change made by projections
};

/// Weights p_0 = phi(.; x0, s) mapped onto the basis: for an equally spaced
/// 1-d Gaussian basis the mass is split linearly between the two nearest
/// centers (preserving the mean); otherwise the nearest center (Gaussian)
/// or the containing cell (Haar) gets all of it.
Vector point_weights(const BasisSet &basis, const Eigen::Ref<const Vector> &x0);

/// Probability mass of `pop` in each Haar cell, or in each grid cell around
/// the centers of a 1-d Gaussian basis; renormalized to sum to one.
Vector density_weights(const BasisSet &basis, const Population &pop);

/// Clamps negative entries to zero and rescales to sum one. Returns the
/// total negative mass that was removed.
double project_to_simplex(Eigen::Ref<Vector> w);

/// Online projection filter for n actors sharing one basis.
class ProjectionFilter {
public:
  ProjectionFilter(BasisSet basis, std::vector<ActorParams> actors,
                   PopulationSchedule schedule, Matrix initial, FilterOptions options);

  const BasisSet &basis() const noexcept { return basis_; }
  const Coupling &coupling() const noexcept { return *coupling_; }
  const Matrix &weights() const noexcept { return W_; }
  double time() const noexcept { return t_; }
  int actors() const noexcept { return static_cast<int>(actors_.size()); }
  int subdiv() const noexcept { return subdiv_; }
  const FilterOptions &options() const noexcept { return options_; }

  /// lambda_i lambda_j * pairing(W_i, W_j); zero diagonal.
  Matrix intensities() const;

  /// Advances by one step: drift for every actor, then `subdiv` jump
  /// subiterations in which each pair's count in (t, t + dt] is spread
  /// evenly. `events` must lie in that window.
  StepLog step(std::span<const MessageEvent> events);

private:
  const Matrix &propagator(std::size_t group, double t);
  /// Returns row i to the simplex; returns the L1 change.
  double project_row(int i);

  BasisSet basis_;
  std::vector<ActorParams> actors_;
  PopulationSchedule schedule_;
  FilterOptions options_;
  std::unique_ptr<Coupling> coupling_;
  std::vector<std::size_t> group_of_;
  std::vector<ActorParams> groups_;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> propagators_;
  Matrix W_;
  std::vector<std::vector<int>> support_;
  double t_ = 0.0;
  long steps_ = 0;
  int subdiv_ = 1;
};

struct FilterTrajectory {
  std::vector<double> times;
  std::vector<Matrix> weights; ///< n x K per time, including t = 0
  std::vector<StepLog> logs;
};

/// Runs the filter over a recorded message stream from t = 0 to
/// round(horizon / dt) steps. Events must be time-sorted with ids in range.
FilterTrajectory filter_stream(std::span<const MessageEvent> events, const Matrix &initial,
                               const BasisSet &basis, const PopulationSchedule &schedule,
                               std::span<const ActorParams> actors, double horizon,
                               const FilterOptions &options);

/// Throws ValidationError("events", ...) unless sorted and 0 <= i < j < n.
void validate_events(std::span<const MessageEvent> events, int actors);

} // namespace latpos
