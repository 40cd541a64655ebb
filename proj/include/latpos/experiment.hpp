#pragma once

#include "latpos/basis.hpp"
#include "latpos/embedding.hpp"
#include "latpos/evaluation.hpp"
#include "latpos/filter.hpp"
#include "latpos/io.hpp"
#include "latpos/population.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace latpos {

/// Serializable description of a basis.
struct BasisDescriptor {
  BasisKind kind = BasisKind::gaussian;
  // Gaussian: either an equally spaced 1-d grid (lo..hi by spacing) or
  // explicit centers (one row per center).
  double lo = 0.0;
  double hi = 0.0;
  double spacing = 0.0;
  std::vector<std::vector<double>> centers;
  double scale = 0.0;
  // Haar
  double origin = 0.0;
  double width = 0.0;
  int cells = 0;

  BasisSet build() const;
  friend bool operator==(const BasisDescriptor &, const BasisDescriptor &) = default;
};

/// One record of a piecewise-constant population schedule: a Gaussian
/// mixture (weights, centers, scales) or, when `heights` is non-empty, a
/// histogram on origin + k * width.
struct ScheduleRecord {
  double t_start = 0.0;
  std::vector<double> weights;
  std::vector<std::vector<double>> centers;
  std::vector<double> scales;
  double origin = 0.0;
  double width = 0.0;
  std::vector<double> heights;
  friend bool operator==(const ScheduleRecord &, const ScheduleRecord &) = default;
};

struct ScheduleDescriptor {
  std::vector<ScheduleRecord> records;
  /// Records starting after end_time (other than the first) are dropped.
  PopulationSchedule build(double end_time) const;
  friend bool operator==(const ScheduleDescriptor &, const ScheduleDescriptor &) = default;
};

struct EmbeddingConfig {
  int dim = 2;
  Dissimilarity g = Dissimilarity::arccos;
  double epsilon = 0.1;
  int clusters = 2;
  int window = 10;
  friend bool operator==(const EmbeddingConfig &, const EmbeddingConfig &) = default;
};

enum class ExperimentKind { exp1, exp2 };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::exp1;
  std::string variant = "cI"; ///< exp1 population schedule label (informational)
  int n = 8;
  int L = 0;
  int d = 1;
  double T = 20.0;
  double dt = 0.05;
  int subdiv = 0; ///< 0 means n^2
  double omega = 0.1;
  double sigma = 0.0;
  double lambda = 5.0; ///< exp2: recalibrated from message_budget when > 0
  ScheduleDescriptor schedule; ///< exp1 population schedule
  BasisDescriptor basis;
  IntensityMode intensity = IntensityMode::posterior;
  FilterMode mode = FilterMode::drift;
  PdeScheme scheme = PdeScheme::exponential;
  ProjectionRule projection = ProjectionRule::l2;
  EmbeddingConfig embedding;
  // exp2 only
  double bc_radius = 0.25;
  double bc_interaction_rate = 2.0; ///< interaction opportunities per actor per unit time
  double message_budget = 3000.0;   ///< expected initial messages per unit time; <= 0 keeps lambda
  std::vector<double> kl_times;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const ExperimentConfig &, const ExperimentConfig &) = default;
};

/// Experiment 1 with schedule "cI" (1, 0.5, 0) or "cII" (1, 0, 1).
ExperimentConfig exp1_config(const std::string &variant, std::uint64_t seed);
/// Experiment 2 with L population-only particles and n observed actors.
ExperimentConfig exp2_config(int L, int n, std::uint64_t seed);

std::string config_to_json(const ExperimentConfig &config);
ExperimentConfig config_from_json(const std::string &text);
/// Hex FNV-1a digest of the canonical JSON form.
std::string config_hash(const ExperimentConfig &config);

std::string basis_to_json(const BasisDescriptor &basis);
BasisDescriptor basis_from_json(const std::string &text);
std::string schedule_to_json(const ScheduleDescriptor &schedule);
ScheduleDescriptor schedule_from_json(const std::string &text);

struct RunArtifacts {
  ExperimentConfig config;
  std::vector<MessageEvent> events;
  std::vector<double> times;
  std::vector<Matrix> positions;   ///< true latent positions of the n actors
  std::vector<Matrix> weights;     ///< posterior weights, n x K
  std::vector<StepLog> logs;
  std::vector<Matrix> means;       ///< posterior means, n x d
  std::vector<Matrix> embedding;   ///< n x d_embed per time (zeros when degenerate)
  std::vector<char> degenerate;    ///< embedding frame could not be computed
  std::vector<double> dissimilarity_scale;
  LatencyReport latency;
  std::map<double, Matrix> kl;
  ScheduleDescriptor schedule;     ///< prior population used by the filter
  double lambda = 0.0;             ///< message rate actually used
  double seconds = 0.0;

  /// Posterior-mean RMSE against the true paths over all steps after t = 0.
  double tracking_rmse() const;
  /// Mean messages per step over steps starting before `until`.
  double message_rate_per_step(double until) const;
  /// Largest pre-projection mass defect over the run.
  double max_mass_defect() const;
};

RunArtifacts run_experiment(const ExperimentConfig &config);

/// True paths and message stream of an experiment-1 style model, without
/// the filter; only meaningful for kernel intensities, which do not depend
/// on the filter.
struct Simulation {
  std::vector<double> times;
  std::vector<Matrix> positions;
  std::vector<MessageEvent> events;
  ScheduleDescriptor schedule; ///< the prior population the filter uses
  double lambda = 0.0;
};
Simulation simulate_open_loop(const ExperimentConfig &config);

/// Initial posterior weights for experiment 1: the point mass at each
/// actor's starting position mapped onto the basis.
Matrix initial_weights(const BasisSet &basis, const Matrix &positions);

/// Writes every artifact into `dir` (created if needed) and returns the
/// list of file names.
std::vector<std::string> write_artifacts(const RunArtifacts &run, const fs::path &dir);

/// `out` relative to $LATPOS_OUTPUT_ROOT when that is set and `out` is relative.
fs::path resolve_output(const fs::path &out);

} // namespace latpos
