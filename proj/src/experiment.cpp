#include "latpos/experiment.hpp"

#include "latpos/latent_dynamics.hpp"
#include "latpos/messaging.hpp"
#include "latpos/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace latpos {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Descriptors

BasisSet BasisDescriptor::build() const {
  if (kind == BasisKind::haar)
    return BasisSet::haar(origin, width, cells);
  if (centers.empty())
    return BasisSet::gaussian_grid(lo, hi, spacing, scale);
  const auto K = static_cast<Eigen::Index>(centers.size());
  const auto d = static_cast<Eigen::Index>(centers.front().size());
  Matrix C(K, d);
  for (Eigen::Index k = 0; k < K; ++k) {
    require(static_cast<Eigen::Index>(centers[static_cast<std::size_t>(k)].size()) == d,
            "basis.centers", "all centers need the same dimension");
    for (Eigen::Index c = 0; c < d; ++c)
      C(k, c) = centers[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
  }
  return BasisSet::gaussian(std::move(C), scale);
}

PopulationSchedule ScheduleDescriptor::build(double end_time) const {
  require(!records.empty(), "schedule", "needs at least one record");
  std::vector<double> starts;
  std::vector<Population> pops;
  for (const auto &r : records) {
    if (!starts.empty() && r.t_start > end_time)
      break; // never reached within the horizon
    starts.push_back(r.t_start);
    if (!r.heights.empty()) {
      pops.emplace_back(HistogramDensity(r.origin, r.width, r.heights));
      continue;
    }
    require(r.weights.size() == r.centers.size() && r.weights.size() == r.scales.size(),
            "schedule.components", "weights, centers and scales must have equal length");
    std::vector<MixtureComponent> comps;
    for (std::size_t k = 0; k < r.weights.size(); ++k)
      comps.push_back({r.weights[k],
                       Eigen::Map<const Vector>(r.centers[k].data(),
                                                static_cast<Eigen::Index>(r.centers[k].size())),
                       r.scales[k]});
    pops.emplace_back(MixturePopulation(std::move(comps)));
  }
  return PopulationSchedule(std::move(starts), std::move(pops), end_time);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <class E> struct EnumNames;
template <> struct EnumNames<BasisKind> {
  static constexpr std::array<std::pair<BasisKind, const char *>, 2> v{
      {{BasisKind::gaussian, "gaussian"}, {BasisKind::haar, "haar"}}};
};
template <> struct EnumNames<IntensityMode> {
  static constexpr std::array<std::pair<IntensityMode, const char *>, 2> v{
      {{IntensityMode::posterior, "posterior"}, {IntensityMode::kernel, "kernel"}}};
};
template <> struct EnumNames<FilterMode> {
  static constexpr std::array<std::pair<FilterMode, const char *>, 2> v{
      {{FilterMode::drift, "drift"}, {FilterMode::full, "full"}}};
};
template <> struct EnumNames<PdeScheme> {
  static constexpr std::array<std::pair<PdeScheme, const char *>, 2> v{
      {{PdeScheme::euler, "euler"}, {PdeScheme::exponential, "exponential"}}};
};
template <> struct EnumNames<ProjectionRule> {
  static constexpr std::array<std::pair<ProjectionRule, const char *>, 2> v{
      {{ProjectionRule::l2, "l2"}, {ProjectionRule::clamp, "clamp"}}};
};
template <> struct EnumNames<Dissimilarity> {
  static constexpr std::array<std::pair<Dissimilarity, const char *>, 2> v{
      {{Dissimilarity::arccos, "arccos"}, {Dissimilarity::neglog, "neglog"}}};
};
template <> struct EnumNames<ExperimentKind> {
  static constexpr std::array<std::pair<ExperimentKind, const char *>, 2> v{
      {{ExperimentKind::exp1, "exp1"}, {ExperimentKind::exp2, "exp2"}}};
};

template <class E> std::string enum_name(E e) {
  for (const auto &[value, name] : EnumNames<E>::v)
    if (value == e)
      return name;
  return "?";
}

template <class E> E enum_value(const json &j, const char *field) {
  const auto text = j.get<std::string>();
  for (const auto &[value, name] : EnumNames<E>::v)
    if (text == name)
      return value;
  throw ValidationError(field, "unknown value '" + text + "'");
}

// Reads j[key] into out when present; type errors name the field.
template <class T> void read(const json &j, const char *key, T &out) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ValidationError(key, e.what());
  }
}

template <class E> void read_enum(const json &j, const char *key, E &out) {
  if (j.contains(key))
    out = enum_value<E>(j.at(key), key);
}

json basis_json(const BasisDescriptor &b) {
  json j;
  j["kind"] = enum_name(b.kind);
  if (b.kind == BasisKind::haar) {
    j["origin"] = b.origin;
    j["width"] = b.width;
    j["cells"] = b.cells;
  } else {
    if (b.centers.empty())
      j["grid"] = {{"lo", b.lo}, {"hi", b.hi}, {"spacing", b.spacing}};
    else
      j["centers"] = b.centers;
    j["scale"] = b.scale;
  }
  return j;
}

BasisDescriptor basis_parse(const json &j) {
  if (!j.is_object())
    throw ValidationError("basis", "must be a JSON object");
  BasisDescriptor b;
  read_enum(j, "kind", b.kind);
  if (b.kind == BasisKind::haar) {
    read(j, "origin", b.origin);
    read(j, "width", b.width);
    read(j, "cells", b.cells);
  } else {
    if (j.contains("grid")) {
      read(j.at("grid"), "lo", b.lo);
      read(j.at("grid"), "hi", b.hi);
      read(j.at("grid"), "spacing", b.spacing);
    }
    read(j, "centers", b.centers);
    read(j, "scale", b.scale);
  }
  return b;
}

json schedule_json(const ScheduleDescriptor &s) {
  json records = json::array();
  for (const auto &r : s.records) {
    json j;
    j["t_start"] = r.t_start;
    if (!r.heights.empty()) {
      j["histogram"] = {{"origin", r.origin}, {"width", r.width}, {"heights", r.heights}};
    } else {
      json comps = json::array();
      for (std::size_t k = 0; k < r.weights.size(); ++k)
        comps.push_back({{"weight", r.weights[k]}, {"center", r.centers[k]},
                         {"scale", r.scales[k]}});
      j["components"] = comps;
    }
    records.push_back(j);
  }
  return {{"records", records}};
}

ScheduleDescriptor schedule_parse(const json &j) {
  if (!j.is_object() || !j.contains("records") || !j.at("records").is_array())
    throw ValidationError("schedule", "needs a 'records' array");
  ScheduleDescriptor s;
  for (const auto &rj : j.at("records")) {
    ScheduleRecord r;
    read(rj, "t_start", r.t_start);
    if (rj.contains("histogram")) {
      const auto &h = rj.at("histogram");
      read(h, "origin", r.origin);
      read(h, "width", r.width);
      read(h, "heights", r.heights);
      if (r.heights.empty())
        throw ValidationError("schedule.histogram", "heights must not be empty");
    } else {
      if (!rj.contains("components") || !rj.at("components").is_array())
        throw ValidationError("schedule.components", "each record needs components");
      for (const auto &c : rj.at("components")) {
        double w = 1.0, sc = 1.0;
        std::vector<double> center;
        read(c, "weight", w);
        read(c, "center", center);
        read(c, "scale", sc);
        r.weights.push_back(w);
        r.centers.push_back(center);
        r.scales.push_back(sc);
      }
    }
    s.records.push_back(std::move(r));
  }
  return s;
}

json config_json(const ExperimentConfig &c) {
  json j;
  j["experiment"] = enum_name(c.experiment);
  j["variant"] = c.variant;
  j["n"] = c.n;
  j["L"] = c.L;
  j["d"] = c.d;
  j["T"] = c.T;
  j["dt"] = c.dt;
  j["subdiv"] = c.subdiv;
  j["actor"] = {{"omega", c.omega}, {"sigma", c.sigma}, {"lambda", c.lambda}};
  j["schedule"] = schedule_json(c.schedule);
  j["basis"] = basis_json(c.basis);
  j["intensity"] = enum_name(c.intensity);
  j["filter"] = {{"mode", enum_name(c.mode)},
                 {"scheme", enum_name(c.scheme)},
                 {"projection", enum_name(c.projection)}};
  j["embedding"] = {{"dim", c.embedding.dim},
                    {"g", enum_name(c.embedding.g)},
                    {"epsilon", c.embedding.epsilon},
                    {"clusters", c.embedding.clusters},
                    {"window", c.embedding.window}};
  j["bounded_confidence"] = {{"radius", c.bc_radius},
                             {"interaction_rate", c.bc_interaction_rate}};
  j["message_budget"] = c.message_budget;
  j["kl_times"] = c.kl_times;
  j["seed"] = c.seed;
  return j;
}

ExperimentConfig config_parse(const json &j) {
  if (!j.is_object())
    throw ValidationError("config", "must be a JSON object");
  ExperimentConfig c;
  read_enum(j, "experiment", c.experiment);
  // Start from the experiment defaults so partial configs are usable.
  c = c.experiment == ExperimentKind::exp1 ? exp1_config(j.value("variant", "cI"), c.seed)
                                           : exp2_config(j.value("L", 70), j.value("n", 30), c.seed);
  read(j, "variant", c.variant);
  read(j, "n", c.n);
  read(j, "L", c.L);
  read(j, "d", c.d);
  read(j, "T", c.T);
  read(j, "dt", c.dt);
  read(j, "subdiv", c.subdiv);
  if (j.contains("actor")) {
    const auto &a = j.at("actor");
    read(a, "omega", c.omega);
    read(a, "sigma", c.sigma);
    read(a, "lambda", c.lambda);
  }
  if (j.contains("schedule"))
    c.schedule = schedule_parse(j.at("schedule"));
  if (j.contains("basis"))
    c.basis = basis_parse(j.at("basis"));
  read_enum(j, "intensity", c.intensity);
  if (j.contains("filter")) {
    const auto &f = j.at("filter");
    read_enum(f, "mode", c.mode);
    read_enum(f, "scheme", c.scheme);
    read_enum(f, "projection", c.projection);
  }
  if (j.contains("embedding")) {
    const auto &e = j.at("embedding");
    read(e, "dim", c.embedding.dim);
    read_enum(e, "g", c.embedding.g);
    read(e, "epsilon", c.embedding.epsilon);
    read(e, "clusters", c.embedding.clusters);
    read(e, "window", c.embedding.window);
  }
  if (j.contains("bounded_confidence")) {
    const auto &b = j.at("bounded_confidence");
    read(b, "radius", c.bc_radius);
    read(b, "interaction_rate", c.bc_interaction_rate);
  }
  read(j, "message_budget", c.message_budget);
  read(j, "kl_times", c.kl_times);
  read(j, "seed", c.seed);
  return c;
}

json parse_text(const std::string &text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError(what, std::string("invalid JSON: ") + e.what());
  }
}

} // namespace

std::string config_to_json(const ExperimentConfig &config) {
  return config_json(config).dump(2);
}

ExperimentConfig config_from_json(const std::string &text) {
  auto c = config_parse(parse_text(text, "config"));
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig &config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_json(config).dump())));
  return buf;
}

std::string basis_to_json(const BasisDescriptor &basis) { return basis_json(basis).dump(2); }
BasisDescriptor basis_from_json(const std::string &text) {
  return basis_parse(parse_text(text, "basis"));
}
std::string schedule_to_json(const ScheduleDescriptor &schedule) {
  return schedule_json(schedule).dump(2);
}
ScheduleDescriptor schedule_from_json(const std::string &text) {
  return schedule_parse(parse_text(text, "schedule"));
}

// ---------------------------------------------------------------------------
// Configs

void ExperimentConfig::validate() const {
  require(n >= 2, "n", "need at least two actors");
  require(d == 1, "d", "experiments are one-dimensional");
  require(T > 0.0, "T", "must be positive");
  require(dt > 0.0 && dt <= T, "dt", "must lie in (0, T]");
  require(subdiv >= 0, "subdiv", "must be non-negative");
  require(omega > 0.0 && omega < 1.0, "omega", "must lie in (0, 1)");
  require(sigma > 0.0, "sigma", "must be positive");
  require(lambda >= 0.0, "lambda", "must be non-negative");
  require(embedding.dim >= 1 && embedding.dim < n, "embedding.dim", "must lie in [1, n)");
  require(embedding.epsilon > 0.0 && embedding.epsilon < 1.0, "embedding.epsilon",
          "must lie in (0, 1)");
  require(embedding.clusters >= 1 && embedding.clusters <= n, "embedding.clusters",
          "must lie in [1, n]");
  require(embedding.window >= 1, "embedding.window", "must be at least 1");
  for (double t : kl_times)
    require(t >= 0.0 && t <= T, "kl_times", "must lie in [0, T]");
  if (experiment == ExperimentKind::exp1) {
    require(!schedule.records.empty(), "schedule", "exp1 needs a population schedule");
    require(basis.kind == BasisKind::gaussian || intensity == IntensityMode::kernel,
            "basis", "posterior intensities need a Gaussian basis");
  } else {
    require(L >= 1, "L", "exp2 needs population particles");
    require(basis.kind == BasisKind::haar, "basis", "exp2 uses a Haar basis");
    require(bc_radius > 0.0 && bc_radius < 1.0, "bounded_confidence.radius",
            "must lie in (0, 1)");
    require(bc_interaction_rate >= 0.0, "bounded_confidence.interaction_rate",
            "must be non-negative");
  }
}

ExperimentConfig exp1_config(const std::string &variant, std::uint64_t seed) {
  require(variant == "cI" || variant == "cII", "variant", "must be cI or cII");
  ExperimentConfig c;
  c.experiment = ExperimentKind::exp1;
  c.variant = variant;
  c.n = 8;
  c.T = 20.0;
  c.dt = 0.05;
  c.omega = 0.1;
  c.sigma = std::sqrt(1.0 / 3.0);
  c.lambda = 5.0;
  const double alpha = std::sqrt(1.0 / 3.0);
  const std::array<double, 3> centers =
      variant == "cI" ? std::array<double, 3>{1.0, 0.5, 0.0} : std::array<double, 3>{1.0, 0.0, 1.0};
  const std::array<double, 3> starts{0.0, 100 * c.dt, 250 * c.dt};
  for (int k = 0; k < 3; ++k)
    c.schedule.records.push_back({starts[k], {1.0}, {{centers[k]}}, {alpha}, 0.0, 0.0, {}});
  c.basis.kind = BasisKind::gaussian;
  c.basis.lo = -4.0;
  c.basis.hi = 5.0;
  c.basis.spacing = 1.0 / 64.0;
  c.basis.scale = 1.0 / 64.0; // s^2 = 1/4096
  c.intensity = IntensityMode::posterior;
  c.mode = FilterMode::drift;
  c.message_budget = 0.0;
  c.kl_times = {5.0, 12.5, 20.0};
  c.seed = seed;
  return c;
}

ExperimentConfig exp2_config(int L, int n, std::uint64_t seed) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::exp2;
  c.variant = "bc";
  c.n = n;
  c.L = L;
  c.T = 10.0;
  c.dt = 0.05;
  c.omega = 0.2;
  c.sigma = 0.25;
  c.bc_radius = 0.25;
  c.bc_interaction_rate = 8.0;
  c.lambda = 0.0;
  c.message_budget = 3000.0;
  c.basis.kind = BasisKind::haar;
  c.basis.origin = 0.0;
  c.basis.width = 1.0 / 42.0;
  c.basis.cells = 42;
  c.intensity = IntensityMode::kernel;
  c.mode = FilterMode::drift;
  c.kl_times = {0.0, 5.0, 10.0};
  // a plane needs three actors; two actors are embedded on a line
  c.embedding.dim = std::max(1, std::min(2, n - 1));
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

std::vector<ActorParams> actor_params(const ExperimentConfig &c, double lambda) {
  return std::vector<ActorParams>(static_cast<std::size_t>(c.n),
                                  ActorParams{c.omega, c.sigma, lambda});
}

long step_count(const ExperimentConfig &c) {
  const auto steps = std::llround(c.T / c.dt);
  require(steps >= 1, "dt", "horizon shorter than one step");
  return steps;
}

// E exp(-(U - V)^2) for independent U, V ~ Uniform(0, 1).
double uniform_kernel_mean() {
  return std::sqrt(std::numbers::pi) * std::erf(1.0) - (1.0 - std::exp(-1.0));
}

Matrix kernel_intensities(const Matrix &X, double lambda) {
  const auto n = static_cast<int>(X.rows());
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n - 1; ++i)
    for (int j = i + 1; j < n; ++j)
      out(i, j) = out(j, i) = pair_intensity_kernel(X.row(i).transpose(), X.row(j).transpose(),
                                                    lambda, lambda);
  return out;
}

// True positions of the observed actors and the population prior.
struct Truth {
  std::vector<double> times;
  std::vector<Matrix> positions;
  ScheduleDescriptor schedule;
  double lambda = 0.0;
};

Truth simulate_truth(const ExperimentConfig &c, const SeedTree &seeds) {
  const long steps = step_count(c);
  Truth truth;
  if (c.experiment == ExperimentKind::exp1) {
    const auto schedule = c.schedule.build(c.T);
    const auto *mix = std::get_if<MixturePopulation>(&schedule.population(0));
    require(mix != nullptr, "schedule", "initial population must be a Gaussian mixture");
    auto rng = seeds.stream("population");
    Matrix X0(c.n, 1);
    for (int i = 0; i < c.n; ++i)
      X0.row(i) = mix->sample(rng).transpose();
    const auto params = actor_params(c, c.lambda);
    auto paths = simulate_paths(X0, params, schedule, c.dt, c.T, seeds);
    truth.times = std::move(paths.times);
    truth.positions = std::move(paths.positions);
    truth.schedule = c.schedule;
    truth.lambda = c.lambda;
    return truth;
  }

  // Bounded-confidence population: the first n particles are observed.
  const int N = c.n + c.L;
  auto rng = seeds.stream("population");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector X(N);
  for (int k = 0; k < N; ++k)
    X[k] = unif(rng);
  BoundedConfidenceParams bc{c.bc_radius, c.omega, c.bc_interaction_rate / (N - 1)};
  auto bc_rng = seeds.stream("bounded-confidence");
  const double width = c.basis.width;
  for (long m = 0; m <= steps; ++m) {
    truth.times.push_back(static_cast<double>(m) * c.dt);
    truth.positions.push_back(X.head(c.n));
    const std::vector<double> rest(X.data() + c.n, X.data() + N);
    const auto hist = empirical_estimate(rest, width);
    if (m < steps) {
      ScheduleRecord r;
      r.t_start = static_cast<double>(m) * c.dt;
      r.origin = hist.origin();
      r.width = hist.width();
      r.heights = hist.heights();
      truth.schedule.records.push_back(std::move(r));
      bounded_confidence_step(X, bc, c.dt, bc_rng);
    }
  }
  truth.lambda = c.lambda;
  if (c.message_budget > 0.0) {
    const double pairs = 0.5 * c.n * (c.n - 1);
    truth.lambda = std::sqrt(c.message_budget / (pairs * uniform_kernel_mean()));
  }
  return truth;
}

} // namespace

Matrix initial_weights(const BasisSet &basis, const Matrix &positions) {
  Matrix W(positions.rows(), basis.size());
  for (Eigen::Index i = 0; i < positions.rows(); ++i)
    W.row(i) = point_weights(basis, positions.row(i).transpose()).transpose();
  return W;
}

Simulation simulate_open_loop(const ExperimentConfig &config) {
  config.validate();
  require(config.intensity == IntensityMode::kernel, "intensity",
          "open-loop simulation needs kernel intensities");
  const SeedTree seeds(config.seed);
  auto truth = simulate_truth(config, seeds);
  Simulation out;
  auto crng = seeds.stream("clocks");
  PairClocks clocks(config.n, crng);
  for (std::size_t m = 0; m + 1 < truth.times.size(); ++m) {
    auto ev = clocks.advance(truth.times[m], kernel_intensities(truth.positions[m], truth.lambda),
                             config.dt, crng);
    out.events.insert(out.events.end(), ev.begin(), ev.end());
  }
  out.times = std::move(truth.times);
  out.positions = std::move(truth.positions);
  out.schedule = std::move(truth.schedule);
  out.lambda = truth.lambda;
  return out;
}

RunArtifacts run_experiment(const ExperimentConfig &config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SeedTree seeds(config.seed);
  auto truth = simulate_truth(config, seeds);
  const auto basis = config.basis.build();
  const auto schedule = truth.schedule.build(config.T);

  RunArtifacts run;
  run.config = config;
  run.lambda = truth.lambda;
  run.schedule = truth.schedule;

  Matrix W0 = config.experiment == ExperimentKind::exp1
                  ? initial_weights(basis, truth.positions.front())
                  : density_weights(basis, schedule.population(0)).transpose().replicate(config.n, 1);
  FilterOptions options;
  options.dt = config.dt;
  options.subdiv = config.subdiv;
  options.mode = config.mode;
  options.scheme = config.scheme;
  options.intensity = config.intensity;
  options.projection = config.projection;
  ProjectionFilter filter(basis, actor_params(config, truth.lambda), schedule, W0, options);

  auto crng = seeds.stream("clocks");
  PairClocks clocks(config.n, crng);
  run.times.push_back(0.0);
  run.weights.push_back(filter.weights());
  for (std::size_t m = 0; m + 1 < truth.times.size(); ++m) {
    const Matrix lam = config.intensity == IntensityMode::posterior
                           ? filter.intensities()
                           : kernel_intensities(truth.positions[m], truth.lambda);
    auto ev = clocks.advance(truth.times[m], lam, config.dt, crng);
    run.logs.push_back(filter.step(ev));
    run.events.insert(run.events.end(), ev.begin(), ev.end());
    run.times.push_back(truth.times[m + 1]);
    run.weights.push_back(filter.weights());
  }
  run.positions = std::move(truth.positions);

  for (const auto &W : run.weights) {
    Matrix M(W.rows(), basis.dim());
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      M.row(i) = basis.mean(W.row(i).transpose()).transpose();
    run.means.push_back(std::move(M));
  }

  // Embedding chain; frames whose dissimilarities have rank below the
  // embedding dimension are emitted as zeros and restart the chain.
  EmbeddingChain chain(config.embedding.dim);
  for (const auto &W : run.weights) {
    try {
      const auto dis = dissimilarity_from_posteriors(W, basis.gram(), config.embedding.g);
      run.embedding.push_back(chain.next(dis.M));
      run.dissimilarity_scale.push_back(dis.omega);
      run.degenerate.push_back(0);
    } catch (const NumericalError &) {
      run.embedding.push_back(Matrix::Zero(config.n, config.embedding.dim));
      run.dissimilarity_scale.push_back(0.0);
      run.degenerate.push_back(1);
      chain = EmbeddingChain(config.embedding.dim);
    }
  }

  LatencyOptions lo;
  lo.epsilon = config.embedding.epsilon;
  lo.clusters = config.embedding.clusters;
  lo.window = config.embedding.window;
  lo.seed = seeds.seed("kmeans");
  run.latency = latency(run.embedding, run.positions, run.times, lo);

  if (basis.dim() == 1) {
    const double lo_x = basis.kind() == BasisKind::haar ? basis.origin()
                                                        : basis.centers().minCoeff();
    const double hi_x = basis.kind() == BasisKind::haar
                            ? basis.origin() + basis.size() * basis.width()
                            : basis.centers().maxCoeff();
    const int points = 1000;
    std::vector<double> grid(points);
    for (int g = 0; g < points; ++g)
      grid[static_cast<std::size_t>(g)] = lo_x + (g + 0.5) * (hi_x - lo_x) / points;
    for (double t : config.kl_times) {
      const auto m = static_cast<std::size_t>(std::llround(t / config.dt));
      run.kl[run.times[m]] = kl_matrix(run.weights[m], basis, grid);
    }
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

double RunArtifacts::tracking_rmse() const {
  double se = 0.0;
  long count = 0;
  for (std::size_t m = 1; m < means.size(); ++m) {
    se += (means[m] - positions[m]).squaredNorm();
    count += means[m].size();
  }
  return count ? std::sqrt(se / static_cast<double>(count)) : 0.0;
}

double RunArtifacts::message_rate_per_step(double until) const {
  long steps = 0;
  long events = 0;
  for (std::size_t m = 0; m < logs.size(); ++m)
    if (times[m] < until - 1e-9) {
      ++steps;
      events += logs[m].events;
    }
  return steps ? static_cast<double>(events) / static_cast<double>(steps) : 0.0;
}

double RunArtifacts::max_mass_defect() const {
  double worst = 0.0;
  for (const auto &log : logs)
    worst = std::max(worst, log.mass_defect.maxCoeff());
  return worst;
}

// ---------------------------------------------------------------------------
// Output

fs::path resolve_output(const fs::path &out) {
  if (out.is_absolute())
    return out;
  if (const char *root = std::getenv("LATPOS_OUTPUT_ROOT"); root && *root)
    return fs::path(root) / out;
  return out;
}

std::vector<std::string> write_artifacts(const RunArtifacts &run, const fs::path &dir) {
  fs::create_directories(dir);
  const std::string hash = config_hash(run.config);
  const CsvStamp stamp{"latpos config_hash=" + hash + " seed=" + std::to_string(run.config.seed)};
  std::vector<std::string> files;
  const auto add = [&](const std::string &name) {
    files.push_back(name);
    return dir / name;
  };

  write_events_csv(add("events.csv"), run.events, stamp);
  write_actor_table(add("paths.csv"), {run.times, run.positions}, "x", stamp);
  write_actor_table(add("snapshots.csv"), {run.times, run.weights}, "w", stamp);
  write_actor_table(add("posterior_means.csv"), {run.times, run.means}, "x", stamp);
  write_actor_table(add("embedding.csv"), {run.times, run.embedding}, "x", stamp);

  std::vector<double> step_t, step_events, step_defect, step_projected;
  for (const auto &log : run.logs) {
    step_t.push_back(log.t);
    step_events.push_back(log.events);
    step_defect.push_back(log.mass_defect.maxCoeff());
    step_projected.push_back(log.projected.sum());
  }
  write_columns_csv(add("steps.csv"), {"t", "events", "max_mass_defect", "projected_l1"},
                    {step_t, step_events, step_defect, step_projected}, stamp);
  std::vector<double> degenerate(run.degenerate.begin(), run.degenerate.end());
  write_columns_csv(add("ari.csv"), {"t", "mari_true", "mari_embedded", "degenerate_frame"},
                    {run.times, run.latency.mari, run.latency.mari_hat, degenerate}, stamp);

  const json latency_json = {{"zeta", run.latency.zeta},
                             {"zeta_hat", run.latency.zeta_hat},
                             {"delta", run.latency.delta},
                             {"sustained", run.latency.sustained},
                             {"sustained_hat", run.latency.sustained_hat},
                             {"epsilon", run.config.embedding.epsilon},
                             {"window", run.config.embedding.window},
                             {"clusters", run.config.embedding.clusters},
                             {"config_hash", hash},
                             {"seed", run.config.seed}};
  write_text(add("latency.json"), latency_json.dump(2) + "\n");
  write_text(add("schedule.json"), schedule_to_json(run.schedule) + "\n");

  for (const auto &[t, D] : run.kl) {
    char name[64];
    std::snprintf(name, sizeof name, "kl_t%.3f.csv", t);
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < D.cols(); ++j)
      header.push_back("actor_" + std::to_string(j + 1));
    write_matrix_csv(add(name), D, header, stamp);
  }

  long degenerate_frames = 0;
  for (char d : run.degenerate)
    degenerate_frames += d;
  json meta;
  meta["config"] = config_json(run.config);
  meta["config_hash"] = hash;
  meta["seed"] = run.config.seed;
  meta["lambda_used"] = run.lambda;
  meta["subdiv_used"] = run.config.subdiv > 0 ? run.config.subdiv : run.config.n * run.config.n;
  meta["dissimilarity"] = {{"g", enum_name(run.config.embedding.g)},
                           {"omega_rule", "1 / max_ij W_i^T P W_j"}};
  meta["unreported_defaults"] = {{"epsilon", run.config.embedding.epsilon},
                                 {"mari_window", run.config.embedding.window},
                                 {"clusters", run.config.embedding.clusters}};
  meta["summary"] = {{"events", run.events.size()},
                     {"tracking_rmse", run.tracking_rmse()},
                     {"max_mass_defect", run.max_mass_defect()},
                     {"degenerate_embedding_frames", degenerate_frames},
                     {"latency_delta", run.latency.delta}};
  files.push_back("metadata.json");
  meta["files"] = files;
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return files;
}

} // namespace latpos
