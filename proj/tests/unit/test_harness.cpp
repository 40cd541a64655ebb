#include "latpos/experiment.hpp"
#include "latpos/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

using namespace latpos;

namespace {
// Exp-1 shape on a coarse grid and a short horizon, to keep the suite fast.
ExperimentConfig small_exp1(std::uint64_t seed) {
  auto c = exp1_config("cI", seed);
  c.T = 1.0;
  c.n = 4;
  c.basis.lo = -3.0;
  c.basis.hi = 4.0;
  c.basis.spacing = 1.0 / 16;
  c.basis.scale = 1.0 / 16;
  c.kl_times = {0.0, 1.0};
  return c;
}

fs::path scratch(const std::string &name) {
  auto p = fs::temp_directory_path() / ("latpos_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}
} // namespace

TEST_CASE("experiment presets") {
  const auto c = exp1_config("cII", 3);
  CHECK(c.n == 8);
  CHECK(c.lambda == 5.0);
  CHECK(c.omega == 0.1);
  CHECK(c.sigma * c.sigma == doctest::Approx(1.0 / 3));
  CHECK(c.T / c.dt == doctest::Approx(400));
  CHECK(c.basis.scale == 1.0 / 64);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(exp1_config("cIII", 1), ValidationError);

  const auto e = exp2_config(70, 30, 1);
  CHECK(e.omega == 0.2);
  CHECK(e.bc_radius == 0.25);
  CHECK(e.basis.kind == BasisKind::haar);
  CHECK(e.basis.width == doctest::Approx(1.0 / 42));
  CHECK(e.intensity == IntensityMode::kernel);
}

TEST_CASE("config round trip") {
  for (const auto &c : {exp1_config("cI", 5), exp2_config(30, 10, 9), small_exp1(2)}) {
    const auto back = config_from_json(config_to_json(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
  }
  CHECK(config_hash(exp1_config("cI", 1)) != config_hash(exp1_config("cI", 2)));
  CHECK_THROWS_AS(config_from_json(R"({"experiment": "exp1", "n": 1})"), ValidationError);
}

TEST_CASE("basis and schedule descriptors round trip") {
  const auto c = exp1_config("cI", 1);
  CHECK(basis_from_json(basis_to_json(c.basis)) == c.basis);
  CHECK(schedule_from_json(schedule_to_json(c.schedule)) == c.schedule);
}

TEST_CASE("event and table files") {
  const auto dir = scratch("io");
  fs::create_directories(dir);
  const std::vector<MessageEvent> ev{{0.125, 0, 3}, {0.5, 1, 2}};
  write_events_csv(dir / "ev.csv", ev, CsvStamp{"stamp"});
  CHECK(slurp(dir / "ev.csv").rfind("# stamp\nt,i,j\n", 0) == 0);
  CHECK(read_events_csv(dir / "ev.csv") == ev);

  ActorTable t;
  t.times = {0.0, 0.05};
  t.values = {Matrix::Constant(2, 3, 0.1), Matrix::Constant(2, 3, 1.0 / 3)};
  write_actor_table(dir / "w.csv", t, "w");
  const auto back = read_actor_table(dir / "w.csv");
  REQUIRE(back.values.size() == 2);
  CHECK(back.times == t.times);
  CHECK(back.values[1] == t.values[1]);
}

TEST_CASE("zero message rate leaves pure drift") {
  auto c = small_exp1(4);
  c.lambda = 0.0;
  const auto run = run_experiment(c);
  CHECK(run.events.empty());

  const auto basis = c.basis.build();
  const auto sched = c.schedule.build(c.T);
  const ActorParams p{c.omega, c.sigma, 0.0};
  const Matrix E = drift_propagator(basis, assemble_R(basis, p, sched.at(0.0), c.mode), c.dt,
                                    c.scheme);
  Matrix W = run.weights.front();
  for (std::size_t m = 1; m < run.weights.size(); ++m) {
    W = (E * W.transpose()).transpose().eval();
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      Vector w = basis.nonnegative_projection(W.row(i).transpose());
      W.row(i) = (w / w.sum()).transpose();
    }
    CHECK((W - run.weights[m]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("runs are deterministic and fully stamped") {
  const auto c = small_exp1(7);
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto files = write_artifacts(run_experiment(c), a);
  write_artifacts(run_experiment(c), b);
  for (const auto &f : files) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    if (f.ends_with(".csv"))
      CHECK(slurp(a / f).rfind("# latpos config_hash=" + config_hash(c), 0) == 0);
  }

  const auto meta = nlohmann::json::parse(slurp(a / "metadata.json"));
  CHECK(config_from_json(meta["config"].dump()) == c);
  CHECK(meta["config_hash"] == config_hash(c));
  for (const auto &f : meta["files"])
    CHECK(fs::exists(a / f.get<std::string>()));
}

TEST_CASE("exp2 smoke run with two actors") {
  const auto c = exp2_config(10, 2, 1);
  CHECK(c.subdiv == 0);
  const auto run = run_experiment(c);
  const auto dir = scratch("exp2_smoke");
  const auto files = write_artifacts(run, dir);
  for (const char *f : {"events.csv", "paths.csv", "snapshots.csv", "posterior_means.csv",
                        "embedding.csv", "steps.csv", "ari.csv", "latency.json", "schedule.json",
                        "metadata.json"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  CHECK(files.size() >= 10);
  // expected initial message count matches the budget
  const double E = std::sqrt(std::numbers::pi) * std::erf(1.0) - 1.0 + std::exp(-1.0);
  CHECK(run.lambda * run.lambda * E == doctest::Approx(c.message_budget));
}

TEST_CASE("open-loop simulation matches the coupled kernel run") {
  auto c = small_exp1(3);
  c.intensity = IntensityMode::kernel;
  const auto sim = simulate_open_loop(c);
  const auto run = run_experiment(c);
  CHECK(sim.events == run.events);
  REQUIRE(sim.positions.size() == run.positions.size());
  CHECK(sim.positions.back() == run.positions.back());
}

TEST_CASE("output root") {
  ::setenv("LATPOS_OUTPUT_ROOT", "/tmp/root_for_test", 1);
  CHECK(resolve_output("run1") == fs::path("/tmp/root_for_test/run1"));
  CHECK(resolve_output("/abs/run") == fs::path("/abs/run"));
  ::unsetenv("LATPOS_OUTPUT_ROOT");
  CHECK(resolve_output("run1") == fs::path("run1"));
}
