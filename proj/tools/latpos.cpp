// latpos command line: simulate, filter, embed, evaluate, run-exp1, run-exp2.

#include "latpos/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace latpos;

namespace {

const std::map<std::string, FilterMode> kModes{{"drift", FilterMode::drift},
                                                {"full", FilterMode::full}};
const std::map<std::string, IntensityMode> kIntensities{{"posterior", IntensityMode::posterior},
                                                         {"kernel", IntensityMode::kernel}};
const std::map<std::string, PdeScheme> kSchemes{{"exponential", PdeScheme::exponential},
                                                 {"euler", PdeScheme::euler}};
const std::map<std::string, ProjectionRule> kProjections{{"l2", ProjectionRule::l2},
                                                          {"clamp", ProjectionRule::clamp}};
const std::map<std::string, Dissimilarity> kDissimilarities{{"arccos", Dissimilarity::arccos},
                                                             {"neglog", Dissimilarity::neglog}};

// Flags shared by run-exp1 / run-exp2 / simulate; applied on top of the
// config only when given on the command line.
struct Overrides {
  std::string config;
  std::uint64_t seed = 1;
  double T = 0, dt = 0;
  int subdiv = 0;
  FilterMode mode = FilterMode::drift;
  IntensityMode intensity = IntensityMode::posterior;
  PdeScheme scheme = PdeScheme::exponential;
  ProjectionRule projection = ProjectionRule::l2;
  std::vector<CLI::Option *> opts;
  CLI::Option *o_seed, *o_T, *o_dt, *o_subdiv, *o_mode, *o_intensity, *o_scheme, *o_projection;

  void add(CLI::App *sub) {
    sub->add_option("--config", config, "experiment config JSON (flags override it)")
        ->check(CLI::ExistingFile);
    o_seed = sub->add_option("--seed", seed, "root seed");
    o_T = sub->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    o_dt = sub->add_option("--dt", dt, "main step")->check(CLI::PositiveNumber);
    o_subdiv = sub->add_option("--subdiv", subdiv, "jump subintervals per step (0: n^2)")
                   ->check(CLI::NonNegativeNumber);
    o_mode = sub->add_option("--mode", mode, "drift | full")
                 ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
    o_intensity = sub->add_option("--intensity", intensity, "posterior | kernel")
                      ->transform(CLI::CheckedTransformer(kIntensities, CLI::ignore_case));
    o_scheme = sub->add_option("--scheme", scheme, "exponential | euler")
                   ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case));
    o_projection = sub->add_option("--projection", projection, "l2 | clamp")
                       ->transform(CLI::CheckedTransformer(kProjections, CLI::ignore_case));
  }

  void apply(ExperimentConfig &c) const {
    if (o_seed->count())
      c.seed = seed;
    if (o_T->count()) {
      c.T = T;
      std::erase_if(c.kl_times, [&](double t) { return t > T; });
    }
    if (o_dt->count())
      c.dt = dt;
    if (o_subdiv->count())
      c.subdiv = subdiv;
    if (o_mode->count())
      c.mode = mode;
    if (o_intensity->count())
      c.intensity = intensity;
    if (o_scheme->count())
      c.scheme = scheme;
    if (o_projection->count())
      c.projection = projection;
    c.validate();
  }
};

fs::path default_dir(const ExperimentConfig &c) {
  return fs::path("runs") / (std::string(c.experiment == ExperimentKind::exp1 ? "exp1-" : "exp2-") +
                             c.variant + "-" + config_hash(c).substr(0, 8) + "-s" +
                             std::to_string(c.seed));
}

void report_run(const RunArtifacts &run, const fs::path &dir) {
  std::fprintf(stderr,
               "wrote %s\n  events %zu, tracking RMSE %.4f, max mass defect %.3g, "
               "latency %.3f (zeta %.3f, zeta_hat %.3f), %.1f s\n",
               dir.c_str(), run.events.size(), run.tracking_rmse(), run.max_mass_defect(),
               run.latency.delta, run.latency.zeta, run.latency.zeta_hat, run.seconds);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Online latent-position filtering from message streams"};
  app.require_subcommand(1);
  std::function<void()> action;

  // ---- run-exp1
  auto *exp1 = app.add_subcommand("run-exp1", "Experiment 1: closed-loop filtering run");
  Overrides e1;
  std::string variant = "cI";
  std::string e1_out;
  e1.add(exp1);
  auto *o_variant = exp1->add_option("--variant", variant, "population schedule cI | cII")
                        ->check(CLI::IsMember({"cI", "cII"}));
  exp1->add_option("--out", e1_out, "artifact directory");
  exp1->callback([&] {
    action = [&] {
      ExperimentConfig c = e1.config.empty() ? exp1_config(variant, e1.seed)
                                             : config_from_json(read_text(e1.config));
      if (o_variant->count() && !e1.config.empty()) {
        auto fresh = exp1_config(variant, c.seed);
        c.variant = fresh.variant;
        c.schedule = fresh.schedule;
      }
      e1.apply(c);
      const auto dir = resolve_output(e1_out.empty() ? default_dir(c) : fs::path(e1_out));
      const auto run = run_experiment(c);
      write_artifacts(run, dir);
      report_run(run, dir);
    };
  });

  // ---- run-exp2
  auto *exp2 = app.add_subcommand("run-exp2", "Experiment 2: bounded-confidence population");
  Overrides e2;
  int L = 70, n = 30;
  std::string e2_out;
  e2.add(exp2);
  auto *o_L = exp2->add_option("--L", L, "population-only particles")->check(CLI::PositiveNumber);
  auto *o_n = exp2->add_option("--n", n, "observed actors")->check(CLI::Range(2, 100000));
  exp2->add_option("--out", e2_out, "artifact directory");
  exp2->callback([&] {
    action = [&] {
      ExperimentConfig c = e2.config.empty() ? exp2_config(L, n, e2.seed)
                                             : config_from_json(read_text(e2.config));
      if (o_L->count())
        c.L = L;
      if (o_n->count())
        c.n = n;
      e2.apply(c);
      const auto dir = resolve_output(e2_out.empty() ? default_dir(c) : fs::path(e2_out));
      const auto run = run_experiment(c);
      write_artifacts(run, dir);
      report_run(run, dir);
    };
  });

  // ---- simulate
  auto *sim = app.add_subcommand(
      "simulate", "True paths and kernel-intensity message stream (no filtering)");
  Overrides so;
  std::string sim_experiment = "exp1", sim_out;
  so.add(sim);
  sim->add_option("--experiment", sim_experiment, "exp1 | exp2")
      ->check(CLI::IsMember({"exp1", "exp2"}));
  sim->add_option("--variant", variant, "exp1 schedule cI | cII")
      ->check(CLI::IsMember({"cI", "cII"}));
  sim->add_option("--L", L, "exp2 population-only particles")->check(CLI::PositiveNumber);
  sim->add_option("--n", n, "exp2 observed actors")->check(CLI::Range(2, 100000));
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->callback([&] {
    action = [&] {
      ExperimentConfig c;
      if (!so.config.empty())
        c = config_from_json(read_text(so.config));
      else
        c = sim_experiment == "exp1" ? exp1_config(variant, so.seed) : exp2_config(L, n, so.seed);
      if (!so.o_intensity->count() && so.config.empty())
        c.intensity = IntensityMode::kernel;
      so.apply(c);
      const auto sim_run = simulate_open_loop(c);
      const auto dir = resolve_output(sim_out);
      fs::create_directories(dir);
      write_events_csv(dir / "events.csv", sim_run.events);
      write_actor_table(dir / "paths.csv", {sim_run.times, sim_run.positions}, "x");
      write_text(dir / "schedule.json", schedule_to_json(sim_run.schedule) + "\n");
      write_text(dir / "basis.json", basis_to_json(c.basis) + "\n");
      auto echo = c;
      echo.lambda = sim_run.lambda;
      echo.message_budget = 0.0; // lambda above is the rate actually used
      write_text(dir / "config.json", config_to_json(echo) + "\n");
      std::fprintf(stderr, "wrote %s (%zu events, lambda %.6g)\n", dir.c_str(),
                   sim_run.events.size(), sim_run.lambda);
    };
  });

  // ---- filter
  auto *flt = app.add_subcommand("filter", "Filter a recorded event stream");
  std::string f_events, f_basis, f_schedule, f_init, f_out, f_log;
  int f_n = 0;
  double f_dt = 0.05, f_T = 0.0, f_omega = 0.1, f_sigma = 1.0, f_lambda = 1.0;
  int f_subdiv = 0;
  FilterMode f_mode = FilterMode::drift;
  IntensityMode f_intensity = IntensityMode::posterior;
  PdeScheme f_scheme = PdeScheme::exponential;
  ProjectionRule f_projection = ProjectionRule::l2;
  flt->add_option("--events", f_events, "event CSV t,i,j (1-based ids)")->required();
  flt->add_option("--basis", f_basis, "basis descriptor JSON")->required()->check(CLI::ExistingFile);
  flt->add_option("--schedule", f_schedule, "population schedule JSON")
      ->required()
      ->check(CLI::ExistingFile);
  flt->add_option("--dt", f_dt, "main step")->check(CLI::PositiveNumber);
  flt->add_option("--subdiv", f_subdiv, "jump subintervals per step (0: n^2)")
      ->check(CLI::NonNegativeNumber);
  flt->add_option("--mode", f_mode, "drift | full")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  flt->add_option("--n", f_n, "number of actors (default: largest id in the events)");
  flt->add_option("--T", f_T, "horizon (default: last event time rounded up to a step)");
  flt->add_option("--omega", f_omega, "actor confidence")->check(CLI::Range(0.0, 1.0));
  flt->add_option("--sigma", f_sigma, "actor visibility")->check(CLI::PositiveNumber);
  flt->add_option("--lambda", f_lambda, "actor message rate")->check(CLI::NonNegativeNumber);
  flt->add_option("--intensity", f_intensity, "posterior | kernel")
      ->transform(CLI::CheckedTransformer(kIntensities, CLI::ignore_case));
  flt->add_option("--scheme", f_scheme, "exponential | euler")
      ->transform(CLI::CheckedTransformer(kSchemes, CLI::ignore_case));
  flt->add_option("--projection", f_projection, "l2 | clamp")
      ->transform(CLI::CheckedTransformer(kProjections, CLI::ignore_case));
  flt->add_option("--init", f_init,
                  "path CSV whose first time gives starting positions "
                  "(default: every actor starts from the population at t = 0)")
      ->check(CLI::ExistingFile);
  flt->add_option("--out", f_out, "snapshot CSV t,actor,w_1..w_K")->required();
  flt->add_option("--log", f_log, "optional per-step audit CSV");
  flt->callback([&] {
    action = [&] {
      const auto events = read_events_csv(f_events);
      int actors = f_n;
      for (const auto &e : events)
        actors = std::max(actors, e.j + 1);
      require(actors >= 2, "n", "need at least two actors");
      validate_events(events, actors);
      double horizon = f_T;
      if (horizon <= 0.0) {
        require(!events.empty(), "T", "give --T when the event log is empty");
        horizon = std::max(1.0, std::ceil(events.back().t / f_dt - 1e-9)) * f_dt;
      }
      const auto basis = basis_from_json(read_text(f_basis)).build();
      const auto schedule = schedule_from_json(read_text(f_schedule)).build(horizon);
      Matrix W0;
      if (!f_init.empty()) {
        const auto table = read_actor_table(f_init);
        require(!table.values.empty() && table.values.front().rows() == actors, "init",
                "must list every actor at its first time");
        W0 = initial_weights(basis, table.values.front());
      } else {
        W0 = density_weights(basis, schedule.population(0)).transpose().replicate(actors, 1);
      }
      FilterOptions options;
      options.dt = f_dt;
      options.subdiv = f_subdiv;
      options.mode = f_mode;
      options.scheme = f_scheme;
      options.intensity = f_intensity;
      options.projection = f_projection;
      const std::vector<ActorParams> params(static_cast<std::size_t>(actors),
                                            ActorParams{f_omega, f_sigma, f_lambda});
      const auto traj = filter_stream(events, W0, basis, schedule, params, horizon, options);
      write_actor_table(resolve_output(f_out), {traj.times, traj.weights}, "w");
      if (!f_log.empty()) {
        std::vector<double> t, ev, defect, proj;
        for (const auto &log : traj.logs) {
          t.push_back(log.t);
          ev.push_back(log.events);
          defect.push_back(log.mass_defect.maxCoeff());
          proj.push_back(log.projected.sum());
        }
        write_columns_csv(resolve_output(f_log),
                          {"t", "events", "max_mass_defect", "projected_l1"},
                          {t, ev, defect, proj});
      }
    };
  });

  // ---- embed
  auto *emb = app.add_subcommand("embed", "Warm-chained CMDS embedding of posterior snapshots");
  std::string m_snap, m_basis, m_out;
  int m_dim = 2;
  Dissimilarity m_g = Dissimilarity::arccos;
  emb->add_option("--snapshots", m_snap, "snapshot CSV t,actor,w_1..w_K")
      ->required()
      ->check(CLI::ExistingFile);
  emb->add_option("--basis", m_basis, "basis descriptor JSON")->required()->check(CLI::ExistingFile);
  emb->add_option("--dim", m_dim, "embedding dimension")->check(CLI::PositiveNumber);
  emb->add_option("--g", m_g, "arccos | neglog")
      ->transform(CLI::CheckedTransformer(kDissimilarities, CLI::ignore_case));
  emb->add_option("--out", m_out, "embedding CSV t,actor,x_1..x_d")->required();
  emb->callback([&] {
    action = [&] {
      const auto table = read_actor_table(m_snap);
      const auto basis = basis_from_json(read_text(m_basis)).build();
      EmbeddingChain chain(m_dim);
      ActorTable out{table.times, {}};
      long degenerate = 0;
      for (const auto &W : table.values) {
        require(W.cols() == basis.size(), "snapshots", "weight count must match the basis");
        try {
          out.values.push_back(
              chain.next(dissimilarity_from_posteriors(W, basis.gram(), m_g).M));
        } catch (const NumericalError &) {
          out.values.push_back(Matrix::Zero(W.rows(), m_dim));
          chain = EmbeddingChain(m_dim);
          ++degenerate;
        }
      }
      write_actor_table(resolve_output(m_out), out, "x");
      if (degenerate)
        std::fprintf(stderr, "%ld frame(s) had rank below %d and were written as zeros\n",
                     degenerate, m_dim);
    };
  });

  // ---- evaluate
  auto *ev = app.add_subcommand("evaluate", "ARI curves and latency of an embedding");
  std::string v_truth, v_emb, v_out;
  LatencyOptions lat;
  ev->add_option("--truth", v_truth, "true path CSV t,actor,x_1..x_d")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--embedding", v_emb, "embedding CSV t,actor,x_1..x_d")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--epsilon", lat.epsilon, "mari threshold is 1 - epsilon")
      ->check(CLI::Range(0.0, 1.0));
  ev->add_option("--k", lat.clusters, "k-means clusters")->check(CLI::PositiveNumber);
  ev->add_option("--window", lat.window, "moving-average window (grid steps)")
      ->check(CLI::PositiveNumber);
  ev->add_option("--seed", lat.seed, "k-means seed");
  ev->add_option("--out", v_out, "output directory (ari.csv, latency.json)")->required();
  ev->callback([&] {
    action = [&] {
      const auto truth = read_actor_table(v_truth);
      const auto est = read_actor_table(v_emb);
      require(truth.times.size() == est.times.size(), "embedding",
              "must share the time grid of the true paths");
      for (std::size_t k = 0; k < truth.times.size(); ++k)
        require(std::abs(truth.times[k] - est.times[k]) < 1e-6, "embedding",
                "must share the time grid of the true paths");
      const auto report = latency(est.values, truth.values, truth.times, lat);
      const auto dir = resolve_output(v_out);
      fs::create_directories(dir);
      write_columns_csv(dir / "ari.csv", {"t", "mari_true", "mari_embedded"},
                        {truth.times, report.mari, report.mari_hat});
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "{\n  \"zeta\": %.9g,\n  \"zeta_hat\": %.9g,\n  \"delta\": %.9g,\n"
                    "  \"sustained\": %s,\n  \"sustained_hat\": %s,\n  \"epsilon\": %.9g,\n"
                    "  \"window\": %d,\n  \"clusters\": %d\n}\n",
                    report.zeta, report.zeta_hat, report.delta,
                    report.sustained ? "true" : "false", report.sustained_hat ? "true" : "false",
                    lat.epsilon, lat.window, lat.clusters);
      write_text(dir / "latency.json", buf);
      std::printf("%.9g\n", report.delta);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const ValidationError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError &e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
