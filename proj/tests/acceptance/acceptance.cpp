// Acceptance report: one PASS/FAIL line per criterion A1..A10.
//
//   latpos_acceptance [--only A1,A3] [--strict] [--nominal] [--replicates N]
//
// Exit status is 0 once the report is complete; --strict makes any FAIL
// fatal. --nominal runs A8 at n = 30 with `--replicates` seeds (default 30;
// 200 reproduces the full Monte Carlo).

#include "latpos/basis.hpp"
#include "latpos/embedding.hpp"
#include "latpos/evaluation.hpp"
#include "latpos/experiment.hpp"
#include "latpos/generator.hpp"
#include "latpos/latent_dynamics.hpp"
#include "latpos/messaging.hpp"
#include "latpos/population.hpp"

#include "../oracle/partitions.hpp"
#include "../oracle/procrustes_grid.hpp"
#include "../oracle/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace latpos;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Parameter sets shared by A1/A2: (omega, sigma, mixture).
struct ParamSet {
  const char *name;
  double omega, sigma;
  oracle::Mixture mix;
};

std::vector<ParamSet> param_sets() {
  const double a = std::sqrt(1.0 / 3.0);
  return {
      {"exp1", 0.1, a, {{1.0}, {0.0}, {a}}},
      {"bimodal", 0.3, 0.5, {{0.4, 0.6}, {-1.0, 1.5}, {0.3, 0.8}}},
      {"wide", 0.7, 2.0, {{0.2, 0.5, 0.3}, {-2.0, 0.25, 3.0}, {1.0, 0.2, 0.6}}},
  };
}

MixturePopulation to_population(const oracle::Mixture &m) {
  std::vector<MixtureComponent> comps;
  for (std::size_t k = 0; k < m.w.size(); ++k)
    comps.push_back({m.w[k], Vector::Constant(1, m.c[k]), m.s[k]});
  return MixturePopulation(std::move(comps));
}

Outcome a1() {
  double worst = 0.0;
  for (const auto &ps : param_sets()) {
    const Population pop = to_population(ps.mix);
    const ActorParams params{ps.omega, ps.sigma, 1.0};
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const auto dd = coefficients(Vector::Constant(1, x), params, pop);
      const double b = oracle::drift(x, ps.omega, ps.sigma, ps.mix);
      const double a = oracle::diffusion(x, ps.omega, ps.sigma, ps.mix);
      // relative error; where b vanishes (x at a lone center) the floor turns
      // it into an absolute 1e-15 check
      worst = std::max(worst, std::abs(dd.drift[0] - b) / std::max(std::abs(b), 1e-9));
      worst = std::max(worst, std::abs(dd.diffusion(0, 0) - a) / std::max(std::abs(a), 1e-9));
    }
  }
  return {worst < 1e-6, fmt("max relative error %.3e (tol 1e-6, 3 sets x 5 points)", worst)};
}

Outcome a2() {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto &ps : param_sets()) {
    const Population pop = to_population(ps.mix);
    const ActorParams params{ps.omega, ps.sigma, 1.0};
    for (int g = 0; g < 100; ++g) {
      const double x = -4.0 + 8.0 * g / 99.0;
      const auto dd = coefficients(Vector::Constant(1, x), params, pop);
      lowest = std::min(lowest, dd.diffusion(0, 0));
    }
  }
  // two-dimensional population, 10 x 10 grid
  Vector c1(2), c2(2);
  c1 << 0.0, 0.0;
  c2 << 1.0, -0.5;
  const Population pop2 = MixturePopulation({{0.5, c1, 0.4}, {0.5, c2, 0.7}});
  const ActorParams p2{0.25, 0.8, 1.0};
  for (int g = 0; g < 100; ++g) {
    Vector x(2);
    x << -2.0 + 4.0 * (g % 10) / 9.0, -2.0 + 4.0 * (g / 10) / 9.0;
    const auto dd = coefficients(x, p2, pop2);
    lowest = std::min(lowest, Eigen::SelfAdjointEigenSolver<Matrix>(dd.diffusion).eigenvalues()(0));
  }
  return {lowest > 0.0, fmt("min eigenvalue of a(x) %.3e over 4 x 100 points", lowest)};
}

Outcome a3() {
  const double s = 1.0 / 64.0;
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> U(0.0, 0.5);
  std::vector<double> c;
  while (c.size() < 16) {
    const double v = U(rng);
    if (std::all_of(c.begin(), c.end(), [&](double u) { return std::abs(u - v) > s; }))
      c.push_back(v);
  }
  Matrix C(16, 1);
  for (int k = 0; k < 16; ++k)
    C(k, 0) = c[static_cast<std::size_t>(k)];
  const auto basis = BasisSet::gaussian(C, s);

  double worst = 0.0;
  const auto track = [&](double got, double ref) {
    worst = std::max(worst, std::abs(got - ref) / std::max(std::abs(ref), 1e-6));
  };
  for (int r = 0; r < 16; ++r)
    for (int q = 0; q < 16; ++q)
      track(basis.gram()(r, q), oracle::gram(c[r], c[q], s));

  std::map<std::tuple<int, int, int>, double> S;
  for (const auto &e : basis.triple())
    S[{e.r, e.k, e.c}] = e.value;
  for (int r = 0; r < 16; ++r)
    for (int k = 0; k < 16; ++k)
      for (int q = 0; q < 16; ++q) {
        const auto it = S.find({r, k, q});
        track(it == S.end() ? 0.0 : it->second, oracle::triple(c[r], c[k], c[q], s));
      }
  return {worst < 1e-8,
          fmt("max relative error %.3e over P and S (tol 1e-8, floor 1e-6 on entries up to %.1f)",
              worst, basis.gram().maxCoeff())};
}

Outcome a4() {
  const double s = 0.5, a = std::sqrt(1.0 / 3.0);
  const auto basis = BasisSet::gaussian_grid(-1.0, 1.0, 0.5, s);
  const ActorParams params{0.1, a, 5.0};
  const oracle::Mixture mix{{1.0}, {1.0}, {a}};
  const MixtureComponent comp{1.0, Vector::Constant(1, 1.0), a};
  double worst = 0.0;
  for (auto mode : {FilterMode::drift, FilterMode::full}) {
    const Matrix R = assemble_R(basis, params, comp, mode);
    const double scale = R.cwiseAbs().maxCoeff();
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        const double ref = oracle::generator_entry(basis.centers()(r, 0), basis.centers()(c, 0),
                                                   s, 0.1, a, mix, mode == FilterMode::full);
        worst = std::max(worst, std::abs(R(r, c) - ref) / scale);
      }
  }
  return {worst < 1e-5, fmt("max error / max|R| %.3e (tol 1e-5, K = 5, drift and full)", worst)};
}

Outcome a6() {
  // one pair, constant intensity: inter-event gaps against Exp(lambda)
  const double lam = 2.0, dt = 0.01;
  Rng rng(77);
  PairClocks clocks(2, rng);
  Matrix I = Matrix::Zero(2, 2);
  I(0, 1) = lam;
  std::vector<double> times;
  double t = 0.0;
  while (times.size() < 10001) {
    for (const auto &e : clocks.advance(t, I, dt, rng))
      times.push_back(e.t);
    t += dt;
  }
  std::vector<double> gaps;
  for (std::size_t k = 1; k < 10001; ++k)
    gaps.push_back(times[k] - times[k - 1]);
  std::sort(gaps.begin(), gaps.end());
  const double N = static_cast<double>(gaps.size());
  double D = 0.0;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const double F = 1.0 - std::exp(-lam * gaps[k]);
    D = std::max({D, (k + 1) / N - F, F - k / N});
  }
  const double crit = 1.628 / std::sqrt(N);

  // per-pair counts, 5 actors, lambda = 2, T = 1000
  Rng rng2(78);
  PairClocks c5(5, rng2);
  const Matrix I5 = Matrix::Constant(5, 5, lam);
  std::vector<int> counts(10, 0);
  const int steps = 100000;
  for (int m = 0; m < steps; ++m)
    for (const auto &e : c5.advance(m * dt, I5, dt, rng2))
      ++counts[pair_index(e.i, e.j, 5)];
  const double mean = lam * steps * dt, band = 3.0 * std::sqrt(mean);
  int inside = 0;
  double far = 0.0;
  for (int k : counts) {
    inside += std::abs(k - mean) <= band;
    far = std::max(far, std::abs(k - mean) / std::sqrt(mean));
  }
  return {D < crit && inside == 10,
          fmt("KS D = %.4f (crit %.4f, N = 10^4); %d/10 pair counts within 3 sd (max %.2f sd)", D,
              crit, inside, far)};
}

struct Exp1Runs {
  RunArtifacts cI, cII;
};

Exp1Runs &exp1_runs() {
  static Exp1Runs runs = [] {
    Exp1Runs r;
    r.cI = run_experiment(exp1_config("cI", 1));
    r.cII = run_experiment(exp1_config("cII", 1));
    return r;
  }();
  return runs;
}

Outcome a5() {
  const auto &r = exp1_runs();
  const double d = std::max(r.cI.max_mass_defect(), r.cII.max_mass_defect());
  return {d < 1e-6, fmt("max pre-projection |1'W_i - 1| %.3e over 2 x %zu steps (tol 1e-6)", d,
                        r.cI.logs.size())};
}

Outcome a7() {
  const auto &r = exp1_runs();
  // clustered phase: the first 100 steps, before the population first moves
  const double until = 5.0;
  const double rI = r.cI.message_rate_per_step(until), rII = r.cII.message_rate_per_step(until);
  const bool rate_ok = rI >= 70 && rI <= 130 && rII >= 70 && rII <= 130;
  // thresholds frozen at ~1.1x the validated seed-1 runs
  constexpr double tI = 0.70, tII = 0.47;
  const double eI = r.cI.tracking_rmse(), eII = r.cII.tracking_rmse();
  const bool rmse_ok = eI < tI && eII < tII;
  return {rate_ok && rmse_ok,
          fmt("(a) %s messages per step in [0,5): cI %.2f, cII %.2f (target 100 +- 30%%); "
              "(b) %s RMSE cI %.4f < %.2f, cII %.4f < %.2f",
              rate_ok ? "ok" : "FAIL", rI, rII, rmse_ok ? "ok" : "FAIL", eI, tI, eII, tII)};
}

struct A8Options {
  int n = 10;
  int seeds = 30;
};

Outcome a8(const A8Options &o) {
  std::map<int, std::vector<double>> deltas;
  std::map<int, int> reached;
  double T = 0.0;
  for (int L : {30, 70})
    for (int s = 1; s <= o.seeds; ++s) {
      const auto run = run_experiment(exp2_config(L, o.n, static_cast<std::uint64_t>(s)));
      T = run.config.T;
      deltas[L].push_back(run.latency.delta);
      reached[L] += run.latency.sustained_hat;
    }
  bool ok = true;
  std::ostringstream out;
  for (int L : {30, 70}) {
    const double med = median(deltas[L]);
    const double frac = static_cast<double>(reached[L]) / o.seeds;
    ok = ok && frac >= 0.8 && med > 0.0 && med < 0.2 * T;
    out << fmt("L=%d: reached %d/%d, median delta %.3f; ", L, reached[L], o.seeds, med);
  }
  const bool order = median(deltas[30]) >= median(deltas[70]);
  out << fmt("median L30 >= L70: %s (n = %d, T = %g)", order ? "yes" : "no", o.n, T);
  return {ok && order, out.str()};
}

Outcome a9() {
  std::mt19937_64 rng(909);
  std::normal_distribution<double> N01;
  const auto random_matrix = [&](int r, int c) {
    Matrix X(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        X(i, j) = N01(rng);
    return X;
  };
  const auto distances = [](const Matrix &X) {
    Matrix D(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.rows(); ++j)
        D(i, j) = (X.row(i) - X.row(j)).norm();
    return D;
  };

  // exact-distance recovery
  const Matrix P = random_matrix(12, 2);
  const Matrix D = distances(P);
  const double recover = (distances(cmds(D, 2)) - D).cwiseAbs().maxCoeff();

  // two points at distance 1
  Matrix two(2, 2);
  two << 0, 1, 1, 0;
  Matrix expect(2, 2);
  expect << 0.25, -0.25, -0.25, 0.25;
  const double dc = (double_center(two) - expect).cwiseAbs().maxCoeff();

  // Procrustes against a rotation/reflection grid
  double gap = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix B = random_matrix(8, 2), Z = random_matrix(8, 2);
    gap = std::max(gap, (procrustes_select(B, Z) - Z).norm() - oracle::best_grid_objective(B, Z));
  }

  // continuity: perturb M by eps E and track the aligned output
  const Matrix Q = random_matrix(10, 2);
  const Matrix M = distances(Q);
  Matrix E = random_matrix(10, 10).cwiseAbs();
  E = 0.5 * (E + E.transpose()).eval();
  E.diagonal().setZero();
  const Matrix X0 = cmds(M, 2);
  std::vector<double> lx, ly;
  for (double eps : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    const Matrix X = procrustes_select(cmds(M + eps * E, 2), X0);
    lx.push_back(std::log(eps));
    ly.push_back(std::log((X - X0).norm()));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  const double slope = sxy / sxx;

  const bool ok = recover < 1e-8 && dc < 1e-15 && gap <= 1e-12 && slope > 0.9 && slope < 1.1;
  return {ok, fmt("distance recovery %.2e; two-point centering %.1e; Procrustes - grid best "
                  "%.2e (<= 0); continuity slope %.4f",
                  recover, dc, gap, slope)};
}

Outcome a10() {
  const auto parts = oracle::partitions(6);
  double worst = 0.0;
  for (const auto &a : parts)
    for (const auto &b : parts)
      worst = std::max(worst, std::abs(ari(a, b) - oracle::ari_pairs(a, b)));
  return {parts.size() == 203 && worst <= 1e-12,
          fmt("%zu partitions, %zu pairs, max |ari - pair count| %.2e", parts.size(),
              parts.size() * parts.size(), worst)};
}

} // namespace

int main(int argc, char **argv) {
  std::set<std::string> only;
  bool strict = false;
  A8Options a8opt;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--nominal") {
      a8opt.n = 30;
    } else if (arg == "--replicates" && k + 1 < argc) {
      a8opt.seeds = std::stoi(argv[++k]);
    } else if (arg == "--only" && k + 1 < argc) {
      std::stringstream ss(argv[++k]);
      for (std::string item; std::getline(ss, item, ',');)
        only.insert(item);
    } else {
      std::fprintf(stderr, "usage: %s [--only A1,..] [--strict] [--nominal] [--replicates N]\n",
                   argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", [&] { return a8(a8opt); }}, {"A9", a9}, {"A10", a10}};

  int failed = 0, ran = 0;
  for (const auto &[name, fn] : criteria) {
    if (!only.empty() && !only.count(name))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-3s %s  %s  [%.1f s]\n", name.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += !o.pass;
    ++ran;
  }
  std::printf("summary: %d/%d passed\n", ran - failed, ran);
  return strict && failed ? 1 : 0;
}
