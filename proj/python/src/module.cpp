// Python bindings. Configs cross the boundary as JSON text; the thin
// wrapper in latpos/__init__.py turns them into dicts.
#include "latpos/embedding.hpp"
#include "latpos/evaluation.hpp"
#include "latpos/experiment.hpp"
#include "latpos/latent_dynamics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace latpos;

namespace {

Dissimilarity parse_g(const std::string &g) {
  if (g == "arccos")
    return Dissimilarity::arccos;
  if (g == "neglog")
    return Dissimilarity::neglog;
  throw ValidationError("g", "expected arccos or neglog, got '" + g + "'");
}

py::dict run_to_dict(const RunArtifacts &run) {
  py::dict d;
  d["config"] = config_to_json(run.config);
  d["times"] = run.times;
  d["positions"] = run.positions;
  d["means"] = run.means;
  d["weights"] = run.weights;
  d["embedding"] = run.embedding;
  std::vector<bool> degenerate(run.degenerate.begin(), run.degenerate.end());
  d["degenerate"] = degenerate;
  std::vector<std::tuple<double, int, int>> events;
  events.reserve(run.events.size());
  for (const auto &e : run.events)
    events.emplace_back(e.t, e.i, e.j);
  d["events"] = events;
  d["lambda"] = run.lambda;
  d["rmse"] = run.tracking_rmse();
  d["max_mass_defect"] = run.max_mass_defect();
  py::dict lat;
  lat["zeta"] = run.latency.zeta;
  lat["zeta_hat"] = run.latency.zeta_hat;
  lat["delta"] = run.latency.delta;
  lat["sustained"] = run.latency.sustained;
  lat["sustained_hat"] = run.latency.sustained_hat;
  lat["mari"] = run.latency.mari;
  lat["mari_hat"] = run.latency.mari_hat;
  d["latency"] = lat;
  d["seconds"] = run.seconds;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "latent position filtering core";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("exp1_config", [](const std::string &variant, std::uint64_t seed) {
    return config_to_json(exp1_config(variant, seed));
  }, py::arg("variant") = "cI", py::arg("seed") = 1);
  m.def("exp2_config", [](int L, int n, std::uint64_t seed) {
    return config_to_json(exp2_config(L, n, seed));
  }, py::arg("L"), py::arg("n") = 10, py::arg("seed") = 1);
  m.def("validate_config", [](const std::string &json) {
    config_from_json(json).validate();
  }, "Raises ValidationError naming the offending field.");
  m.def("config_hash", [](const std::string &json) {
    return config_hash(config_from_json(json));
  });
  m.def("run_experiment", [](const std::string &json) {
    auto config = config_from_json(json);
    RunArtifacts run;
    {
      py::gil_scoped_release release;
      run = run_experiment(config);
    }
    return run_to_dict(run);
  }, py::arg("config"));

  m.def("coefficients", [](const Vector &x, double omega, double sigma,
                           const std::vector<double> &weights,
                           const std::vector<Vector> &centers,
                           const std::vector<double> &scales) {
    require(weights.size() == centers.size() && weights.size() == scales.size(),
            "weights", "weights, centers and scales differ in length");
    std::vector<MixtureComponent> comps;
    for (std::size_t k = 0; k < weights.size(); ++k)
      comps.push_back({weights[k], centers[k], scales[k]});
    ActorParams p;
    p.confidence = omega;
    p.visibility = sigma;
    auto dd = coefficients(x, p, Population{MixturePopulation(std::move(comps))});
    return std::make_pair(dd.drift, dd.diffusion);
  }, py::arg("x"), py::arg("omega"), py::arg("sigma"), py::arg("weights"),
     py::arg("centers"), py::arg("scales"),
     "Drift vector and diffusion matrix at x against a Gaussian mixture population.");

  m.def("dissimilarity", [](const Matrix &W, const Matrix &G, const std::string &g) {
    auto r = dissimilarity_from_posteriors(W, G, parse_g(g));
    return std::make_pair(r.M, r.omega);
  }, py::arg("W"), py::arg("G"), py::arg("g") = "arccos");
  m.def("double_center", &double_center);
  m.def("cmds", &cmds, py::arg("M"), py::arg("d"));
  m.def("procrustes_select", &procrustes_select, py::arg("B"), py::arg("Z"));
  m.def("kmeans", [](const Matrix &X, int k, std::uint64_t seed) {
    auto r = kmeans(X, k, seed);
    return std::make_tuple(r.labels, r.centroids, r.inertia);
  }, py::arg("X"), py::arg("k"), py::arg("seed") = 0);
  m.def("ari", &ari, py::arg("a"), py::arg("b"));
}
