#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mspf/config.hpp"
#include "mspf/eval.hpp"
#include "mspf/filter.hpp"
#include "mspf/math.hpp"
#include "mspf/pipeline.hpp"
#include "mspf/simulator.hpp"

namespace py = pybind11;
using namespace mspf;

namespace {

RngStream make_rng(std::uint64_t seed, std::uint64_t stream) {
  return RngStream(StreamKey{seed, StreamPurpose::Test, 0, 0, 0, stream});
}

ScaleSystemConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(doc, seed);
}

py::dict series_to_dict(const ScaleSeries& s) {
  // {scale (1-based): [per individual array]}
  py::dict out;
  for (std::size_t l = 0; l < s.size(); ++l) out[py::int_(l + 1)] = py::cast(s[l]);
  return out;
}

ScaleSeries series_from_dict(const py::dict& d, const ScaleSystemConfig& cfg) {
  ScaleSeries s(static_cast<std::size_t>(cfg.num_scales));
  for (int l = 0; l < cfg.num_scales; ++l) {
    if (!d.contains(py::int_(l + 1))) throw std::invalid_argument("measurements: missing scale " + std::to_string(l + 1));
    s[l] = d[py::int_(l + 1)].cast<std::vector<Matrix>>();
  }
  return s;
}

py::dict truth_to_dict(const GroundTruth& t) {
  py::dict out;
  out["states"] = series_to_dict(t.states);
  out["measurements"] = series_to_dict(t.measurements);
  out["indicators"] = t.indicators;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiscale switching state-space simulator and nested particle filter";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ValueError);
  py::register_exception<DegenerateWeights>(m, "DegenerateWeights", PyExc_RuntimeError);
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", PyExc_ValueError);

  py::class_<ScaleSystemConfig>(m, "Config")
      .def_static("from_json", &parse_config, py::arg("text"), py::arg("seed") = py::none(),
                  "Build a config from a JSON document; generators use `seed` if given.")
      .def("to_json", [](const ScaleSystemConfig& c) { return config_to_json(c).dump(); })
      .def("validate", &validate_config, "List of invariant violations (empty when valid).")
      .def_readonly("num_scales", &ScaleSystemConfig::num_scales)
      .def_readonly("num_individuals", &ScaleSystemConfig::num_individuals)
      .def_readonly("num_models", &ScaleSystemConfig::num_models)
      .def_readonly("state_dims", &ScaleSystemConfig::state_dims)
      .def_readonly("horizons", &ScaleSystemConfig::horizons)
      .def_readonly("seed", &ScaleSystemConfig::seed)
      .def_readonly("adjacency", &ScaleSystemConfig::adjacency)
      .def_readonly("interaction", &ScaleSystemConfig::interaction);

  m.def("sim1_document", [] { return sim1_document().dump(); }, "Sim-1 study config as JSON text.");
  m.def("sim2_document", [] { return sim2_document().dump(); }, "Sim-2 study config as JSON text.");

  m.def("sim1_schedule", [](int horizon, int individuals) { return build_sim1_schedule(horizon, individuals).models; },
        py::arg("horizon"), py::arg("individuals") = 6);
  m.def("sim2_schedule", [](int horizon) { return build_sim2_schedule(horizon).models; }, py::arg("horizon"));

  m.def(
      "simulate",
      [](const ScaleSystemConfig& c, const std::vector<std::vector<int>>& schedule) {
        GroundTruth t;
        {
          py::gil_scoped_release release;
          t = simulate(c, RegimeSchedule{schedule});
        }
        return truth_to_dict(t);
      },
      py::arg("config"), py::arg("schedule"),
      "Returns {'states', 'measurements'}: {scale: [array per individual]}, and 'indicators'.");

  m.def(
      "run_filter",
      [](const ScaleSystemConfig& c, const py::dict& measurements, int particles, std::optional<std::uint64_t> seed,
         bool snapshot, const std::string& policy) {
        FilterConfig f;
        f.num_particles = particles;
        f.seed = seed.value_or(c.seed);
        f.snapshot = snapshot;
        if (policy == "abort") f.degenerate_policy = DegeneratePolicy::Abort;
        else if (policy != "uniform") throw std::invalid_argument("policy must be 'abort' or 'uniform'");
        const ScaleSeries meas = series_from_dict(measurements, c);
        FilterOutput out;
        {
          py::gil_scoped_release release;
          out = run_filter(c, f, meas);
        }
        py::dict d;
        d["estimates"] = series_to_dict(out.state_estimates);
        d["indicator_map"] = out.indicator_map;
        d["indicator_freqs"] = out.indicator_freqs;
        d["ess"] = out.ess_trace;
        d["degenerate_events"] = out.degenerate_events;
        if (snapshot) {
          py::list rows;
          for (const auto& s : out.snapshots)
            rows.append(py::make_tuple(s.individual, s.t, s.slot, s.weight, s.model, s.state));
          d["snapshots"] = rows;
        }
        return d;
      },
      py::arg("config"), py::arg("measurements"), py::arg("particles") = 1000, py::arg("seed") = py::none(),
      py::arg("snapshot") = false, py::arg("degenerate_policy") = "uniform");

  m.def(
      "evaluate",
      [](const ScaleSystemConfig& c, const py::dict& truth, const py::dict& estimates, int burn_in) {
        GroundTruth t;
        t.states = series_from_dict(truth["states"].cast<py::dict>(), c);
        t.indicators = truth["indicators"].cast<std::vector<std::vector<int>>>();
        FilterOutput o;
        o.state_estimates = series_from_dict(estimates["estimates"].cast<py::dict>(), c);
        o.indicator_map = estimates["indicator_map"].cast<std::vector<std::vector<int>>>();
        const auto r = evaluate(t, o, c, burn_in);
        py::dict d;
        d["coarse_rmse"] = r.coarse_rmse;
        d["fine_rmse"] = r.fine_rmse;
        d["indicator_accuracy"] = r.indicator_accuracy;
        d["switch_times"] = r.switch_times;
        d["switch_delay"] = r.switch_delay;
        return d;
      },
      py::arg("config"), py::arg("truth"), py::arg("estimates"), py::arg("burn_in") = 5);

  m.def(
      "reproduce",
      [](const std::string& study, int seeds, std::uint64_t seed_base, std::optional<int> particles,
         std::optional<std::filesystem::path> out) {
        ReproduceOptions o;
        o.study = study;
        o.seeds = seeds;
        o.seed_base = seed_base;
        o.particles = particles;
        ReproduceSummary s;
        {
          py::gil_scoped_release release;
          s = reproduce(o, out);
        }
        py::dict d;
        d["passed"] = s.passed();
        d["summary"] = format_summary(s);
        d["mean_coarse_rmse"] = s.mean_coarse_rmse;
        d["mean_accuracy"] = s.mean_accuracy;
        d["median_switch_delay"] = s.median_switch_delay;
        return d;
      },
      py::arg("study"), py::arg("seeds") = 5, py::arg("seed_base") = 1, py::arg("particles") = py::none(),
      py::arg("out") = py::none());

  // numeric kernels, with an explicit (seed, stream) in place of a generator object
  m.def("gaussian_logpdf", &gaussian_logpdf, py::arg("x"), py::arg("mean"), py::arg("cov"));
  m.def(
      "sample_gaussian",
      [](const Vector& mean, const Matrix& cov, std::uint64_t seed, std::uint64_t stream) {
        auto rng = make_rng(seed, stream);
        return sample_gaussian(mean, cov, rng);
      },
      py::arg("mean"), py::arg("cov"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "sample_dirichlet",
      [](const Vector& alpha, std::uint64_t seed, std::uint64_t stream) {
        auto rng = make_rng(seed, stream);
        return sample_dirichlet(alpha, rng);
      },
      py::arg("alpha"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "systematic_resample",
      [](const Vector& weights, int count, std::uint64_t seed, std::uint64_t stream) {
        auto rng = make_rng(seed, stream);
        return systematic_resample(weights, count, rng);
      },
      py::arg("weights"), py::arg("count"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "normalize_log_weights", [](const Vector& lw) { return normalize_log_weights(lw).probs; }, py::arg("log_weights"));
}
