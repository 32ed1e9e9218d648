#include "mspf/simulator.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

#include "mspf/csv.hpp"
#include "mspf/dynamics.hpp"

namespace mspf {
namespace {

int third_of(int t, int horizon) {
  const int b = horizon / 3;
  if (t <= b) return 0;
  if (t <= 2 * b) return 1;
  return 2;
}

RegimeSchedule from_patterns(const std::vector<std::array<int, 3>>& patterns, int horizon) {
  RegimeSchedule s;
  for (const auto& p : patterns) {
    std::vector<int> row(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) row[static_cast<std::size_t>(t - 1)] = p[static_cast<std::size_t>(third_of(t, horizon))];
    s.models.push_back(std::move(row));
  }
  return s;
}

class Simulation {
 public:
  Simulation(const ScaleSystemConfig& config, const RegimeSchedule& schedule, const WindowProbe& probe)
      : cfg_(config), schedule_(schedule), probe_(probe) {
    const int L = cfg_.num_scales;
    const int D = cfg_.num_individuals;
    for (int d = 0; d < D; ++d) {
      std::vector<Gaussian> w, v;
      for (int l = 0; l < L; ++l) {
        w.emplace_back(cfg_.process_noise[d][l], "process_noise");
        v.emplace_back(cfg_.measurement_noise[d][l], "measurement_noise");
      }
      process_.push_back(std::move(w));
      measure_.push_back(std::move(v));
    }
    truth_.states.resize(static_cast<std::size_t>(L));
    truth_.measurements.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const auto steps = cfg_.total_steps(l);
      for (int d = 0; d < D; ++d) {
        truth_.states[l].push_back(Matrix::Zero(steps, cfg_.state_dims[l]));
        truth_.measurements[l].push_back(Matrix::Zero(steps, cfg_.state_dims[l]));
      }
    }
    current_.assign(static_cast<std::size_t>(D), {});
    windows_.assign(static_cast<std::size_t>(D), {});
    counters_.assign(static_cast<std::size_t>(D), std::vector<std::int64_t>(static_cast<std::size_t>(L), 0));
    for (int d = 0; d < D; ++d) {
      for (int l = 0; l < L; ++l) {
        current_[d].push_back(Vector::Constant(cfg_.state_dims[l], cfg_.initial_states[d]));
        if (l + 1 < L) windows_[d].push_back(Matrix::Zero(cfg_.horizons[l], cfg_.state_dims[l]));
      }
    }
    truth_.indicators = schedule_.models;
  }

  GroundTruth run() {
    const int L = cfg_.num_scales;
    const int D = cfg_.num_individuals;
    const int coarse = L - 1;
    const int horizon = cfg_.horizons[coarse];
    Matrix others(D, cfg_.state_dims[coarse]);
    Vector drift(cfg_.state_dims[coarse]);
    for (int t = 1; t <= horizon; ++t) {
      for (int d = 0; d < D; ++d) others.row(d) = current_[d][coarse].transpose();
      for (int d = 0; d < D; ++d) {
        std::int64_t first = 0;
        if (coarse > 0) {
          first = counters_[d][coarse - 1];
          advance_window(d, coarse - 1);
        }
        if (probe_ && coarse > 0) probe_(d, t, first, counters_[d][coarse - 1] - 1);

        DriftCoupling coupling;
        Vector window_mean;
        if (coarse > 0) {
          window_mean = weighted_time_average(windows_[d][coarse - 1], cfg_.fine_summary_weights[coarse - 1]);
          coupling.window_mean = &window_mean;
        }
        const Vector neighbors = neighbor_sum(cfg_.interaction, others, d);
        coupling.neighbor_sum = &neighbors;
        const int model = schedule_.model_at(d, t);
        transition_drift(cfg_.coarse_models[model], cfg_.adjacency[coarse], current_[d][coarse], coupling, drift);
        record(d, coarse, drift);
      }
    }
    return std::move(truth_);
  }

 private:
  void advance_window(int d, int l) {
    Vector drift(cfg_.state_dims[l]);
    for (int k = 0; k < cfg_.horizons[l]; ++k) {
      DriftCoupling coupling;
      Vector window_mean;
      if (l > 0) {
        advance_window(d, l - 1);
        window_mean = weighted_time_average(windows_[d][l - 1], cfg_.fine_summary_weights[l - 1]);
        coupling.window_mean = &window_mean;
      }
      coupling.coarser_prev = &current_[d][l + 1];
      transition_drift(cfg_.fine_transitions[l], cfg_.adjacency[l], current_[d][l], coupling, drift);
      record(d, l, drift);
      windows_[d][l].row(k) = current_[d][l].transpose();
    }
  }

  // Adds process noise to the drift, stores state and measurement.
  void record(int d, int l, const Vector& drift) {
    const auto step = counters_[d][l]++;
    const auto ud = static_cast<std::uint64_t>(d);
    const auto ul = static_cast<std::uint64_t>(l);
    const auto us = static_cast<std::uint64_t>(step);
    RngStream w_rng(StreamKey{cfg_.seed, StreamPurpose::SimProcess, ud, ul, 0, us});
    Vector& x = current_[d][l];
    x = drift;
    process_[d][l].add_noise(w_rng, x);
    truth_.states[l][d].row(step) = x.transpose();

    RngStream v_rng(StreamKey{cfg_.seed, StreamPurpose::SimMeasure, ud, ul, 0, us});
    Vector y = rotate(cfg_.measurement_rotation[l], x);
    measure_[d][l].add_noise(v_rng, y);
    truth_.measurements[l][d].row(step) = y.transpose();
  }

  const ScaleSystemConfig& cfg_;
  const RegimeSchedule& schedule_;
  const WindowProbe& probe_;
  std::vector<std::vector<Gaussian>> process_, measure_;
  std::vector<std::vector<Vector>> current_;   // [d][l]
  std::vector<std::vector<Matrix>> windows_;   // [d][l < L-1]
  std::vector<std::vector<std::int64_t>> counters_;
  GroundTruth truth_;
};

void check_inputs(const ScaleSystemConfig& config, const RegimeSchedule& schedule) {
  auto problems = validate_config(config);
  const auto schedule_problems = validate_schedule(config, schedule);
  problems.insert(problems.end(), schedule_problems.begin(), schedule_problems.end());
  if (!problems.empty()) {
    std::string msg = "invalid simulation inputs:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
}

std::string scale_file(const std::string& stem, int scale) {
  return stem + "_scale" + std::to_string(scale + 1) + ".csv";
}

}  // namespace

GroundTruth simulate(const ScaleSystemConfig& config, const RegimeSchedule& schedule,
                     const WindowProbe& probe) {
  check_inputs(config, schedule);
  return Simulation(config, schedule, probe).run();
}

RegimeSchedule build_sim1_schedule(int horizon, int individuals) {
  return from_patterns(std::vector<std::array<int, 3>>(static_cast<std::size_t>(individuals), {0, 1, 0}), horizon);
}

RegimeSchedule build_sim2_schedule(int horizon) {
  return from_patterns({{1, 0, 1}, {0, 1, 0}, {0, 1, 1}, {1, 1, 0}, {0, 0, 1}, {1, 0, 0}}, horizon);
}

RegimeSchedule schedule_from_json(const Json& node, const ScaleSystemConfig& config) {
  const int horizon = config.horizons.empty() ? 0 : config.horizons.back();
  if (node.is_object() && node.contains("preset")) {
    const auto preset = node.at("preset").get<std::string>();
    if (preset == "sim1") return build_sim1_schedule(horizon, config.num_individuals);
    if (preset == "sim2") {
      if (config.num_individuals != 6) throw ConfigError("schedule preset sim2 needs 6 individuals");
      return build_sim2_schedule(horizon);
    }
    throw ConfigError("unknown schedule preset '" + preset + "'");
  }
  if (node.is_object() && node.contains("constant")) {
    const int m = node.at("constant").get<int>();
    RegimeSchedule s;
    s.models.assign(static_cast<std::size_t>(config.num_individuals), std::vector<int>(static_cast<std::size_t>(horizon), m));
    return s;
  }
  if (node.is_array()) {
    RegimeSchedule s;
    try {
      s.models = node.get<std::vector<std::vector<int>>>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("schedule: ") + e.what());
    }
    return s;
  }
  throw ConfigError("schedule: expected preset, constant or explicit table");
}

Json run_metadata(const ScaleSystemConfig& config) {
  Json adjacency = Json::array();
  for (std::size_t l = 0; l < config.adjacency.size(); ++l) {
    const auto& a = config.adjacency[l];
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
      rows.push_back(row);
    }
    adjacency.push_back(Json{{"scale", l + 1},
                             {"source", l < config.provenance.adjacency_source.size() ? config.provenance.adjacency_source[l] : "explicit"},
                             {"matrix", rows}});
  }
  Json b = Json::array();
  for (Eigen::Index r = 0; r < config.interaction.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < config.interaction.cols(); ++c) row.push_back(config.interaction(r, c));
    b.push_back(row);
  }
  Json meta{{"seed", config.seed},
            {"adjacency", adjacency},
            {"interaction", Json{{"source", config.provenance.interaction_source}, {"matrix", b}}}};
  if (config.provenance.interaction_offdiagonal) {
    // 1-based, matching the individual numbering of the CSV files.
    meta["interaction"]["random_offdiagonal"] = {config.provenance.interaction_offdiagonal->first + 1,
                                                 config.provenance.interaction_offdiagonal->second + 1};
  }
  return meta;
}

void write_ground_truth(const std::filesystem::path& dir, const GroundTruth& truth,
                        const ScaleSystemConfig& config) {
  std::filesystem::create_directories(dir);
  for (int l = 0; l < config.num_scales; ++l) {
    for (const auto* series : {&truth.states, &truth.measurements}) {
      csv::Table table;
      table.header = {"individual", "t"};
      for (int n = 0; n < config.state_dims[l]; ++n) table.header.push_back("dim_" + std::to_string(n));
      for (int d = 0; d < config.num_individuals; ++d) {
        const Matrix& m = (*series)[l][d];
        for (Eigen::Index t = 0; t < m.rows(); ++t) {
          std::vector<double> row{static_cast<double>(d + 1), static_cast<double>(t + 1)};
          for (Eigen::Index n = 0; n < m.cols(); ++n) row.push_back(m(t, n));
          table.rows.push_back(std::move(row));
        }
      }
      csv::write(dir / scale_file(series == &truth.states ? "states" : "measurements", l), table);
    }
  }
  csv::Table indicators;
  indicators.header = {"individual", "t", "model"};
  for (std::size_t d = 0; d < truth.indicators.size(); ++d)
    for (std::size_t t = 0; t < truth.indicators[d].size(); ++t)
      indicators.rows.push_back({static_cast<double>(d + 1), static_cast<double>(t + 1),
                                 static_cast<double>(truth.indicators[d][t])});
  csv::write(dir / "indicators.csv", indicators);

  std::ofstream meta(dir / "run_metadata.json", std::ios::binary);
  meta << run_metadata(config).dump(2) << '\n';
}

ScaleSeries read_scale_series(const std::filesystem::path& dir, const std::string& stem,
                              const ScaleSystemConfig& config) {
  ScaleSeries out(static_cast<std::size_t>(config.num_scales));
  for (int l = 0; l < config.num_scales; ++l) {
    const auto path = dir / scale_file(stem, l);
    const auto table = csv::read(path);
    const int dims = config.state_dims[l];
    const auto steps = config.total_steps(l);
    if (static_cast<int>(table.header.size()) != dims + 2) {
      throw ShapeMismatch(path.string() + ": expected " + std::to_string(dims) + " dimension columns");
    }
    if (static_cast<std::int64_t>(table.rows.size()) != steps * config.num_individuals) {
      throw ShapeMismatch(path.string() + ": expected " + std::to_string(steps * config.num_individuals) + " rows");
    }
    for (int d = 0; d < config.num_individuals; ++d) out[l].push_back(Matrix::Zero(steps, dims));
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(config.num_individuals),
                                        std::vector<char>(static_cast<std::size_t>(steps), 0));
    for (const auto& row : table.rows) {
      const auto d = static_cast<std::int64_t>(row[0]) - 1;
      const auto t = static_cast<std::int64_t>(row[1]) - 1;
      if (d < 0 || d >= config.num_individuals || t < 0 || t >= steps || seen[d][t]) {
        throw ShapeMismatch(path.string() + ": bad or duplicate (individual, t) key");
      }
      seen[d][t] = 1;
      for (int n = 0; n < dims; ++n) out[l][d](t, n) = row[static_cast<std::size_t>(n + 2)];
    }
  }
  return out;
}

std::vector<std::vector<int>> read_indicators(const std::filesystem::path& dir,
                                              const ScaleSystemConfig& config) {
  const auto table = csv::read(dir / "indicators.csv");
  const int horizon = config.horizons.back();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(config.num_individuals),
                                    std::vector<int>(static_cast<std::size_t>(horizon), -1));
  for (const auto& row : table.rows) {
    const auto d = static_cast<int>(row.at(0)) - 1;
    const auto t = static_cast<int>(row.at(1)) - 1;
    if (d < 0 || d >= config.num_individuals || t < 0 || t >= horizon) {
      throw std::runtime_error("indicators.csv: key out of range");
    }
    out[d][t] = static_cast<int>(row.at(2));
  }
  return out;
}

}  // namespace mspf
