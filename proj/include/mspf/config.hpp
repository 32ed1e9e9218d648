#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mspf/math.hpp"

namespace mspf {

using Json = nlohmann::json;

/// Malformed configuration document (missing keys, wrong types, bad shapes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic part of a transition, chosen by family plus coefficients.
///
/// Drift for an individual d at scale l (0-based, L-1 coarsest):
///
///   base(x) + adjacency_gain * A x
///           + window_gain   * sum over finer scales of the weighted window mean
///           + coarse_gain   * (previous state of scale l+1)          [l < L-1]
///           + neighbor_gain * sum_{d' != d} B(d, d') x_{d'}          [l = L-1]
///
/// where base(x) is, elementwise,
///   Sine         amplitude * sin(x + phase)
///   CosExpDecay  amplitude * cos(frequency * x) * exp(-decay * x)
///   CosAdjacency amplitude * cos(offset + A x)
///   Linear       0
enum class TransitionFamily { Sine, CosExpDecay, CosAdjacency, Linear };

struct TransitionSpec {
  TransitionFamily family = TransitionFamily::Linear;
  double amplitude = 1.0;
  double phase = 0.0;
  double frequency = 1.0;
  double decay = 0.0;
  double offset = 0.0;
  double adjacency_gain = 0.0;
  double window_gain = 1.0;
  double coarse_gain = 0.0;
  double neighbor_gain = 0.0;

  bool operator==(const TransitionSpec&) const = default;
};

/// Where the structural matrices came from, for run metadata.
struct StructureProvenance {
  std::vector<std::string> adjacency_source;  // per scale: "explicit" or generator name
  std::string interaction_source = "explicit";
  std::optional<std::pair<int, int>> interaction_offdiagonal;  // 0-based (row, col)
};

/// Full description of an L-scale switching system.  Scale index 0 is the
/// finest, num_scales - 1 the coarsest; `horizons[l]` counts steps of scale l
/// per step of scale l + 1, and the last entry is the total coarse horizon.
struct ScaleSystemConfig {
  int num_scales = 2;
  int num_individuals = 1;
  std::vector<int> state_dims;
  std::vector<int> horizons;
  int num_models = 1;
  std::vector<std::vector<Matrix>> process_noise;      // [individual][scale]
  std::vector<std::vector<Matrix>> measurement_noise;  // [individual][scale]
  std::vector<Matrix> adjacency;                       // [scale]
  Matrix interaction;                                  // D x D
  std::vector<double> measurement_rotation;            // [scale], radians
  Vector dirichlet_alpha;                              // [model]
  std::vector<Vector> fine_summary_weights;            // [scale < L-1]
  std::vector<double> initial_states;                  // [individual]
  std::uint64_t seed = 0;
  std::vector<TransitionSpec> fine_transitions;        // [scale < L-1]
  std::vector<TransitionSpec> coarse_models;           // [model]
  StructureProvenance provenance;

  int coarse_scale() const noexcept { return num_scales - 1; }
  /// Total number of steps of scale l over the whole run.
  std::int64_t total_steps(int scale) const;
  /// Steps of scale l inside one step of the coarsest scale.
  std::int64_t steps_per_coarse_step(int scale) const;
};

/// True model index per individual per coarse step (0-based time).
struct RegimeSchedule {
  std::vector<std::vector<int>> models;  // [individual][coarse step]

  int num_individuals() const noexcept { return static_cast<int>(models.size()); }
  /// Model at coarse step t (1-based, as in t = 1..T).
  int model_at(int individual, int t) const { return models.at(individual).at(t - 1); }
};

/// Every invariant violation of the config; empty means valid.
std::vector<std::string> validate_config(const ScaleSystemConfig& config);

/// Schedule coverage and model-range violations against a config.
std::vector<std::string> validate_schedule(const ScaleSystemConfig& config,
                                           const RegimeSchedule& schedule);

/// Defaults shared by the two shipped studies (initial states cycle
/// 0.2 / 0.5 / 0.7, uniform Dirichlet prior, uniform window weights).
double default_initial_state(int individual);

// ---- structured text (JSON) documents -------------------------------------

Json load_document(const std::filesystem::path& path);

/// Builds a concrete config from a document.  Matrix generators
/// ({"generator": ...}) are resolved from the (possibly overridden) seed.
ScaleSystemConfig config_from_json(const Json& doc, std::optional<std::uint64_t> seed = {});

/// Writes a fully explicit document (generated matrices written out).
Json config_to_json(const ScaleSystemConfig& config);


/// Canonical documents for the two simulation studies.
Json sim1_document();
Json sim2_document();

std::string family_name(TransitionFamily family);
TransitionFamily family_from_name(const std::string& name);

}  // namespace mspf
