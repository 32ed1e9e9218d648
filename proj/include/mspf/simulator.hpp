#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mspf/config.hpp"

namespace mspf {

/// Per scale, per individual time series ([steps_l, N_l], rows = flattened
/// nested time).
using ScaleSeries = std::vector<std::vector<Matrix>>;

/// A data file parsed but does not match the config's shapes.
class ShapeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundTruth {
  ScaleSeries states;
  ScaleSeries measurements;
  std::vector<std::vector<int>> indicators;  // [individual][coarse step]
};

/// Called once per coarse update with the 0-based flat index range
/// [first, last] of the finer-scale steps the update consumed.
using WindowProbe = std::function<void(int individual, int t, std::int64_t first, std::int64_t last)>;

GroundTruth simulate(const ScaleSystemConfig& config, const RegimeSchedule& schedule,
                     const WindowProbe& probe = {});

/// All individuals: m0 / m1 / m0 over thirds (boundaries at floor(T/3)).
RegimeSchedule build_sim1_schedule(int horizon, int individuals = 6);

/// Six individual-specific three-phase patterns.
RegimeSchedule build_sim2_schedule(int horizon);

/// {"preset": "sim1"|"sim2"}, {"constant": m}, or an explicit [[...], ...].
RegimeSchedule schedule_from_json(const Json& node, const ScaleSystemConfig& config);

/// Writes states_scale<l>.csv, measurements_scale<l>.csv (l 1-based),
/// indicators.csv and run_metadata.json into `dir`.
void write_ground_truth(const std::filesystem::path& dir, const GroundTruth& truth,
                        const ScaleSystemConfig& config);

/// Reads one scale-series CSV family ("states" or "measurements") and checks
/// it against the config's shapes.  Throws ShapeMismatch on mismatch.
ScaleSeries read_scale_series(const std::filesystem::path& dir, const std::string& stem,
                              const ScaleSystemConfig& config);

std::vector<std::vector<int>> read_indicators(const std::filesystem::path& dir,
                                              const ScaleSystemConfig& config);

Json run_metadata(const ScaleSystemConfig& config);

}  // namespace mspf
