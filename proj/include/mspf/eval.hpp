#pragma once

#include <filesystem>
#include <vector>

#include "mspf/filter.hpp"
#include "mspf/simulator.hpp"

namespace mspf {

struct IndicatorMetrics {
  std::vector<double> accuracy;                   // [individual]
  std::vector<std::vector<int>> switch_times;     // [individual], 1-based coarse steps
  std::vector<std::vector<double>> switch_delay;  // [individual][switch], +inf if never matched
};

struct EvalReport {
  Matrix coarse_rmse;                 // [individual, dim]
  std::vector<Matrix> fine_rmse;      // [individual] -> [coarse step, dim]
  std::vector<double> indicator_accuracy;          // with burn-in
  std::vector<double> indicator_accuracy_all;      // burn-in 0
  std::vector<std::vector<int>> switch_times;
  std::vector<std::vector<double>> switch_delay;
  int burn_in = 5;
};

/// RMSE over the coarse horizon per individual and dimension.
Matrix coarse_rmse(const GroundTruth& truth, const FilterOutput& out, const ScaleSystemConfig& config);

/// RMSE within each window of the scale just below the coarsest, one row
/// per coarse step.
std::vector<Matrix> fine_rmse_per_window(const GroundTruth& truth, const FilterOutput& out,
                                         const ScaleSystemConfig& config);

/// Accuracy over coarse steps t > burn_in; the delay of a switch at time s is
/// the first t >= s (before the next switch) with a correct MAP, minus s.
IndicatorMetrics indicator_metrics(const std::vector<std::vector<int>>& truth,
                                   const std::vector<std::vector<int>>& map, int burn_in);

EvalReport evaluate(const GroundTruth& truth, const FilterOutput& out, const ScaleSystemConfig& config,
                    int burn_in = 5);

/// coarse_rmse.csv (individual x dims), fine_rmse.csv (individual, t, dims),
/// indicators.csv, switch_delays.csv and summary.txt.
void emit_report(const std::filesystem::path& dir, const EvalReport& report);
EvalReport read_report(const std::filesystem::path& dir);

}  // namespace mspf
