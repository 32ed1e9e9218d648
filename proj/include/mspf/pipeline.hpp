#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mspf/config.hpp"
#include "mspf/eval.hpp"
#include "mspf/filter.hpp"
#include "mspf/simulator.hpp"

namespace mspf {

struct PipelineOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  int burn_in = 5;
  int threads = 0;
  std::optional<DegeneratePolicy> degenerate_policy;
};

struct PipelineRun {
  ScaleSystemConfig config;
  RegimeSchedule schedule;
  FilterConfig filter;
  GroundTruth truth;
  FilterOutput output;
  EvalReport report;
};

/// simulate -> filter -> evaluate for one document and seed.
PipelineRun run_pipeline(const Json& doc, const PipelineOptions& options);

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Aggregate of several seeded runs of one study against its bands.
struct ReproduceSummary {
  std::string study;
  std::vector<std::uint64_t> seeds;
  Matrix mean_coarse_rmse;                   // [individual, dim] over seeds
  std::vector<double> mean_accuracy;         // [individual] over seeds (burn-in applied)
  std::vector<double> median_switch_delay;   // per switch index (pooled over seeds, individuals)
  double fine_fraction_below = 0.0;          // share of fine window cells < 0.25
  std::vector<CriterionResult> criteria;

  bool passed() const;
};

struct ReproduceOptions {
  std::string study = "sim1";  // sim1 | sim2
  int seeds = 5;
  std::uint64_t seed_base = 1;
  std::optional<int> particles;
  int burn_in = 5;
  int threads = 0;
};

/// Runs the study over `seeds` consecutive seeds, evaluates the acceptance
/// bands and (when `out_dir` is set) writes per-seed reports, a long-format
/// plot CSV and summary.txt.
ReproduceSummary reproduce(const ReproduceOptions& options,
                           const std::optional<std::filesystem::path>& out_dir = {});

std::string format_summary(const ReproduceSummary& summary);

}  // namespace mspf
