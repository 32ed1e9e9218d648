// mspf: simulate, filter, evaluate and reproduce multiscale switching
// state-space runs.
//
// Exit codes: 0 ok, 1 I/O or runtime error, 2 config/shape error,
// 3 degenerate weights under the abort policy, 4 reproduce band failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mspf/config.hpp"
#include "mspf/eval.hpp"
#include "mspf/filter.hpp"
#include "mspf/pipeline.hpp"
#include "mspf/simulator.hpp"

namespace fs = std::filesystem;
using namespace mspf;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kDegenerate = 3, kBandFail = 4 };

struct Loaded {
  Json doc;
  ScaleSystemConfig config;
};

// Parses and validates; prints every violation and returns nullopt on failure.
std::optional<Loaded> load(const std::string& path, std::optional<std::uint64_t> seed) {
  Loaded l;
  l.doc = load_document(path);
  l.config = config_from_json(l.doc, seed);
  const auto problems = validate_config(l.config);
  if (!problems.empty()) {
    std::cerr << "invalid config " << path << ":\n";
    for (const auto& p : problems) std::cerr << "  " << p << '\n';
    return std::nullopt;
  }
  return l;
}

int cmd_simulate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  const auto loaded = load(config_path, seed);
  if (!loaded) return kConfig;
  const auto schedule = schedule_from_json(
      loaded->doc.contains("schedule") ? loaded->doc.at("schedule") : Json{{"constant", 0}}, loaded->config);
  const auto problems = validate_schedule(loaded->config, schedule);
  if (!problems.empty()) {
    std::cerr << "invalid schedule:\n";
    for (const auto& p : problems) std::cerr << "  " << p << '\n';
    return kConfig;
  }
  const auto truth = simulate(loaded->config, schedule);
  write_ground_truth(out, truth, loaded->config);
  std::cout << "wrote ground truth for " << loaded->config.num_individuals << " individuals to " << out << '\n';
  return kOk;
}

struct FilterArgs {
  std::string config;
  std::string measurements;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  bool snapshot = false;
  std::string policy;
};

int cmd_filter(const FilterArgs& args) {
  const auto loaded = load(args.config, args.seed);
  if (!loaded) return kConfig;
  FilterConfig fcfg = filter_config_from_json(loaded->doc, loaded->config.seed);
  if (args.particles) fcfg.num_particles = *args.particles;
  if (args.snapshot) fcfg.snapshot = true;
  if (args.policy == "abort") fcfg.degenerate_policy = DegeneratePolicy::Abort;
  if (args.policy == "uniform") fcfg.degenerate_policy = DegeneratePolicy::UniformFallback;
  const auto fproblems = validate_filter_config(fcfg);
  if (!fproblems.empty()) {
    for (const auto& p : fproblems) std::cerr << "  " << p << '\n';
    return kConfig;
  }
  if (fcfg.num_particles == 1) {
    std::cerr << "warning: a single particle makes resampling trivial; the filter degenerates to "
                 "one stochastic trajectory\n";
  }
  ScaleSeries measurements;
  try {
    measurements = read_scale_series(args.measurements, "measurements", loaded->config);
  } catch (const ShapeMismatch& e) {
    std::cerr << "measurement shape mismatch: " << e.what() << '\n';
    return kConfig;
  }
  const auto output = run_filter(loaded->config, fcfg, measurements);
  write_filter_output(args.out, output, loaded->config);
  if (output.degenerate_events > 0) {
    std::cerr << "warning: " << output.degenerate_events << " degenerate-weight fallbacks\n";
  }
  std::cout << "wrote filter output (" << fcfg.num_particles << " particles) to " << args.out << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& config_path, const std::string& truth_dir, const std::string& est_dir,
                 const std::string& out, int burn_in) {
  const auto loaded = load(config_path, std::nullopt);
  if (!loaded) return kConfig;
  GroundTruth truth;
  FilterOutput est;
  try {
    truth.states = read_scale_series(truth_dir, "states", loaded->config);
    truth.indicators = read_indicators(truth_dir, loaded->config);
    est = read_filter_output(est_dir, loaded->config);
  } catch (const ShapeMismatch& e) {
    std::cerr << "shape mismatch: " << e.what() << '\n';
    return kConfig;
  }
  const auto report = evaluate(truth, est, loaded->config, burn_in);
  emit_report(out, report);
  std::ifstream summary(fs::path(out) / "summary.txt");
  std::cout << summary.rdbuf();
  return kOk;
}

int cmd_reproduce(const ReproduceOptions& options, const std::string& out) {
  const auto summary = reproduce(options, fs::path(out));
  std::cout << format_summary(summary);
  return summary.passed() ? kOk : kBandFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale switching state-space simulator and particle filter"};
  app.require_subcommand(1);

  std::string config_path, out_dir, measurements_dir, truth_dir, estimates_dir, policy, study;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  bool snapshot = false;
  int burn_in = 5;
  int seeds = 5;
  std::uint64_t seed_base = 1;

  auto* sim = app.add_subcommand("simulate", "Generate ground truth and measurements");
  sim->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the master seed");

  auto* filt = app.add_subcommand("filter", "Run the multiscale particle filter on measurements");
  filt->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  filt->add_option("--measurements", measurements_dir, "Directory with measurements_scale*.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  filt->add_option("--out", out_dir, "Output directory")->required();
  filt->add_option("--seed", seed, "Override the master seed");
  filt->add_option("--particles", particles, "Number of particles");
  filt->add_flag("--snapshot", snapshot, "Write per-coarse-step particle clouds");
  filt->add_option("--degenerate-policy", policy, "abort | uniform")->check(CLI::IsMember({"abort", "uniform"}));

  auto* eval = app.add_subcommand("evaluate", "Compute RMSE and indicator metrics");
  eval->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", truth_dir, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--estimates", estimates_dir, "Directory written by filter")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--out", out_dir, "Output directory")->required();
  eval->add_option("--burn-in", burn_in, "Coarse steps excluded from indicator accuracy");

  auto* rep = app.add_subcommand("reproduce", "Simulate, filter and evaluate a study over several seeds");
  rep->add_option("study", study, "sim1 | sim2")->required()->check(CLI::IsMember({"sim1", "sim2"}));
  rep->add_option("--out", out_dir, "Output directory")->required();
  rep->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  rep->add_option("--seed-base", seed_base, "First seed");
  rep->add_option("--particles", particles, "Number of particles");
  rep->add_option("--burn-in", burn_in, "Coarse steps excluded from indicator accuracy");

  auto* write = app.add_subcommand("write-config", "Write the canonical config of a study");
  write->add_option("study", study, "sim1 | sim2")->required()->check(CLI::IsMember({"sim1", "sim2"}));
  write->add_option("--out", out_dir, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(config_path, out_dir, seed);
    if (*filt) return cmd_filter({config_path, measurements_dir, out_dir, seed, particles, snapshot, policy});
    if (*eval) return cmd_evaluate(config_path, truth_dir, estimates_dir, out_dir, burn_in);
    if (*rep) {
      ReproduceOptions options;
      options.study = study;
      options.seeds = seeds;
      options.seed_base = seed_base;
      options.particles = particles;
      options.burn_in = burn_in;
      return cmd_reproduce(options, out_dir);
    }
    if (*write) {
      const fs::path path(out_dir);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      std::ofstream(path, std::ios::binary) << (study == "sim1" ? sim1_document() : sim2_document()).dump(2) << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DegenerateWeights& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
