#include "mspf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mspf/csv.hpp"

namespace mspf {
namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << v;
  return ss.str();
}

void append_plot_rows(csv::Table& table, std::uint64_t seed, const PipelineRun& run) {
  const int coarse = run.config.coarse_scale();
  for (int d = 0; d < run.config.num_individuals; ++d) {
    const Matrix& x = run.truth.states[coarse][d];
    const Matrix& e = run.output.state_estimates[coarse][d];
    for (Eigen::Index t = 0; t < x.rows(); ++t)
      for (Eigen::Index n = 0; n < x.cols(); ++n)
        table.rows.push_back({static_cast<double>(seed), static_cast<double>(d + 1), static_cast<double>(t + 1),
                              static_cast<double>(n + 1), x(t, n), e(t, n),
                              static_cast<double>(run.truth.indicators[d][t]),
                              static_cast<double>(run.output.indicator_map[d][t])});
  }
}

}  // namespace

bool ReproduceSummary::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

PipelineRun run_pipeline(const Json& doc, const PipelineOptions& options) {
  PipelineRun run;
  run.config = config_from_json(doc, options.seed);
  const auto problems = validate_config(run.config);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  run.schedule = schedule_from_json(doc.contains("schedule") ? doc.at("schedule") : Json{{"constant", 0}}, run.config);
  run.filter = filter_config_from_json(doc, run.config.seed);
  if (options.particles) run.filter.num_particles = *options.particles;
  if (options.degenerate_policy) run.filter.degenerate_policy = *options.degenerate_policy;
  run.filter.threads = options.threads;
  run.truth = simulate(run.config, run.schedule);
  run.output = run_filter(run.config, run.filter, run.truth.measurements);
  run.report = evaluate(run.truth, run.output, run.config, options.burn_in);
  return run;
}

ReproduceSummary reproduce(const ReproduceOptions& options,
                           const std::optional<std::filesystem::path>& out_dir) {
  if (options.seeds < 1) throw std::invalid_argument("reproduce: seeds must be >= 1");
  Json doc;
  if (options.study == "sim1") doc = sim1_document();
  else if (options.study == "sim2") doc = sim2_document();
  else throw std::invalid_argument("reproduce: unknown study '" + options.study + "'");

  ReproduceSummary summary;
  summary.study = options.study;
  csv::Table plot;
  plot.header = {"seed", "individual", "t", "dim", "truth", "estimate", "true_model", "map_model"};

  std::vector<Matrix> rmse;
  std::vector<std::vector<double>> accuracy;
  std::vector<std::vector<double>> delays;  // per switch index
  std::size_t fine_cells = 0, fine_below = 0;

  for (int k = 0; k < options.seeds; ++k) {
    const std::uint64_t seed = options.seed_base + static_cast<std::uint64_t>(k);
    summary.seeds.push_back(seed);
    PipelineOptions po;
    po.seed = seed;
    po.particles = options.particles;
    po.burn_in = options.burn_in;
    po.threads = options.threads;
    const PipelineRun run = run_pipeline(doc, po);

    rmse.push_back(run.report.coarse_rmse);
    accuracy.push_back(run.report.indicator_accuracy);
    for (const auto& per_individual : run.report.switch_delay)
      for (std::size_t s = 0; s < per_individual.size(); ++s) {
        if (delays.size() <= s) delays.resize(s + 1);
        delays[s].push_back(per_individual[s]);
      }
    for (const auto& m : run.report.fine_rmse) {
      fine_cells += static_cast<std::size_t>(m.size());
      fine_below += static_cast<std::size_t>((m.array() < 0.25).count());
    }
    if (out_dir) {
      const auto dir = *out_dir / ("seed_" + std::to_string(seed));
      emit_report(dir, run.report);
      append_plot_rows(plot, seed, run);
    }
  }

  summary.mean_coarse_rmse = Matrix::Zero(rmse.front().rows(), rmse.front().cols());
  for (const auto& m : rmse) summary.mean_coarse_rmse += m;
  summary.mean_coarse_rmse /= static_cast<double>(rmse.size());
  summary.mean_accuracy.assign(accuracy.front().size(), 0.0);
  for (const auto& a : accuracy)
    for (std::size_t d = 0; d < a.size(); ++d) summary.mean_accuracy[d] += a[d] / static_cast<double>(accuracy.size());
  for (const auto& per_switch : delays) summary.median_switch_delay.push_back(median(per_switch));
  summary.fine_fraction_below = fine_cells ? static_cast<double>(fine_below) / static_cast<double>(fine_cells) : 1.0;

  const double rmse_lo = 0.05;
  const double rmse_hi = options.study == "sim1" ? 0.30 : 0.32;
  const double lo = summary.mean_coarse_rmse.minCoeff();
  const double hi = summary.mean_coarse_rmse.maxCoeff();
  summary.criteria.push_back({"coarse RMSE per individual/dim in [" + num(rmse_lo) + ", " + num(rmse_hi) + "]",
                              lo >= rmse_lo && hi <= rmse_hi, "range " + num(lo) + " .. " + num(hi)});
  const double min_acc = *std::min_element(summary.mean_accuracy.begin(), summary.mean_accuracy.end());
  double mean_acc = 0.0;
  for (double a : summary.mean_accuracy) mean_acc += a / static_cast<double>(summary.mean_accuracy.size());
  if (options.study == "sim1") {
    summary.criteria.push_back({"indicator accuracy >= 0.90 for every individual (burn-in " +
                                    std::to_string(options.burn_in) + ")",
                                min_acc >= 0.90, "min " + num(min_acc)});
    bool delays_ok = !summary.median_switch_delay.empty();
    std::string detail;
    for (double m : summary.median_switch_delay) {
      delays_ok = delays_ok && m <= 2.0;
      detail += (detail.empty() ? "" : ", ") + num(m);
    }
    summary.criteria.push_back({"median switch delay <= 2 coarse steps", delays_ok, "medians " + detail});
    summary.criteria.push_back({"fine window RMSE < 0.25 in >= 95% of cells", summary.fine_fraction_below >= 0.95,
                                "fraction " + num(summary.fine_fraction_below)});
  } else {
    summary.criteria.push_back({"indicator accuracy >= 0.85 for every individual (burn-in " +
                                    std::to_string(options.burn_in) + ")",
                                min_acc >= 0.85, "min " + num(min_acc)});
    summary.criteria.push_back({"mean indicator accuracy >= 0.90", mean_acc >= 0.90, "mean " + num(mean_acc)});
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    csv::write(*out_dir / "plot_long.csv", plot);
    csv::Table mean_rmse;
    mean_rmse.header = {"individual"};
    for (Eigen::Index n = 0; n < summary.mean_coarse_rmse.cols(); ++n) mean_rmse.header.push_back("dim_" + std::to_string(n + 1));
    for (Eigen::Index d = 0; d < summary.mean_coarse_rmse.rows(); ++d) {
      std::vector<double> row{static_cast<double>(d + 1)};
      for (Eigen::Index n = 0; n < summary.mean_coarse_rmse.cols(); ++n) row.push_back(summary.mean_coarse_rmse(d, n));
      mean_rmse.rows.push_back(std::move(row));
    }
    csv::write(*out_dir / "mean_coarse_rmse.csv", mean_rmse);
    std::ofstream(*out_dir / "summary.txt", std::ios::binary) << format_summary(summary);
  }
  return summary;
}

std::string format_summary(const ReproduceSummary& summary) {
  std::ostringstream out;
  out << "study " << summary.study << ", seeds";
  for (auto s : summary.seeds) out << ' ' << s;
  out << '\n';
  for (const auto& c : summary.criteria)
    out << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
  out << (summary.passed() ? "OVERALL PASS" : "OVERALL FAIL") << '\n';
  return out.str();
}

}  // namespace mspf
