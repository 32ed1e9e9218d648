#include "mspf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "mspf/csv.hpp"

namespace mspf {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": truth and estimate shapes differ");
  }
}

std::string fmt(double v) { return csv::format_number(v); }

}  // namespace

Matrix coarse_rmse(const GroundTruth& truth, const FilterOutput& out, const ScaleSystemConfig& config) {
  const int coarse = config.coarse_scale();
  const int D = config.num_individuals;
  Matrix rmse(D, config.state_dims[static_cast<std::size_t>(coarse)]);
  for (int d = 0; d < D; ++d) {
    const Matrix& x = truth.states.at(coarse).at(d);
    const Matrix& e = out.state_estimates.at(coarse).at(d);
    require_same_shape(x, e, "coarse_rmse");
    rmse.row(d) = ((e - x).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  }
  return rmse;
}

std::vector<Matrix> fine_rmse_per_window(const GroundTruth& truth, const FilterOutput& out,
                                         const ScaleSystemConfig& config) {
  std::vector<Matrix> result;
  if (config.num_scales < 2) return result;
  const int scale = config.coarse_scale() - 1;
  const auto window = config.steps_per_coarse_step(scale);
  const int horizon = config.horizons.back();
  for (int d = 0; d < config.num_individuals; ++d) {
    const Matrix& x = truth.states.at(scale).at(d);
    const Matrix& e = out.state_estimates.at(scale).at(d);
    require_same_shape(x, e, "fine_rmse_per_window");
    Matrix r(horizon, x.cols());
    for (int t = 0; t < horizon; ++t) {
      const auto block = (e.middleRows(t * window, window) - x.middleRows(t * window, window)).array();
      r.row(t) = (block.square().colwise().sum() / static_cast<double>(window)).sqrt();
    }
    result.push_back(std::move(r));
  }
  return result;
}

IndicatorMetrics indicator_metrics(const std::vector<std::vector<int>>& truth,
                                   const std::vector<std::vector<int>>& map, int burn_in) {
  if (truth.size() != map.size()) throw std::invalid_argument("indicator_metrics: individual count differs");
  IndicatorMetrics m;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    const auto& s = truth[d];
    const auto& e = map[d];
    if (s.size() != e.size()) throw std::invalid_argument("indicator_metrics: horizon differs");
    const int horizon = static_cast<int>(s.size());
    if (burn_in < 0 || burn_in >= horizon) throw std::invalid_argument("indicator_metrics: burn_in must be in [0, T)");
    int correct = 0;
    for (int t = burn_in; t < horizon; ++t) correct += s[t] == e[t] ? 1 : 0;
    m.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(horizon - burn_in));

    std::vector<int> switches;
    for (int t = 1; t < horizon; ++t)
      if (s[t] != s[t - 1]) switches.push_back(t + 1);
    std::vector<double> delays;
    for (std::size_t k = 0; k < switches.size(); ++k) {
      const int start = switches[k];
      const int stop = k + 1 < switches.size() ? switches[k + 1] : horizon + 1;
      double delay = std::numeric_limits<double>::infinity();
      for (int t = start; t < stop; ++t) {
        if (e[t - 1] == s[t - 1]) {
          delay = t - start;
          break;
        }
      }
      delays.push_back(delay);
    }
    m.switch_times.push_back(std::move(switches));
    m.switch_delay.push_back(std::move(delays));
  }
  return m;
}

EvalReport evaluate(const GroundTruth& truth, const FilterOutput& out, const ScaleSystemConfig& config,
                    int burn_in) {
  EvalReport r;
  r.burn_in = burn_in;
  r.coarse_rmse = coarse_rmse(truth, out, config);
  r.fine_rmse = fine_rmse_per_window(truth, out, config);
  const auto with = indicator_metrics(truth.indicators, out.indicator_map, burn_in);
  const auto without = indicator_metrics(truth.indicators, out.indicator_map, 0);
  r.indicator_accuracy = with.accuracy;
  r.indicator_accuracy_all = without.accuracy;
  r.switch_times = with.switch_times;
  r.switch_delay = with.switch_delay;
  return r;
}

void emit_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::filesystem::create_directories(dir);
  const auto dims = report.coarse_rmse.cols();

  csv::Table coarse;
  coarse.header = {"individual"};
  for (Eigen::Index n = 0; n < dims; ++n) coarse.header.push_back("dim_" + std::to_string(n + 1));
  for (Eigen::Index d = 0; d < report.coarse_rmse.rows(); ++d) {
    std::vector<double> row{static_cast<double>(d + 1)};
    for (Eigen::Index n = 0; n < dims; ++n) row.push_back(report.coarse_rmse(d, n));
    coarse.rows.push_back(std::move(row));
  }
  csv::write(dir / "coarse_rmse.csv", coarse);

  if (!report.fine_rmse.empty()) {
    csv::Table fine;
    fine.header = {"individual", "t"};
    for (Eigen::Index n = 0; n < report.fine_rmse.front().cols(); ++n) fine.header.push_back("dim_" + std::to_string(n + 1));
    for (std::size_t d = 0; d < report.fine_rmse.size(); ++d) {
      const Matrix& m = report.fine_rmse[d];
      for (Eigen::Index t = 0; t < m.rows(); ++t) {
        std::vector<double> row{static_cast<double>(d + 1), static_cast<double>(t + 1)};
        for (Eigen::Index n = 0; n < m.cols(); ++n) row.push_back(m(t, n));
        fine.rows.push_back(std::move(row));
      }
    }
    csv::write(dir / "fine_rmse.csv", fine);
  }

  csv::Table acc;
  acc.header = {"individual", "burn_in", "accuracy", "accuracy_no_burn_in"};
  for (std::size_t d = 0; d < report.indicator_accuracy.size(); ++d)
    acc.rows.push_back({static_cast<double>(d + 1), static_cast<double>(report.burn_in),
                        report.indicator_accuracy[d], report.indicator_accuracy_all[d]});
  csv::write(dir / "indicator_accuracy.csv", acc);

  csv::Table delays;
  delays.header = {"individual", "switch_t", "delay"};
  for (std::size_t d = 0; d < report.switch_times.size(); ++d)
    for (std::size_t k = 0; k < report.switch_times[d].size(); ++k)
      delays.rows.push_back({static_cast<double>(d + 1), static_cast<double>(report.switch_times[d][k]),
                             report.switch_delay[d][k]});
  csv::write(dir / "switch_delays.csv", delays);

  std::ofstream summary(dir / "summary.txt", std::ios::binary);
  auto stats = [&](const char* label, const std::vector<double>& v) {
    if (v.empty()) return;
    double sum = 0.0;
    for (double x : v) sum += x;
    summary << label << " min=" << fmt(*std::min_element(v.begin(), v.end()))
            << " mean=" << fmt(sum / static_cast<double>(v.size()))
            << " max=" << fmt(*std::max_element(v.begin(), v.end())) << '\n';
  };
  std::vector<double> cvals(report.coarse_rmse.data(), report.coarse_rmse.data() + report.coarse_rmse.size());
  stats("coarse_rmse", cvals);
  std::vector<double> fvals;
  for (const auto& m : report.fine_rmse) fvals.insert(fvals.end(), m.data(), m.data() + m.size());
  stats("fine_window_rmse", fvals);
  stats("indicator_accuracy", report.indicator_accuracy);
  stats("indicator_accuracy_no_burn_in", report.indicator_accuracy_all);
}

EvalReport read_report(const std::filesystem::path& dir) {
  EvalReport r;
  const auto coarse = csv::read(dir / "coarse_rmse.csv");
  const auto dims = static_cast<Eigen::Index>(coarse.header.size()) - 1;
  r.coarse_rmse.resize(static_cast<Eigen::Index>(coarse.rows.size()), dims);
  for (std::size_t d = 0; d < coarse.rows.size(); ++d)
    for (Eigen::Index n = 0; n < dims; ++n) r.coarse_rmse(static_cast<Eigen::Index>(d), n) = coarse.rows[d][static_cast<std::size_t>(n + 1)];

  if (std::filesystem::exists(dir / "fine_rmse.csv")) {
    const auto fine = csv::read(dir / "fine_rmse.csv");
    std::map<int, std::vector<std::vector<double>>> rows;
    for (const auto& row : fine.rows) rows[static_cast<int>(row[0])].push_back(row);
    for (auto& [d, block] : rows) {
      Matrix m(static_cast<Eigen::Index>(block.size()), static_cast<Eigen::Index>(fine.header.size()) - 2);
      for (const auto& row : block)
        for (Eigen::Index n = 0; n < m.cols(); ++n) m(static_cast<Eigen::Index>(row[1]) - 1, n) = row[static_cast<std::size_t>(n + 2)];
      r.fine_rmse.push_back(std::move(m));
    }
  }

  const auto acc = csv::read(dir / "indicator_accuracy.csv");
  for (const auto& row : acc.rows) {
    r.burn_in = static_cast<int>(row[1]);
    r.indicator_accuracy.push_back(row[2]);
    r.indicator_accuracy_all.push_back(row[3]);
  }
  const auto delays = csv::read(dir / "switch_delays.csv");
  r.switch_times.resize(r.indicator_accuracy.size());
  r.switch_delay.resize(r.indicator_accuracy.size());
  for (const auto& row : delays.rows) {
    const auto d = static_cast<std::size_t>(row[0]) - 1;
    r.switch_times.at(d).push_back(static_cast<int>(row[1]));
    r.switch_delay.at(d).push_back(row[2]);
  }
  return r;
}

}  // namespace mspf
