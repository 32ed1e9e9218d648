#include "mspf/filter.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "mspf/csv.hpp"
#include "mspf/dynamics.hpp"
#include "mspf/parallel.hpp"

namespace mspf {
namespace {

std::mutex log_mutex;

std::uint64_t u64(std::int64_t v) { return static_cast<std::uint64_t>(v); }

// Weighted mean of the completed window of `scale` held by slot i.
void window_mean_of(const ParticleCloud& cloud, int scale, int slot, const ScaleSystemConfig& cfg,
                    Vector& out) {
  const int n = cfg.state_dims[static_cast<std::size_t>(scale)];
  const int len = cloud.window_fill[static_cast<std::size_t>(scale)];
  const Vector& w = cfg.fine_summary_weights[static_cast<std::size_t>(scale)];
  if (len != w.size()) throw std::logic_error("window of scale " + std::to_string(scale) + " is incomplete");
  const auto col = cloud.windows[static_cast<std::size_t>(scale)].col(slot);
  out.setZero(n);
  double total = 0.0;
  for (int k = 0; k < len; ++k) {
    out += w[k] * col.segment(static_cast<Eigen::Index>(k) * n, n);
    total += w[k];
  }
  out /= total;
}

}  // namespace

std::vector<std::string> validate_filter_config(const FilterConfig& config) {
  std::vector<std::string> out;
  if (config.num_particles < 1) out.push_back("num_particles: must be >= 1");
  if (config.threads < 0) out.push_back("threads: must be >= 0");
  return out;
}

FilterConfig filter_config_from_json(const Json& doc, std::uint64_t seed) {
  FilterConfig f;
  f.seed = seed;
  if (!doc.contains("filter")) return f;
  const auto& node = doc.at("filter");
  f.num_particles = node.value("num_particles", f.num_particles);
  f.snapshot = node.value("snapshot", f.snapshot);
  const auto policy = node.value("degenerate_policy", std::string("uniform"));
  if (policy == "uniform") f.degenerate_policy = DegeneratePolicy::UniformFallback;
  else if (policy == "abort") f.degenerate_policy = DegeneratePolicy::Abort;
  else throw ConfigError("filter.degenerate_policy: expected 'abort' or 'uniform'");
  return f;
}

// ---- ParticleCloud ----------------------------------------------------------

ParticleCloud::ParticleCloud(const ScaleSystemConfig& config, int individual, int num_particles)
    : individual_(individual), dims_(config.state_dims) {
  const int L = config.num_scales;
  for (int l = 0; l < L; ++l) {
    states.push_back(Matrix::Constant(config.state_dims[l], num_particles, config.initial_states[individual]));
    if (l + 1 < L) {
      windows.push_back(Matrix::Zero(static_cast<Eigen::Index>(config.horizons[l]) * config.state_dims[l], num_particles));
      window_fill.push_back(0);
      window_lengths_.push_back(config.horizons[l]);
    }
  }
  history = Eigen::MatrixXi::Zero(config.horizons.back(), num_particles);
  counts = Eigen::MatrixXi::Zero(config.num_models, num_particles);
  log_weights = Vector::Constant(num_particles, -std::log(static_cast<double>(num_particles)));
  stream_ids.resize(static_cast<std::size_t>(num_particles));
  for (int i = 0; i < num_particles; ++i) stream_ids[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
}

Particle ParticleCloud::particle(int slot) const {
  Particle p;
  for (const auto& s : states) p.states.push_back(s.col(slot));
  for (std::size_t l = 0; l < windows.size(); ++l) {
    const int n = dims_[l];
    Matrix traj(window_fill[l], n);
    for (int k = 0; k < window_fill[l]; ++k) traj.row(k) = windows[l].col(slot).segment(static_cast<Eigen::Index>(k) * n, n).transpose();
    p.fine_trajectory.push_back(std::move(traj));
  }
  for (int k = 0; k < history_length; ++k) p.indicator_history.push_back(history(k, slot));
  for (Eigen::Index m = 0; m < counts.rows(); ++m) p.model_counts.push_back(counts(m, slot));
  p.log_weight = log_weights[slot];
  return p;
}

void ParticleCloud::resample(std::span<const int> ancestors) {
  const auto ns = static_cast<std::size_t>(size());
  if (ancestors.size() != ns) throw std::invalid_argument("resample: ancestor count differs from cloud size");
  bool identity = true;
  for (std::size_t i = 0; i < ns; ++i) identity = identity && ancestors[i] == static_cast<int>(i);
  if (identity) return;

  auto gather = [&](auto& m, Eigen::Index rows) {
    if (rows == 0) return;
    std::decay_t<decltype(m)> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < ns; ++i)
      out.col(static_cast<Eigen::Index>(i)).head(rows) = m.col(ancestors[i]).head(rows);
    m.swap(out);
  };
  for (auto& s : states) gather(s, s.rows());
  for (std::size_t l = 0; l < windows.size(); ++l)
    gather(windows[l], static_cast<Eigen::Index>(window_fill[l]) * dims_[l]);
  gather(history, history_length);
  gather(counts, counts.rows());
  Vector lw(log_weights.size());
  for (std::size_t i = 0; i < ns; ++i) lw[static_cast<Eigen::Index>(i)] = log_weights[ancestors[i]];
  log_weights.swap(lw);
}

// ---- FilterContext ----------------------------------------------------------

FilterContext::FilterContext(const ScaleSystemConfig& cfg, const FilterConfig& f, FilterObserver* obs)
    : config(cfg), filter(f), observer(obs) {
  for (int d = 0; d < cfg.num_individuals; ++d) {
    std::vector<Gaussian> w, v;
    for (int l = 0; l < cfg.num_scales; ++l) {
      const std::string tag = "[individual " + std::to_string(d) + "][scale " + std::to_string(l) + "]";
      w.emplace_back(cfg.process_noise[d][l], "process_noise" + tag);
      v.emplace_back(cfg.measurement_noise[d][l], "measurement_noise" + tag);
    }
    process.push_back(std::move(w));
    measurement.push_back(std::move(v));
  }
}

std::int64_t FilterContext::degenerate_events() const noexcept { return degenerate_events_.load(); }

NormalizedWeights FilterContext::normalize(const Vector& log_weights, const char* where,
                                           int individual, std::int64_t step) const {
  try {
    return normalize_log_weights(log_weights);
  } catch (const DegenerateWeights&) {
    if (filter.degenerate_policy == DegeneratePolicy::Abort) throw;
    ++degenerate_events_;
    {
      std::lock_guard lock(log_mutex);
      std::clog << "warning: degenerate weights at " << where << " (individual " << individual + 1
                << ", step " << step << "); falling back to uniform weights\n";
    }
    const auto n = log_weights.size();
    return NormalizedWeights{Vector::Constant(n, 1.0 / static_cast<double>(n)), 0.0};
  }
}

// ---- operations -------------------------------------------------------------

std::vector<ParticleCloud> init_particles(const ScaleSystemConfig& config, const FilterConfig& filter) {
  std::vector<ParticleCloud> clouds;
  clouds.reserve(static_cast<std::size_t>(config.num_individuals));
  for (int d = 0; d < config.num_individuals; ++d) clouds.emplace_back(config, d, filter.num_particles);
  return clouds;
}

StepSummary fine_step(ParticleCloud& cloud, int scale, std::int64_t step,
                      const Eigen::Ref<const Vector>& y, const FilterContext& ctx) {
  const auto& cfg = ctx.config;
  const auto ls = static_cast<std::size_t>(scale);
  if (scale < 0 || scale >= cfg.coarse_scale()) throw std::out_of_range("fine_step: not a fine scale");
  const int n = cfg.state_dims[ls];
  if (y.size() != n) throw std::invalid_argument("fine_step: measurement dimension mismatch");
  const int k = cloud.window_fill[ls];
  if (k >= cfg.horizons[ls]) throw std::logic_error("fine_step: window already complete");

  const int d = cloud.individual();
  const int ns = cloud.size();
  const TransitionSpec& spec = cfg.fine_transitions[ls];
  const Matrix& adjacency = cfg.adjacency[ls];
  const Gaussian& process = ctx.process[d][ls];
  const Gaussian& measurement = ctx.measurement[d][ls];
  const double theta = cfg.measurement_rotation[ls];

  Matrix& x = cloud.states[ls];
  Matrix& window = cloud.windows[ls];
  Vector drift(n), predicted(n), coarser, window_mean;
  for (int i = 0; i < ns; ++i) {
    DriftCoupling coupling;
    coarser = cloud.states[ls + 1].col(i);
    coupling.coarser_prev = &coarser;
    if (scale > 0) {
      window_mean_of(cloud, scale - 1, i, cfg, window_mean);
      coupling.window_mean = &window_mean;
    }
    transition_drift(spec, adjacency, x.col(i), coupling, drift);
    RngStream rng(StreamKey{ctx.filter.seed, StreamPurpose::Propagate, static_cast<std::uint64_t>(d),
                            ls, cloud.stream_ids[static_cast<std::size_t>(i)], u64(step)});
    process.add_noise(rng, drift);
    x.col(i) = drift;
    window.col(i).segment(static_cast<Eigen::Index>(k) * n, n) = drift;
    predicted = drift;
    rotate_in_place(theta, predicted);
    cloud.log_weights[i] += measurement.log_density(y - predicted);
  }
  cloud.window_fill[ls] = k + 1;

  const auto nw = ctx.normalize(cloud.log_weights, "fine step", d, step);
  StepSummary summary;
  summary.estimate = x * nw.probs;
  summary.ess = effective_sample_size(nw.probs);

  RngStream rng(StreamKey{ctx.filter.seed, StreamPurpose::Resample, static_cast<std::uint64_t>(d), ls, 0, u64(step)});
  const auto ancestors = systematic_resample(nw.probs, ns, rng);
  if (ctx.observer) ctx.observer->on_resample(scale, d, step, nw.probs, ancestors);
  cloud.resample(ancestors);
  cloud.log_weights.setConstant(-std::log(static_cast<double>(ns)));
  return summary;
}

Vector sample_model_probabilities(const Eigen::Ref<const Eigen::VectorXi>& counts,
                                  const Eigen::Ref<const Vector>& alpha, RngStream& rng) {
  if (counts.size() != alpha.size()) throw std::invalid_argument("sample_model_probabilities: size mismatch");
  if ((counts.array() < 0).any()) throw std::invalid_argument("sample_model_probabilities: negative count");
  return sample_dirichlet(alpha + counts.cast<double>(), rng);
}

IndicatorDraw sample_indicator(const CoarseInputs& inputs, const Eigen::Ref<const Vector>& y,
                               const Eigen::Ref<const Vector>& model_probs, int /*individual*/,
                               const ScaleSystemConfig& config, const Gaussian& process,
                               const Gaussian& measurement, RngStream& rng) {
  check_simplex(model_probs);
  const int models = static_cast<int>(config.coarse_models.size());
  if (model_probs.size() != models) throw std::invalid_argument("sample_indicator: probability length differs from model count");
  const int coarse = config.coarse_scale();
  const auto n = inputs.x_prev.size();
  const double theta = config.measurement_rotation[static_cast<std::size_t>(coarse)];

  IndicatorDraw draw;
  draw.drifts.resize(n, models);
  draw.candidates.resize(n, models);
  draw.log_posterior.resize(models);
  DriftCoupling coupling;
  coupling.window_mean = inputs.window_mean;
  coupling.neighbor_sum = inputs.neighbor_sum;
  Vector drift(n), candidate(n);
  for (int m = 0; m < models; ++m) {
    transition_drift(config.coarse_models[static_cast<std::size_t>(m)],
                     config.adjacency[static_cast<std::size_t>(coarse)], inputs.x_prev, coupling, drift);
    candidate = drift;
    process.add_noise(rng, candidate);
    draw.drifts.col(m) = drift;
    draw.candidates.col(m) = candidate;
    Vector predicted = rotate(theta, candidate);
    draw.log_posterior[m] = std::log(model_probs[m]) + process.log_density(candidate - drift) +
                            measurement.log_density(y - predicted);
  }
  if (models == 1) {
    draw.model = 0;
    draw.probs = Vector::Ones(1);
    return draw;
  }
  draw.probs = normalize_log_weights(draw.log_posterior).probs;
  draw.model = sample_categorical(draw.probs, rng);
  return draw;
}

CoarseStepSummary coarse_step(ParticleCloud& cloud, int t,
                              const Eigen::Ref<const Matrix>& neighbor_estimates,
                              const Eigen::Ref<const Vector>& y, const FilterContext& ctx,
                              std::vector<SnapshotRow>* snapshot) {
  const auto& cfg = ctx.config;
  const int coarse = cfg.coarse_scale();
  const auto lc = static_cast<std::size_t>(coarse);
  const int n = cfg.state_dims[lc];
  const int d = cloud.individual();
  const int ns = cloud.size();
  const int models = cfg.num_models;
  if (y.size() != n) throw std::invalid_argument("coarse_step: measurement dimension mismatch");
  if (cloud.history_length != t - 1) throw std::logic_error("coarse_step: cloud is not at step t-1");

  const Gaussian& process = ctx.process[d][lc];
  const Gaussian& measurement = ctx.measurement[d][lc];
  const double theta = cfg.measurement_rotation[lc];
  const Vector neighbors = neighbor_sum(cfg.interaction, neighbor_estimates, d);
  Matrix& x = cloud.states[lc];

  Vector window_mean, params(models), predicted(n), fresh(n);
  for (int i = 0; i < ns; ++i) {
    const auto sid = cloud.stream_ids[static_cast<std::size_t>(i)];
    const StreamKey base{ctx.filter.seed, StreamPurpose::Dirichlet, static_cast<std::uint64_t>(d), lc, sid,
                         static_cast<std::uint64_t>(t)};

    params = cfg.dirichlet_alpha + cloud.counts.col(i).cast<double>();
    if (ctx.observer) {
      ctx.observer->on_dirichlet(d, t, i, params, std::span<const int>(cloud.history.col(i).data(), static_cast<std::size_t>(t - 1)));
    }
    RngStream dirichlet_rng(base);
    const Vector probs = sample_dirichlet(params, dirichlet_rng);

    if (coarse > 0) window_mean_of(cloud, coarse - 1, i, cfg, window_mean);
    const CoarseInputs inputs{x.col(i), coarse > 0 ? &window_mean : nullptr, &neighbors};

    StreamKey key = base;
    key.purpose = StreamPurpose::Candidate;
    RngStream candidate_rng(key);
    int model = 0;
    try {
      const IndicatorDraw draw = sample_indicator(inputs, y, probs, d, cfg, process, measurement, candidate_rng);
      model = draw.model;
      fresh = draw.drifts.col(model);
    } catch (const DegenerateWeights&) {
      if (ctx.filter.degenerate_policy == DegeneratePolicy::Abort) throw;
      // No model explains the measurement; fall back to the prior draw.
      model = sample_categorical(probs, candidate_rng);
      DriftCoupling coupling{inputs.window_mean, nullptr, inputs.neighbor_sum};
      transition_drift(cfg.coarse_models[static_cast<std::size_t>(model)], cfg.adjacency[lc], inputs.x_prev, coupling, fresh);
    }

    key.purpose = StreamPurpose::Redraw;
    RngStream redraw_rng(key);
    process.add_noise(redraw_rng, fresh);
    x.col(i) = fresh;
    cloud.history(t - 1, i) = model;
    cloud.counts(model, i) += 1;
    predicted = fresh;
    rotate_in_place(theta, predicted);
    cloud.log_weights[i] += measurement.log_density(y - predicted);
  }
  cloud.history_length = t;

  const auto nw = ctx.normalize(cloud.log_weights, "coarse step", d, t);
  CoarseStepSummary summary;
  summary.estimate = x * nw.probs;
  summary.ess = effective_sample_size(nw.probs);
  summary.indicator_freqs = Vector::Zero(models);
  for (int i = 0; i < ns; ++i) summary.indicator_freqs[cloud.history(t - 1, i)] += nw.probs[i];
  summary.indicator_freqs /= summary.indicator_freqs.sum();
  Eigen::Index best = 0;
  for (Eigen::Index m = 1; m < models; ++m)
    if (summary.indicator_freqs[m] > summary.indicator_freqs[best]) best = m;
  summary.indicator_map = static_cast<int>(best);

  if (snapshot) {
    for (int i = 0; i < ns; ++i)
      snapshot->push_back(SnapshotRow{d, t, i, nw.probs[i], cloud.history(t - 1, i), x.col(i)});
  }

  RngStream rng(StreamKey{ctx.filter.seed, StreamPurpose::Resample, static_cast<std::uint64_t>(d), lc, 0, static_cast<std::uint64_t>(t)});
  const auto ancestors = systematic_resample(nw.probs, ns, rng);
  if (ctx.observer) ctx.observer->on_resample(coarse, d, t, nw.probs, ancestors);
  cloud.resample(ancestors);
  cloud.log_weights.setConstant(-std::log(static_cast<double>(ns)));
  return summary;
}

// ---- driver -----------------------------------------------------------------

namespace {

class FilterRun {
 public:
  FilterRun(const ScaleSystemConfig& cfg, const FilterConfig& fcfg, const ScaleSeries& meas,
            FilterObserver* observer)
      : cfg_(cfg), meas_(meas), ctx_(cfg, fcfg, observer), clouds_(init_particles(cfg, fcfg)) {
    const int L = cfg.num_scales;
    const int D = cfg.num_individuals;
    out_.state_estimates.resize(static_cast<std::size_t>(L));
    out_.ess_trace.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      for (int d = 0; d < D; ++d) {
        out_.state_estimates[l].push_back(Matrix::Zero(cfg.total_steps(l), cfg.state_dims[l]));
        out_.ess_trace[l].push_back(Vector::Zero(cfg.total_steps(l)));
      }
    }
    const int horizon = cfg.horizons.back();
    out_.indicator_map.assign(static_cast<std::size_t>(D), std::vector<int>(static_cast<std::size_t>(horizon), 0));
    out_.indicator_freqs.assign(static_cast<std::size_t>(D), Matrix::Zero(horizon, cfg.num_models));
    counters_.assign(static_cast<std::size_t>(D), std::vector<std::int64_t>(static_cast<std::size_t>(L), 0));
    snapshots_.resize(static_cast<std::size_t>(D));
    workers_ = observer ? 1 : worker_count(fcfg.threads);
  }

  FilterOutput run() {
    const int coarse = cfg_.coarse_scale();
    const int D = cfg_.num_individuals;
    Matrix estimates(D, cfg_.state_dims[static_cast<std::size_t>(coarse)]);
    for (int d = 0; d < D; ++d) estimates.row(d).setConstant(cfg_.initial_states[d]);

    for (int t = 1; t <= cfg_.horizons.back(); ++t) {
      const Matrix published = estimates;
      parallel_for(D, workers_, [&](int d) {
        auto& cloud = clouds_[static_cast<std::size_t>(d)];
        if (coarse > 0) advance_window(cloud, coarse - 1);
        const Vector y = meas_[coarse][d].row(t - 1).transpose();
        const auto s = coarse_step(cloud, t, published, y, ctx_,
                                   ctx_.filter.snapshot ? &snapshots_[static_cast<std::size_t>(d)] : nullptr);
        out_.state_estimates[coarse][d].row(t - 1) = s.estimate.transpose();
        out_.ess_trace[coarse][d][t - 1] = s.ess;
        out_.indicator_freqs[d].row(t - 1) = s.indicator_freqs.transpose();
        out_.indicator_map[d][t - 1] = s.indicator_map;
        estimates.row(d) = s.estimate.transpose();
      });
    }
    for (auto& rows : snapshots_)
      out_.snapshots.insert(out_.snapshots.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    out_.degenerate_events = ctx_.degenerate_events();
    return std::move(out_);
  }

 private:
  void advance_window(ParticleCloud& cloud, int scale) {
    const int d = cloud.individual();
    const auto ls = static_cast<std::size_t>(scale);
    cloud.window_fill[ls] = 0;
    for (int k = 0; k < cfg_.horizons[ls]; ++k) {
      if (scale > 0) advance_window(cloud, scale - 1);
      const auto step = counters_[d][ls]++;
      const Vector y = meas_[ls][d].row(step).transpose();
      const auto s = fine_step(cloud, scale, step, y, ctx_);
      out_.state_estimates[ls][d].row(step) = s.estimate.transpose();
      out_.ess_trace[ls][d][step] = s.ess;
    }
  }

  const ScaleSystemConfig& cfg_;
  const ScaleSeries& meas_;
  FilterContext ctx_;
  std::vector<ParticleCloud> clouds_;
  FilterOutput out_;
  std::vector<std::vector<std::int64_t>> counters_;
  std::vector<std::vector<SnapshotRow>> snapshots_;
  int workers_ = 1;
};

void check_measurements(const ScaleSystemConfig& cfg, const ScaleSeries& meas) {
  if (static_cast<int>(meas.size()) != cfg.num_scales) throw std::invalid_argument("measurements: expected one series per scale");
  for (int l = 0; l < cfg.num_scales; ++l) {
    if (static_cast<int>(meas[l].size()) != cfg.num_individuals)
      throw std::invalid_argument("measurements: expected one series per individual");
    for (const auto& m : meas[l])
      if (m.rows() != cfg.total_steps(l) || m.cols() != cfg.state_dims[l])
        throw std::invalid_argument("measurements: scale " + std::to_string(l + 1) + " has the wrong shape");
  }
}

}  // namespace

FilterOutput run_filter(const ScaleSystemConfig& config, const FilterConfig& filter,
                        const ScaleSeries& measurements, FilterObserver* observer) {
  auto problems = validate_config(config);
  const auto fproblems = validate_filter_config(filter);
  problems.insert(problems.end(), fproblems.begin(), fproblems.end());
  if (!problems.empty()) {
    std::string msg = "invalid filter inputs:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
  check_measurements(config, measurements);
  return FilterRun(config, filter, measurements, observer).run();
}

// ---- CSV --------------------------------------------------------------------

void write_filter_output(const std::filesystem::path& dir, const FilterOutput& out,
                         const ScaleSystemConfig& config) {
  std::filesystem::create_directories(dir);
  for (int l = 0; l < config.num_scales; ++l) {
    csv::Table table;
    table.header = {"individual", "t"};
    for (int n = 0; n < config.state_dims[l]; ++n) table.header.push_back("dim_" + std::to_string(n));
    for (int d = 0; d < config.num_individuals; ++d) {
      const Matrix& m = out.state_estimates[l][d];
      for (Eigen::Index t = 0; t < m.rows(); ++t) {
        std::vector<double> row{static_cast<double>(d + 1), static_cast<double>(t + 1)};
        for (Eigen::Index n = 0; n < m.cols(); ++n) row.push_back(m(t, n));
        table.rows.push_back(std::move(row));
      }
    }
    csv::write(dir / ("estimates_scale" + std::to_string(l + 1) + ".csv"), table);
  }

  csv::Table indicators;
  indicators.header = {"individual", "t", "map_model"};
  for (int m = 0; m < config.num_models; ++m) indicators.header.push_back("freq_" + std::to_string(m));
  for (int d = 0; d < config.num_individuals; ++d) {
    for (std::size_t t = 0; t < out.indicator_map[d].size(); ++t) {
      std::vector<double> row{static_cast<double>(d + 1), static_cast<double>(t + 1),
                              static_cast<double>(out.indicator_map[d][t])};
      for (int m = 0; m < config.num_models; ++m) row.push_back(out.indicator_freqs[d](static_cast<Eigen::Index>(t), m));
      indicators.rows.push_back(std::move(row));
    }
  }
  csv::write(dir / "indicators_est.csv", indicators);

  csv::Table ess;
  ess.header = {"scale", "individual", "t", "ess"};
  for (int l = 0; l < config.num_scales; ++l)
    for (int d = 0; d < config.num_individuals; ++d)
      for (Eigen::Index t = 0; t < out.ess_trace[l][d].size(); ++t)
        ess.rows.push_back({static_cast<double>(l + 1), static_cast<double>(d + 1), static_cast<double>(t + 1),
                            out.ess_trace[l][d][t]});
  csv::write(dir / "ess.csv", ess);

  if (!out.snapshots.empty()) {
    csv::Table snap;
    snap.header = {"individual", "t", "particle", "weight", "model"};
    for (int n = 0; n < config.state_dims.back(); ++n) snap.header.push_back("dim_" + std::to_string(n));
    for (const auto& s : out.snapshots) {
      std::vector<double> row{static_cast<double>(s.individual + 1), static_cast<double>(s.t),
                              static_cast<double>(s.slot), s.weight, static_cast<double>(s.model)};
      for (Eigen::Index n = 0; n < s.state.size(); ++n) row.push_back(s.state[n]);
      snap.rows.push_back(std::move(row));
    }
    csv::write(dir / "snapshots.csv", snap);
  }
}

FilterOutput read_filter_output(const std::filesystem::path& dir, const ScaleSystemConfig& config) {
  FilterOutput out;
  out.state_estimates = read_scale_series(dir, "estimates", config);
  const int horizon = config.horizons.back();
  const int D = config.num_individuals;
  out.indicator_map.assign(static_cast<std::size_t>(D), std::vector<int>(static_cast<std::size_t>(horizon), 0));
  out.indicator_freqs.assign(static_cast<std::size_t>(D), Matrix::Zero(horizon, config.num_models));
  const auto table = csv::read(dir / "indicators_est.csv");
  if (static_cast<int>(table.header.size()) != 3 + config.num_models)
    throw std::runtime_error("indicators_est.csv: expected one frequency column per model");
  for (const auto& row : table.rows) {
    const int d = static_cast<int>(row[0]) - 1;
    const int t = static_cast<int>(row[1]) - 1;
    if (d < 0 || d >= D || t < 0 || t >= horizon) throw std::runtime_error("indicators_est.csv: key out of range");
    out.indicator_map[d][t] = static_cast<int>(row[2]);
    for (int m = 0; m < config.num_models; ++m) out.indicator_freqs[d](t, m) = row[static_cast<std::size_t>(3 + m)];
  }
  return out;
}

}  // namespace mspf
