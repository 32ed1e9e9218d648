#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mspf/config.hpp"
#include "mspf/math.hpp"
#include "mspf/simulator.hpp"

namespace mspf {

enum class DegeneratePolicy { Abort, UniformFallback };

struct FilterConfig {
  int num_particles = 1000;
  std::uint64_t seed = 0;
  bool snapshot = false;
  DegeneratePolicy degenerate_policy = DegeneratePolicy::UniformFallback;
  /// Worker cap for the per-individual loop; 0 reads MSPF_THREADS / hardware.
  int threads = 0;
};

std::vector<std::string> validate_filter_config(const FilterConfig& config);

/// Reads the optional "filter" block of a config document.
FilterConfig filter_config_from_json(const Json& doc, std::uint64_t seed);

/// One SMC hypothesis, materialized from a cloud for inspection.
struct Particle {
  std::vector<Vector> states;            // [scale]
  std::vector<Matrix> fine_trajectory;   // [scale < L-1], filled rows of the current window
  std::vector<int> indicator_history;
  std::vector<int> model_counts;
  double log_weight = 0.0;
};

/// Structure-of-arrays particle storage for one individual.  Column i of
/// every member belongs to particle slot i.
class ParticleCloud {
 public:
  ParticleCloud(const ScaleSystemConfig& config, int individual, int num_particles);

  int size() const noexcept { return static_cast<int>(log_weights.size()); }
  int individual() const noexcept { return individual_; }
  Particle particle(int slot) const;

  /// Replace every per-particle record by its ancestor's.
  void resample(std::span<const int> ancestors);

  std::vector<Matrix> states;        // [scale] N_l x Ns
  std::vector<Matrix> windows;       // [scale < L-1] (T_l * N_l) x Ns, step k at rows [k N_l, (k+1) N_l)
  std::vector<int> window_fill;      // [scale < L-1]
  Eigen::MatrixXi history;           // T_L x Ns
  int history_length = 0;
  Eigen::MatrixXi counts;            // M x Ns
  Vector log_weights;                // Ns
  std::vector<std::uint64_t> stream_ids;  // RNG stream id of each slot (not resampled)

 private:
  int individual_ = 0;
  std::vector<int> dims_;
  std::vector<int> window_lengths_;
};

/// Hooks for instrumented runs.  Called from the filtering thread(s); runs
/// with an observer are processed on a single thread.
class FilterObserver {
 public:
  virtual ~FilterObserver() = default;
  /// Dirichlet parameters used for one particle's model-probability draw,
  /// with that particle's indicator history up to t-1.
  virtual void on_dirichlet(int /*individual*/, int /*t*/, int /*slot*/, const Vector& /*params*/,
                            std::span<const int> /*history*/) {}
  virtual void on_resample(int /*scale*/, int /*individual*/, std::int64_t /*step*/,
                           const Vector& /*weights*/, std::span<const int> /*ancestors*/) {}
};

/// Precomputed noise factorizations and run settings shared by the steps.
class FilterContext {
 public:
  FilterContext(const ScaleSystemConfig& config, const FilterConfig& filter,
                FilterObserver* observer = nullptr);

  const ScaleSystemConfig& config;
  const FilterConfig& filter;
  FilterObserver* observer;
  std::vector<std::vector<Gaussian>> process;      // [d][l]
  std::vector<std::vector<Gaussian>> measurement;  // [d][l]

  /// Number of uniform fallbacks taken so far (all threads).
  std::int64_t degenerate_events() const noexcept;
  NormalizedWeights normalize(const Vector& log_weights, const char* where, int individual,
                              std::int64_t step) const;

 private:
  mutable std::atomic<std::int64_t> degenerate_events_{0};
};

struct StepSummary {
  Vector estimate;  // weighted mean before resampling
  double ess = 0.0;
};

struct CoarseStepSummary {
  Vector estimate;
  double ess = 0.0;
  Vector indicator_freqs;  // weight mass per model
  int indicator_map = 0;   // argmax, ties -> lowest index
};

struct IndicatorDraw {
  int model = 0;
  Matrix drifts;         // N x M noiseless drifts per model
  Matrix candidates;     // N x M candidate states
  Vector log_posterior;  // unnormalized, per model
  Vector probs;          // normalized posterior over models
};

/// Per-particle inputs to the coarse transition (mean-field neighbour sum
/// is shared by all particles of an individual).
struct CoarseInputs {
  Eigen::Ref<const Vector> x_prev;
  const Vector* window_mean = nullptr;
  const Vector* neighbor_sum = nullptr;
};

std::vector<ParticleCloud> init_particles(const ScaleSystemConfig& config, const FilterConfig& filter);

/// Propagate one step of fine scale `scale`, weight by y, estimate, then
/// systematic-resample every particle record.
StepSummary fine_step(ParticleCloud& cloud, int scale, std::int64_t step,
                      const Eigen::Ref<const Vector>& y, const FilterContext& ctx);

/// One draw of model probabilities from Dir(alpha + counts).
Vector sample_model_probabilities(const Eigen::Ref<const Eigen::VectorXi>& counts,
                                  const Eigen::Ref<const Vector>& alpha, RngStream& rng);

/// Selects a model for one particle: candidates per model, scored by
/// log pi_m + log N(x*_m | drift_m, Sigma_w) + log N(y - G x*_m | 0, Sigma_v).
IndicatorDraw sample_indicator(const CoarseInputs& inputs, const Eigen::Ref<const Vector>& y,
                               const Eigen::Ref<const Vector>& model_probs, int individual,
                               const ScaleSystemConfig& config, const Gaussian& process,
                               const Gaussian& measurement, RngStream& rng);

/// Coarse update of one individual's cloud at coarse step t (1-based).
/// `neighbor_estimates` holds every individual's previous coarse estimate.
struct SnapshotRow {
  int individual = 0;
  int t = 0;
  int slot = 0;
  double weight = 0.0;
  int model = 0;
  Vector state;
};

/// Coarse update of one individual's cloud at coarse step t (1-based).
/// `neighbor_estimates` holds every individual's previous coarse estimate.
/// When `snapshot` is non-null the pre-resampling cloud is appended to it.
CoarseStepSummary coarse_step(ParticleCloud& cloud, int t,
                              const Eigen::Ref<const Matrix>& neighbor_estimates,
                              const Eigen::Ref<const Vector>& y, const FilterContext& ctx,
                              std::vector<SnapshotRow>* snapshot = nullptr);

struct FilterOutput {
  ScaleSeries state_estimates;             // [scale][individual] [steps_l, N_l]
  std::vector<std::vector<int>> indicator_map;   // [individual][T_L]
  std::vector<Matrix> indicator_freqs;     // [individual] [T_L, M]
  std::vector<std::vector<Vector>> ess_trace;    // [scale][individual] length steps_l
  std::vector<SnapshotRow> snapshots;      // coarse-step clouds, when enabled
  std::int64_t degenerate_events = 0;
};

/// Full multiscale filter over a measurement set ([scale][individual]).
FilterOutput run_filter(const ScaleSystemConfig& config, const FilterConfig& filter,
                        const ScaleSeries& measurements, FilterObserver* observer = nullptr);

/// estimates_scale<l>.csv, indicators_est.csv, ess.csv (+ snapshots.csv).
void write_filter_output(const std::filesystem::path& dir, const FilterOutput& out,
                         const ScaleSystemConfig& config);
FilterOutput read_filter_output(const std::filesystem::path& dir, const ScaleSystemConfig& config);

}  // namespace mspf
