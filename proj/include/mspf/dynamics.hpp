#pragma once

#include <optional>
#include <span>

#include "mspf/config.hpp"
#include "mspf/math.hpp"
#include "mspf/rng.hpp"

namespace mspf {

/// Optional coupling terms of a drift evaluation.  Null pointers mean the
/// term is absent (contributes zero).
struct DriftCoupling {
  const Vector* window_mean = nullptr;   // weighted mean of the finer scale's last window
  const Vector* coarser_prev = nullptr;  // previous state of the next coarser scale
  const Vector* neighbor_sum = nullptr;  // sum_{d' != d} B(d, d') x_{d'}
};

/// out = drift of `spec` at x_prev with adjacency `adjacency`.
void transition_drift(const TransitionSpec& spec, const Matrix& adjacency,
                      const Eigen::Ref<const Vector>& x_prev, const DriftCoupling& coupling,
                      Eigen::Ref<Vector> out);

/// sum_{d' != d} B(d, d') * others.row(d'); the diagonal never contributes.
Vector neighbor_sum(const Matrix& interaction, const Eigen::Ref<const Matrix>& others_prev,
                    int individual);

/// Noiseless coarse-scale drift under model `model`.  `fine_window` is the
/// most recent completed window of the next finer scale ([T, N] rows = time);
/// pass an empty matrix when the config has a single scale.
Vector coarse_transition(int model, const Eigen::Ref<const Vector>& x_prev,
                         const Eigen::Ref<const Matrix>& fine_window,
                         const Eigen::Ref<const Matrix>& others_prev, int individual,
                         const ScaleSystemConfig& config);

/// Noiseless drift at fine scale `scale` (< L-1), conditioned on the previous
/// state of the next coarser scale.  `finer_window` is only used when the
/// scale itself has a finer scale below it.
Vector fine_transition(const Eigen::Ref<const Vector>& x_prev,
                       const Eigen::Ref<const Vector>& coarse_prev, const ScaleSystemConfig& config,
                       int scale = 0, const Matrix* finer_window = nullptr);

/// Givens rotation by `theta` in dimensions (0, 1), identity elsewhere.
void rotate_in_place(double theta, Eigen::Ref<Vector> x);
Vector rotate(double theta, const Eigen::Ref<const Vector>& x);

/// y = G(theta_l) x + v, v ~ N(0, Sigma_v[individual][scale]).
Vector measure(const Eigen::Ref<const Vector>& x, int scale, int individual,
               const ScaleSystemConfig& config, RngStream& rng);

}  // namespace mspf
