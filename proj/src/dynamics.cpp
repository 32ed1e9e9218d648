#include "mspf/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace mspf {

void transition_drift(const TransitionSpec& spec, const Matrix& adjacency,
                      const Eigen::Ref<const Vector>& x_prev, const DriftCoupling& coupling,
                      Eigen::Ref<Vector> out) {
  const auto n = x_prev.size();
  switch (spec.family) {
    case TransitionFamily::Sine:
      for (Eigen::Index k = 0; k < n; ++k) out[k] = spec.amplitude * std::sin(x_prev[k] + spec.phase);
      break;
    case TransitionFamily::CosExpDecay:
      for (Eigen::Index k = 0; k < n; ++k)
        out[k] = spec.amplitude * std::cos(spec.frequency * x_prev[k]) * std::exp(-spec.decay * x_prev[k]);
      break;
    case TransitionFamily::CosAdjacency:
      for (Eigen::Index k = 0; k < n; ++k) {
        double ax = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) ax += adjacency(k, j) * x_prev[j];
        out[k] = spec.amplitude * std::cos(spec.offset + ax);
      }
      break;
    case TransitionFamily::Linear:
      out.setZero();
      break;
  }
  if (spec.adjacency_gain != 0.0) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double ax = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) ax += adjacency(k, j) * x_prev[j];
      out[k] += spec.adjacency_gain * ax;
    }
  }
  if (coupling.window_mean && spec.window_gain != 0.0) out += spec.window_gain * *coupling.window_mean;
  if (coupling.coarser_prev && spec.coarse_gain != 0.0) out += spec.coarse_gain * *coupling.coarser_prev;
  if (coupling.neighbor_sum && spec.neighbor_gain != 0.0) out += spec.neighbor_gain * *coupling.neighbor_sum;
}

Vector neighbor_sum(const Matrix& interaction, const Eigen::Ref<const Matrix>& others_prev,
                    int individual) {
  Vector sum = Vector::Zero(others_prev.cols());
  for (Eigen::Index other = 0; other < others_prev.rows(); ++other) {
    if (other == individual) continue;
    const double b = interaction(individual, other);
    if (b != 0.0) sum += b * others_prev.row(other).transpose();
  }
  return sum;
}

Vector coarse_transition(int model, const Eigen::Ref<const Vector>& x_prev,
                         const Eigen::Ref<const Matrix>& fine_window,
                         const Eigen::Ref<const Matrix>& others_prev, int individual,
                         const ScaleSystemConfig& config) {
  if (model < 0 || model >= static_cast<int>(config.coarse_models.size())) {
    throw std::out_of_range("coarse_transition: unknown model index " + std::to_string(model));
  }
  const int coarse = config.coarse_scale();
  if (x_prev.size() != config.state_dims[static_cast<std::size_t>(coarse)] ||
      others_prev.rows() != config.num_individuals || others_prev.cols() != x_prev.size()) {
    throw std::invalid_argument("coarse_transition: shape mismatch");
  }
  DriftCoupling coupling;
  Vector window_mean;
  if (coarse > 0) {
    window_mean = weighted_time_average(fine_window, config.fine_summary_weights[static_cast<std::size_t>(coarse - 1)]);
    coupling.window_mean = &window_mean;
  }
  const Vector neighbors = neighbor_sum(config.interaction, others_prev, individual);
  coupling.neighbor_sum = &neighbors;
  Vector out(x_prev.size());
  transition_drift(config.coarse_models[static_cast<std::size_t>(model)],
                   config.adjacency[static_cast<std::size_t>(coarse)], x_prev, coupling, out);
  return out;
}

Vector fine_transition(const Eigen::Ref<const Vector>& x_prev,
                       const Eigen::Ref<const Vector>& coarse_prev, const ScaleSystemConfig& config,
                       int scale, const Matrix* finer_window) {
  if (scale < 0 || scale >= config.coarse_scale()) {
    throw std::out_of_range("fine_transition: scale is not a fine scale");
  }
  if (x_prev.size() != config.state_dims[static_cast<std::size_t>(scale)]) {
    throw std::invalid_argument("fine_transition: shape mismatch");
  }
  DriftCoupling coupling;
  const Vector coarser = coarse_prev;
  coupling.coarser_prev = &coarser;
  Vector window_mean;
  if (scale > 0 && finer_window) {
    window_mean = weighted_time_average(*finer_window, config.fine_summary_weights[static_cast<std::size_t>(scale - 1)]);
    coupling.window_mean = &window_mean;
  }
  Vector out(x_prev.size());
  transition_drift(config.fine_transitions[static_cast<std::size_t>(scale)],
                   config.adjacency[static_cast<std::size_t>(scale)], x_prev, coupling, out);
  return out;
}

void rotate_in_place(double theta, Eigen::Ref<Vector> x) {
  if (theta == 0.0 || x.size() < 2) return;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double a = x[0];
  const double b = x[1];
  x[0] = c * a - s * b;
  x[1] = s * a + c * b;
}

Vector rotate(double theta, const Eigen::Ref<const Vector>& x) {
  Vector out = x;
  rotate_in_place(theta, out);
  return out;
}

Vector measure(const Eigen::Ref<const Vector>& x, int scale, int individual,
               const ScaleSystemConfig& config, RngStream& rng) {
  Vector y = rotate(config.measurement_rotation.at(static_cast<std::size_t>(scale)), x);
  Gaussian(config.measurement_noise.at(static_cast<std::size_t>(individual)).at(static_cast<std::size_t>(scale)),
           "measurement_noise")
      .add_noise(rng, y);
  return y;
}

}  // namespace mspf
