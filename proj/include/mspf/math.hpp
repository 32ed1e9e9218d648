#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mspf/rng.hpp"

namespace mspf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a covariance is neither positive definite nor exactly zero.
class NotPositiveDefinite : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when every log-weight is -inf (or NaN) and no particle survives.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-mean Gaussian with a cached Cholesky factor.
///
/// An exactly-zero covariance is accepted as a point mass: sampling returns
/// zero and the log-density is 0 at the origin and -inf elsewhere.  Any other
/// covariance must factor without jitter.
class Gaussian {
 public:
  Gaussian() = default;
  explicit Gaussian(const Matrix& cov, const std::string& name = "covariance");

  int dim() const noexcept { return static_cast<int>(chol_.rows()); }
  bool is_point_mass() const noexcept { return point_mass_; }
  const Matrix& cholesky() const noexcept { return chol_; }

  /// log N(residual | 0, cov).
  double log_density(const Eigen::Ref<const Vector>& residual) const;

  /// out += L z with z standard normal drawn from rng.
  void add_noise(RngStream& rng, Eigen::Ref<Vector> out) const;

 private:
  Matrix chol_;
  double log_norm_ = 0.0;
  bool point_mass_ = false;
};

double gaussian_logpdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                       const Matrix& cov);

Vector sample_gaussian(const Eigen::Ref<const Vector>& mean, const Matrix& cov, RngStream& rng);

Vector sample_dirichlet(const Eigen::Ref<const Vector>& alpha, RngStream& rng);

int sample_categorical(const Eigen::Ref<const Vector>& probs, RngStream& rng);

struct NormalizedWeights {
  Vector probs;
  double log_normalizer = 0.0;
};

/// Max-shifted softmax of log-weights.  Throws DegenerateWeights when no
/// entry is finite.
NormalizedWeights normalize_log_weights(const Eigen::Ref<const Vector>& log_weights);

/// Systematic (single-offset) resampling.  Index i appears either
/// floor(count * w_i) or ceil(count * w_i) times.
std::vector<int> systematic_resample(const Eigen::Ref<const Vector>& weights, int count,
                                     RngStream& rng);

/// Column-wise weighted mean of the rows of `trajectory` (rows are time).
Vector weighted_time_average(const Eigen::Ref<const Matrix>& trajectory,
                             const Eigen::Ref<const Vector>& weights);

/// 1 / sum(w^2) for a normalized weight vector.
double effective_sample_size(const Eigen::Ref<const Vector>& weights);

/// Throws std::invalid_argument unless probs is a simplex within `tol`.
void check_simplex(const Eigen::Ref<const Vector>& probs, double tol = 1e-9);

}  // namespace mspf
