#include "mspf/math.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mspf {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

Gaussian::Gaussian(const Matrix& cov, const std::string& name) {
  if (cov.rows() != cov.cols()) {
    throw NotPositiveDefinite(name + ": covariance is not square");
  }
  if (cov.size() > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NotPositiveDefinite(name + ": covariance is not symmetric");
  }
  const auto n = cov.rows();
  if (cov.isZero(0.0)) {
    point_mass_ = true;
    chol_ = Matrix::Zero(n, n);
    return;
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(name + ": covariance is not positive definite");
  }
  chol_ = llt.matrixL();
  if ((chol_.diagonal().array() <= 0.0).any()) {
    throw NotPositiveDefinite(name + ": covariance is not positive definite");
  }
  log_norm_ = -0.5 * static_cast<double>(n) * kLog2Pi - chol_.diagonal().array().log().sum();
}

double Gaussian::log_density(const Eigen::Ref<const Vector>& residual) const {
  if (point_mass_) {
    return residual.isZero(0.0) ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const auto n = chol_.rows();
  // Forward substitution against the lower factor.
  double quad = 0.0;
  double z[16];
  double* zp = n <= 16 ? z : nullptr;
  std::vector<double> heap;
  if (!zp) {
    heap.resize(static_cast<std::size_t>(n));
    zp = heap.data();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = residual[i];
    for (Eigen::Index j = 0; j < i; ++j) s -= chol_(i, j) * zp[j];
    zp[i] = s / chol_(i, i);
    quad += zp[i] * zp[i];
  }
  return log_norm_ - 0.5 * quad;
}

void Gaussian::add_noise(RngStream& rng, Eigen::Ref<Vector> out) const {
  if (point_mass_) return;
  const auto n = chol_.rows();
  double z[16];
  std::vector<double> heap;
  double* zp = z;
  if (n > 16) {
    heap.resize(static_cast<std::size_t>(n));
    zp = heap.data();
  }
  for (Eigen::Index i = 0; i < n; ++i) zp[i] = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) s += chol_(i, j) * zp[j];
    out[i] += s;
  }
}

double gaussian_logpdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                       const Matrix& cov) {
  if (x.size() != mean.size() || x.size() != cov.rows()) {
    throw std::invalid_argument("gaussian_logpdf: dimension mismatch");
  }
  return Gaussian(cov).log_density(x - mean);
}

Vector sample_gaussian(const Eigen::Ref<const Vector>& mean, const Matrix& cov, RngStream& rng) {
  if (mean.size() != cov.rows()) {
    throw std::invalid_argument("sample_gaussian: dimension mismatch");
  }
  Vector out = mean;
  Gaussian(cov).add_noise(rng, out);
  return out;
}

Vector sample_dirichlet(const Eigen::Ref<const Vector>& alpha, RngStream& rng) {
  if (alpha.size() == 0) throw std::invalid_argument("sample_dirichlet: empty alpha");
  for (Eigen::Index m = 0; m < alpha.size(); ++m) {
    if (!(alpha[m] > 0.0) || !std::isfinite(alpha[m])) {
      throw std::invalid_argument("sample_dirichlet: alpha entries must be positive and finite");
    }
  }
  Vector draw(alpha.size());
  for (Eigen::Index m = 0; m < alpha.size(); ++m) draw[m] = rng.gamma(alpha[m]);
  const double total = draw.sum();
  if (!(total > 0.0)) {
    // Every gamma variate underflowed (tiny alphas); fall back to the
    // largest-alpha vertex.
    draw.setZero();
    Eigen::Index best = 0;
    alpha.maxCoeff(&best);
    draw[best] = 1.0;
    return draw;
  }
  return draw / total;
}

void check_simplex(const Eigen::Ref<const Vector>& probs, double tol) {
  if (probs.size() == 0) throw std::invalid_argument("probability vector is empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw std::invalid_argument("probability vector has a negative entry");
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("probability vector does not sum to 1");
  }
}

int sample_categorical(const Eigen::Ref<const Vector>& probs, RngStream& rng) {
  check_simplex(probs);
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (Eigen::Index m = 0; m < probs.size(); ++m) {
    if (probs[m] > 0.0) last_positive = static_cast<int>(m);
    cumulative += probs[m];
    if (u < cumulative && probs[m] > 0.0) return static_cast<int>(m);
  }
  return last_positive;
}

NormalizedWeights normalize_log_weights(const Eigen::Ref<const Vector>& log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    const double lw = log_weights[i];
    if (!std::isnan(lw) && lw > max_lw) max_lw = lw;
  }
  if (!std::isfinite(max_lw)) {
    throw DegenerateWeights("all log-weights are -inf or NaN");
  }
  NormalizedWeights out;
  out.probs.resize(log_weights.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    const double lw = log_weights[i];
    const double w = std::isnan(lw) ? 0.0 : std::exp(lw - max_lw);
    out.probs[i] = w;
    sum += w;
  }
  out.probs /= sum;
  out.log_normalizer = max_lw + std::log(sum);
  return out;
}

std::vector<int> systematic_resample(const Eigen::Ref<const Vector>& weights, int count,
                                     RngStream& rng) {
  if (count < 1) throw std::invalid_argument("systematic_resample: count must be >= 1");
  check_simplex(weights);
  std::vector<int> ancestors(static_cast<std::size_t>(count));
  const double step = 1.0 / count;
  const double offset = rng.uniform() * step;
  const auto n = weights.size();
  Eigen::Index source = 0;
  double cumulative = weights[0];
  for (int k = 0; k < count; ++k) {
    const double threshold = offset + k * step;
    while (threshold >= cumulative && source + 1 < n) {
      ++source;
      cumulative += weights[source];
    }
    // Never hand out a zero-weight index when cumulative rounding pushes
    // the pointer past the last positive entry.
    Eigen::Index pick = source;
    while (weights[pick] == 0.0 && pick > 0) --pick;
    ancestors[static_cast<std::size_t>(k)] = static_cast<int>(pick);
  }
  return ancestors;
}

Vector weighted_time_average(const Eigen::Ref<const Matrix>& trajectory,
                             const Eigen::Ref<const Vector>& weights) {
  if (trajectory.rows() != weights.size()) {
    throw std::invalid_argument("weighted_time_average: weight length differs from trajectory");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("weighted_time_average: weights must have a positive sum");
  }
  return (trajectory.transpose() * weights) / total;
}

double effective_sample_size(const Eigen::Ref<const Vector>& weights) {
  return 1.0 / weights.squaredNorm();
}

}  // namespace mspf
