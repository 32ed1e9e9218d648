#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mspf/config.hpp"
#include "mspf/simulator.hpp"

namespace testing {

using mspf::Matrix;
using mspf::Vector;

inline mspf::ScaleSystemConfig sim1_config() { return mspf::config_from_json(mspf::sim1_document()); }

// Single scale, single model, drift = gain * A x.  Everything Gaussian, so an
// exact Kalman filter is the reference posterior.
inline mspf::ScaleSystemConfig linear_config(int dim, int horizon, double gain, double q, double r,
                                             std::uint64_t seed = 11) {
  mspf::ScaleSystemConfig c;
  c.num_scales = 1;
  c.num_individuals = 1;
  c.state_dims = {dim};
  c.horizons = {horizon};
  c.num_models = 1;
  c.process_noise = {{q * Matrix::Identity(dim, dim)}};
  c.measurement_noise = {{r * Matrix::Identity(dim, dim)}};
  Matrix a = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a(i, i) = 1.0;
    if (i + 1 < dim) a(i, i + 1) = 0.5;
  }
  c.adjacency = {a};
  c.interaction = Matrix::Identity(1, 1);
  c.measurement_rotation = {0.0};
  c.dirichlet_alpha = Vector::Ones(1);
  c.initial_states = {0.5};
  c.seed = seed;
  mspf::TransitionSpec f;
  f.family = mspf::TransitionFamily::Linear;
  f.adjacency_gain = gain;
  f.window_gain = 0.0;
  c.coarse_models = {f};
  return c;
}

struct KalmanTrack {
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
};

// Textbook predict/update written against plain matrices, independent of the
// library's Gaussian class.
inline KalmanTrack kalman(const Matrix& F, const Matrix& Q, const Matrix& R, const Vector& x0,
                          const Matrix& y) {
  KalmanTrack out;
  Vector m = x0;
  Matrix P = Matrix::Zero(x0.size(), x0.size());
  const Matrix I = Matrix::Identity(x0.size(), x0.size());
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    m = F * m;
    P = F * P * F.transpose() + Q;
    const Matrix S = P + R;
    const Matrix K = P * S.inverse();
    m = m + K * (y.row(t).transpose() - m);
    P = (I - K) * P;
    P = 0.5 * (P + P.transpose());
    out.mean.push_back(m);
    out.cov.push_back(P);
  }
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mspf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every regular file under a and b has the same relative path and bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(std::filesystem::relative(e.path(), a));
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(std::filesystem::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) return false;
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return false;
  return true;
}

inline Matrix random_spd(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = z(gen);
  return m * m.transpose() + 0.5 * Matrix::Identity(n, n);
}

}  // namespace testing
