#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "mspf/dynamics.hpp"
#include "support.hpp"

using namespace mspf;

namespace {

// Sim-1 structure with the adjacency and interaction terms switched off.
ScaleSystemConfig bare_sim1() {
  auto c = testing::sim1_config();
  for (auto& a : c.adjacency) a.setZero();
  c.interaction = Matrix::Identity(6, 6);
  return c;
}

}  // namespace

TEST_CASE("coarse transition closed forms") {
  auto c = bare_sim1();
  const Vector zero = Vector::Zero(3);
  const Matrix window = Matrix::Zero(50, 3);
  const Matrix others = Matrix::Zero(6, 3);

  SUBCASE("oscillating model at the origin") {
    const Vector x = coarse_transition(0, zero, window, others, 0, c);
    for (int n = 0; n < 3; ++n) CHECK(x[n] == doctest::Approx(3.0 * std::sin(std::numbers::pi / 4)).epsilon(1e-15));
    CHECK(x[0] == doctest::Approx(2.1213203).epsilon(1e-7));
  }
  SUBCASE("damped model at the origin") {
    const Vector x = coarse_transition(1, zero, window, others, 0, c);
    for (int n = 0; n < 3; ++n) CHECK(x[n] == 2.0);
  }
  SUBCASE("one off diagonal interaction") {
    c.interaction(1, 4) = 1.0;
    Matrix nb = others;
    nb.row(4).setOnes();
    const Vector base = coarse_transition(0, zero, window, others, 1, c);
    const Vector x = coarse_transition(0, zero, window, nb, 1, c);
    for (int n = 0; n < 3; ++n) CHECK(x[n] - base[n] == doctest::Approx(0.5).epsilon(1e-15));
    // the diagonal never feeds back into the individual itself
    Matrix self = others;
    self.row(1).setConstant(10.0);
    CHECK(coarse_transition(0, zero, window, self, 1, c) == base);
  }
  SUBCASE("window mean enters additively") {
    Matrix w = window;
    for (int k = 0; k < 50; ++k) w.row(k).setConstant(k % 2 ? 1.0 : 0.0);
    const Vector x = coarse_transition(1, zero, w, others, 0, c);
    for (int n = 0; n < 3; ++n) CHECK(x[n] == doctest::Approx(2.5).epsilon(1e-15));
  }
  SUBCASE("unknown model index") {
    CHECK_THROWS(coarse_transition(2, zero, window, others, 0, c));
  }
}

TEST_CASE("coarse transition loop oracle") {
  const auto c = testing::sim1_config();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix window(50, 3), others(6, 3);
  Vector x(3);
  for (int k = 0; k < 50; ++k)
    for (int n = 0; n < 3; ++n) window(k, n) = u(gen);
  for (int d = 0; d < 6; ++d)
    for (int n = 0; n < 3; ++n) others(d, n) = u(gen);
  for (int n = 0; n < 3; ++n) x[n] = u(gen);

  const Matrix& A = c.adjacency[1];
  const Matrix& B = c.interaction;
  for (int d = 0; d < 6; ++d) {
    for (int m = 0; m < 2; ++m) {
      const Vector got = coarse_transition(m, x, window, others, d, c);
      for (int n = 0; n < 3; ++n) {
        double ax = 0.0, wavg = 0.0, nb = 0.0;
        for (int j = 0; j < 3; ++j) ax += A(n, j) * x[j];
        for (int k = 0; k < 50; ++k) wavg += window(k, n) / 50.0;
        for (int e = 0; e < 6; ++e)
          if (e != d) nb += B(d, e) * others(e, n);
        const double expected =
            m == 0 ? 3.0 * std::sin(x[n] + std::numbers::pi / 4) + wavg + 0.5 * nb + 0.3 * ax
                   : 2.0 * std::cos(1.2 * x[n]) * std::exp(-0.05 * x[n]) + wavg + 1.0 * nb + 0.5 * ax;
        CHECK(std::abs(got[n] - expected) < 1e-12);
      }
    }
  }
}

TEST_CASE("fine transition") {
  auto c = bare_sim1();
  const Vector zero = Vector::Zero(3);
  SUBCASE("origin") {
    const Vector x = fine_transition(zero, zero, c);
    for (int n = 0; n < 3; ++n) CHECK(x[n] == doctest::Approx(0.5403023).epsilon(1e-7));
  }
  SUBCASE("coarse term") {
    const Vector x = fine_transition(zero, (Vector(3) << 1.0, 2.0, 3.0).finished(), c);
    CHECK(x[0] == doctest::Approx(std::cos(1.0) + 0.6).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(std::cos(1.0) + 1.2).epsilon(1e-15));
    CHECK(x[2] == doctest::Approx(std::cos(1.0) + 1.8).epsilon(1e-15));
  }
  SUBCASE("loop oracle with a random binary adjacency") {
    const auto full = testing::sim1_config();
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vector x(3), coarse(3);
      for (int n = 0; n < 3; ++n) {
        x[n] = u(gen);
        coarse[n] = u(gen);
      }
      const Vector got = fine_transition(x, coarse, full);
      const Matrix& A = full.adjacency[0];
      for (int n = 0; n < 3; ++n) {
        double ax = 0.0;
        for (int j = 0; j < 3; ++j) ax += A(n, j) * x[j];
        CHECK(std::abs(got[n] - (std::cos(1.0 + ax) + 0.6 * coarse[n])) < 1e-12);
      }
    }
  }
}

TEST_CASE("measurement") {
  auto c = testing::sim1_config();
  for (auto& per : c.measurement_noise)
    for (auto& m : per) m.setZero();
  RngStream rng(StreamKey{1, StreamPurpose::Test, 0, 0, 0, 0});
  const Vector x = (Vector(3) << 1.0, 0.0, 5.0).finished();

  SUBCASE("identity without noise") { CHECK(measure(x, 1, 0, c, rng) == x); }
  SUBCASE("quarter turn") {
    c.measurement_rotation[1] = std::numbers::pi / 2;
    const Vector y = measure(x, 1, 0, c, rng);
    CHECK(std::abs(y[0]) < 1e-15);
    CHECK(y[1] == doctest::Approx(1.0));
    CHECK(y[2] == 5.0);
  }
  SUBCASE("noise covariance") {
    auto noisy = testing::sim1_config();
    const int n = 100000;
    Matrix outer = Matrix::Zero(3, 3);
    for (int i = 0; i < n; ++i) {
      const Vector r = measure(x, 0, 0, noisy, rng) - x;
      outer += r * r.transpose();
    }
    const Matrix target = 0.03 * Matrix::Identity(3, 3);
    CHECK((outer / n - target).norm() < 0.05 * target.norm());
  }
}

TEST_CASE("rotation helpers") {
  const Vector x = (Vector(2) << 0.3, -1.2).finished();
  CHECK(rotate(0.0, x) == x);
  const Vector back = rotate(-0.7, rotate(0.7, x));
  CHECK((back - x).norm() < 1e-15);
  CHECK(rotate(1.1, x).norm() == doctest::Approx(x.norm()));
}
