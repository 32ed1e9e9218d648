#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "mspf/csv.hpp"
#include "mspf/eval.hpp"
#include "support.hpp"

using namespace mspf;

namespace {

// Truth and estimate series for the sim1 shapes, estimate = truth + offset.
struct Pair {
  ScaleSystemConfig config = testing::sim1_config();
  GroundTruth truth;
  FilterOutput out;
};

Pair random_pair(unsigned seed, double offset_scale) {
  Pair p;
  p.config.horizons = {4, 10};
  p.config.fine_summary_weights = {Vector::Ones(4)};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  p.truth.states.resize(2);
  p.out.state_estimates.resize(2);
  for (int l = 0; l < 2; ++l)
    for (int d = 0; d < 6; ++d) {
      const auto rows = p.config.total_steps(l);
      Matrix x(rows, 3), e(rows, 3);
      for (Eigen::Index t = 0; t < rows; ++t)
        for (int n = 0; n < 3; ++n) {
          x(t, n) = z(gen);
          e(t, n) = x(t, n) + offset_scale * z(gen);
        }
      p.truth.states[l].push_back(x);
      p.out.state_estimates[l].push_back(e);
    }
  p.truth.indicators = build_sim1_schedule(10).models;
  p.out.indicator_map = p.truth.indicators;
  return p;
}

}  // namespace

TEST_CASE("coarse rmse") {
  SUBCASE("identical series") {
    auto p = random_pair(1, 0.0);
    CHECK(coarse_rmse(p.truth, p.out, p.config).isZero(0.0));
  }
  SUBCASE("constant offset on one dimension") {
    auto p = random_pair(2, 0.0);
    for (auto& e : p.out.state_estimates[1]) e.col(1).array() += 0.1;
    const Matrix r = coarse_rmse(p.truth, p.out, p.config);
    for (int d = 0; d < 6; ++d) {
      CHECK(r(d, 0) == 0.0);
      CHECK(r(d, 1) == doctest::Approx(0.1).epsilon(1e-12));
      CHECK(r(d, 2) == 0.0);
    }
  }
  SUBCASE("loop oracle and table shape") {
    auto p = random_pair(3, 0.3);
    const Matrix r = coarse_rmse(p.truth, p.out, p.config);
    CHECK(r.rows() == 6);
    CHECK(r.cols() == 3);
    for (int d = 0; d < 6; ++d)
      for (int n = 0; n < 3; ++n) {
        double s = 0.0;
        for (int t = 0; t < 10; ++t) {
          const double e = p.out.state_estimates[1][d](t, n) - p.truth.states[1][d](t, n);
          s += e * e;
        }
        CHECK(std::abs(r(d, n) - std::sqrt(s / 10.0)) < 1e-12);
      }
  }
  SUBCASE("shape mismatch") {
    auto p = random_pair(4, 0.1);
    p.out.state_estimates[1][0].conservativeResize(9, 3);
    CHECK_THROWS_AS(coarse_rmse(p.truth, p.out, p.config), std::invalid_argument);
  }
}

TEST_CASE("fine window rmse") {
  SUBCASE("identical series") {
    auto p = random_pair(5, 0.0);
    for (const auto& m : fine_rmse_per_window(p.truth, p.out, p.config)) CHECK(m.isZero(0.0));
  }
  SUBCASE("loop oracle") {
    auto p = random_pair(6, 0.2);
    const auto r = fine_rmse_per_window(p.truth, p.out, p.config);
    REQUIRE(r.size() == 6);
    for (int d = 0; d < 6; ++d) {
      REQUIRE(r[d].rows() == 10);
      for (int t = 0; t < 10; ++t)
        for (int n = 0; n < 3; ++n) {
          double s = 0.0;
          for (int k = 0; k < 4; ++k) {
            const double e = p.out.state_estimates[0][d](t * 4 + k, n) - p.truth.states[0][d](t * 4 + k, n);
            s += e * e;
          }
          CHECK(std::abs(r[d](t, n) - std::sqrt(s / 4.0)) < 1e-12);
        }
    }
  }
  SUBCASE("single coarse step") {
    auto p = random_pair(7, 0.2);
    p.config.horizons = {40, 1};
    p.config.fine_summary_weights = {Vector::Ones(40)};
    for (int d = 0; d < 6; ++d) {
      p.truth.states[1][d].conservativeResize(1, 3);
      p.out.state_estimates[1][d].conservativeResize(1, 3);
    }
    const auto r = fine_rmse_per_window(p.truth, p.out, p.config);
    CHECK(r[0].rows() == 1);
  }
}

TEST_CASE("indicator metrics") {
  const auto truth = build_sim1_schedule(100).models;
  SUBCASE("perfect tracking") {
    const auto m = indicator_metrics(truth, truth, 5);
    for (int d = 0; d < 6; ++d) {
      CHECK(m.accuracy[d] == 1.0);
      CHECK(m.switch_times[d] == std::vector<int>{34, 67});
      CHECK(m.switch_delay[d] == std::vector<double>{0.0, 0.0});
    }
  }
  SUBCASE("two misses after burn-in") {
    auto map = truth;
    map[0][10] = 1;
    map[0][80] = 1;
    map[0][2] = 1;  // inside the burn-in, not counted
    CHECK(indicator_metrics(truth, map, 5).accuracy[0] == doctest::Approx(93.0 / 95.0).epsilon(1e-15));
  }
  SUBCASE("late and missed switches") {
    auto map = truth;
    map[1][33] = 0;  // t = 34
    map[1][34] = 0;  // t = 35
    for (int t = 66; t < 100; ++t) map[1][t] = 1;
    const auto m = indicator_metrics(truth, map, 5);
    CHECK(m.switch_delay[1][0] == 2.0);
    CHECK(m.switch_delay[1][1] == std::numeric_limits<double>::infinity());
  }
  SUBCASE("bad burn-in") { CHECK_THROWS(indicator_metrics(truth, truth, 100)); }
}

TEST_CASE("report files round trip") {
  auto p = random_pair(8, 0.2);
  p.out.indicator_map[3][6] = 1 - p.out.indicator_map[3][6];
  const auto report = evaluate(p.truth, p.out, p.config, 2);
  const auto dir = testing::scratch_dir("report");
  emit_report(dir, report);
  for (const char* f : {"coarse_rmse.csv", "fine_rmse.csv", "indicator_accuracy.csv", "switch_delays.csv", "summary.txt"})
    CHECK(std::filesystem::exists(dir / f));
  const auto back = read_report(dir);
  CHECK(back.coarse_rmse == report.coarse_rmse);
  CHECK(back.fine_rmse.size() == 6);
  CHECK(back.fine_rmse[2] == report.fine_rmse[2]);
  CHECK(back.indicator_accuracy == report.indicator_accuracy);
  CHECK(back.switch_times == report.switch_times);
  CHECK(back.burn_in == 2);

  const auto table = csv::read(dir / "coarse_rmse.csv");
  CHECK(table.rows.size() == 6);
  CHECK(table.header.size() == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
  CHECK(csv::format_number(3.0) == "3");
  CHECK(csv::format_number(0.1) == "0.1");
  CHECK(csv::format_number(std::numeric_limits<double>::infinity()) == "inf");
  const double v = 0.1234567890123456789;
  const auto dir = testing::scratch_dir("csv");
  csv::write(dir / "x.csv", csv::Table{{"a", "b"}, {{v, -std::numeric_limits<double>::infinity()}}});
  const auto t = csv::read(dir / "x.csv");
  CHECK(t.rows[0][0] == v);
  CHECK(std::isinf(t.rows[0][1]));
  std::filesystem::remove_all(dir);
}
