#include "doctest.h"

#include "mspf/dynamics.hpp"
#include "mspf/simulator.hpp"
#include "support.hpp"

using namespace mspf;

TEST_CASE("schedules") {
  SUBCASE("sim1 thirds") {
    const auto s = build_sim1_schedule(100);
    for (int d = 0; d < 6; ++d) {
      CHECK(s.model_at(d, 33) == 0);
      CHECK(s.model_at(d, 34) == 1);
      CHECK(s.model_at(d, 50) == 1);
      CHECK(s.model_at(d, 66) == 1);
      CHECK(s.model_at(d, 67) == 0);
    }
    const auto& row = s.models[0];
    CHECK(std::count(row.begin(), row.end(), 1) == 33);
    CHECK(build_sim1_schedule(3).models[2] == std::vector<int>{0, 1, 0});
  }
  SUBCASE("sim2 individual patterns") {
    const auto s = build_sim2_schedule(100);
    REQUIRE(s.num_individuals() == 6);
    // individual 5 (0-based 4): m0 until the final third
    for (int t = 1; t <= 66; ++t) CHECK(s.model_at(4, t) == 0);
    for (int t = 67; t <= 100; ++t) CHECK(s.model_at(4, t) == 1);
    // individual 4 (0-based 3) returns to m0 in the final third
    CHECK(s.model_at(3, 80) == 0);
  }
  SUBCASE("json forms") {
    const auto c = testing::sim1_config();
    CHECK(schedule_from_json(Json{{"preset", "sim1"}}, c).models == build_sim1_schedule(100).models);
    const auto constant = schedule_from_json(Json{{"constant", 1}}, c);
    CHECK(constant.model_at(5, 1) == 1);
    CHECK(validate_schedule(c, constant).empty());
    RegimeSchedule bad = constant;
    bad.models[2][7] = 2;
    CHECK(!validate_schedule(c, bad).empty());
  }
}

TEST_CASE("sim1 ground truth shapes") {
  const auto c = testing::sim1_config();
  const auto truth = simulate(c, build_sim1_schedule(100));
  REQUIRE(truth.states.size() == 2);
  for (int d = 0; d < 6; ++d) {
    CHECK(truth.states[1][d].rows() == 100);
    CHECK(truth.states[1][d].cols() == 3);
    CHECK(truth.states[0][d].rows() == 5000);
    CHECK(truth.measurements[0][d].rows() == 5000);
    CHECK(truth.states[1][d].allFinite());
    CHECK(truth.indicators[d] == build_sim1_schedule(100).models[d]);
  }
}

TEST_CASE("noiseless run follows the deterministic iteration") {
  auto c = testing::sim1_config();
  for (auto* noise : {&c.process_noise, &c.measurement_noise})
    for (auto& per : *noise)
      for (auto& m : per) m.setZero();
  c.horizons = {5, 12};
  c.fine_summary_weights = {Vector::Ones(5)};
  const auto sched = build_sim1_schedule(12);
  const auto truth = simulate(c, sched);

  for (int l = 0; l < 2; ++l)
    for (int d = 0; d < 6; ++d) CHECK(truth.measurements[l][d] == truth.states[l][d]);

  // iterate by hand
  Matrix coarse(6, 3), fine(6, 3);
  for (int d = 0; d < 6; ++d) {
    coarse.row(d).setConstant(c.initial_states[d]);
    fine.row(d).setConstant(c.initial_states[d]);
  }
  for (int t = 1; t <= 12; ++t) {
    std::vector<Matrix> windows(6, Matrix(5, 3));
    for (int d = 0; d < 6; ++d) {
      for (int k = 0; k < 5; ++k) {
        const Vector next = fine_transition(fine.row(d).transpose(), coarse.row(d).transpose(), c);
        fine.row(d) = next.transpose();
        windows[d].row(k) = next.transpose();
      }
    }
    Matrix next(6, 3);
    for (int d = 0; d < 6; ++d)
      next.row(d) = coarse_transition(sched.model_at(d, t), coarse.row(d).transpose(), windows[d], coarse, d, c).transpose();
    coarse = next;
    for (int d = 0; d < 6; ++d) {
      CHECK((truth.states[1][d].row(t - 1) - coarse.row(d)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((truth.states[0][d].row(t * 5 - 1) - fine.row(d)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("window probe sees consecutive blocks") {
  const auto c = testing::sim1_config();
  std::vector<std::pair<std::int64_t, std::int64_t>> seen;
  simulate(c, build_sim1_schedule(100), [&](int d, int t, std::int64_t first, std::int64_t last) {
    if (d == 2) {
      CHECK(first == static_cast<std::int64_t>(t - 1) * 50);
      seen.emplace_back(first, last);
    }
  });
  REQUIRE(seen.size() == 100);
  for (const auto& [first, last] : seen) CHECK(last - first + 1 == 50);
}

TEST_CASE("simulation is deterministic per seed") {
  const auto c = testing::sim1_config();
  const auto a = simulate(c, build_sim1_schedule(100));
  const auto b = simulate(c, build_sim1_schedule(100));
  CHECK(a.states[0][4] == b.states[0][4]);
  CHECK(a.measurements[1][1] == b.measurements[1][1]);
  auto other = c;
  other.seed += 1;
  CHECK(simulate(other, build_sim1_schedule(100)).measurements[1][1] != a.measurements[1][1]);
}

TEST_CASE("ground truth files round trip") {
  const auto c = testing::sim1_config();
  const auto truth = simulate(c, build_sim1_schedule(100));
  const auto dir = testing::scratch_dir("truth");
  write_ground_truth(dir, truth, c);
  for (const char* f : {"states_scale1.csv", "states_scale2.csv", "measurements_scale1.csv",
                        "measurements_scale2.csv", "indicators.csv", "run_metadata.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto states = read_scale_series(dir, "states", c);
  CHECK(states[1][3] == truth.states[1][3]);
  CHECK(states[0][5] == truth.states[0][5]);
  CHECK(read_indicators(dir, c) == truth.indicators);

  auto narrow = c;
  narrow.state_dims = {2, 2};
  CHECK_THROWS_AS(read_scale_series(dir, "states", narrow), ShapeMismatch);
  std::filesystem::remove_all(dir);
}
