#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "apor/errors.hpp"
#include "apor/lts.hpp"
#include "apor/models.hpp"

using namespace apor;

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// plain loops, no Eigen
std::array<double, 3> mul(const Mat3& m, std::array<double, 3> x) {
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) y[i] += m[i][j] * x[j];
  return y;
}

State consensus_state(std::array<double, 3> x, std::vector<int> d) {
  return {DiscreteState(std::move(d)), Eigen::Vector3d(x[0], x[1], x[2])};
}

}  // namespace

TEST_CASE("consensus a_0 applied to e0 gives the first column") {
  const auto m = build_consensus();
  const auto& sys = m.system;
  const State q = consensus_state({1, 0, 0}, {0, 0, 0});
  const State r = apply_action(sys.action(sys.action_id("a_0")), q);
  CHECK(r.continuous[0] == doctest::Approx(0.2));
  CHECK(r.continuous[1] == doctest::Approx(-0.2));
  CHECK(r.continuous[2] == doctest::Approx(-0.3));
  CHECK(r.discrete == DiscreteState({1, 0, 0}));
}

TEST_CASE("identity action leaves the state alone") {
  AffineAction a;
  a.name = "id";
  a.matrix = Matrix::Identity(2, 2);
  a.offset = AffineOffset{Vector::Zero(2), Matrix(2, 0)};
  const State q{DiscreteState({1}), Eigen::Vector2d(3.5, -1.25)};
  const State r = apply_action(a, q);
  CHECK(r.discrete == q.discrete);
  CHECK(r.continuous == q.continuous);
  CHECK(is_enabled(a, q));
}

TEST_CASE("heating on_0 and flow offsets") {
  const auto m = build_heating();
  const auto& sys = m.system;
  const Mat3 wh{{{0.96, 0.01, 0.01}, {0.02, 0.97, 0.01}, {0.0, 0.01, 0.97}}};
  const State q{DiscreteState({0, 0, 0, 0, 0, 0}), Eigen::Vector3d(70, 70, 70)};
  const State r = apply_action(sys.action(sys.action_id("on_0")), q);
  auto y = mul(wh, {70, 70, 70});
  y[0] += 1.2 + 0.4;
  y[2] += 1.2;
  for (int i = 0; i < 3; ++i) CHECK(r.continuous[i] == doctest::Approx(y[i]));
  CHECK(r.discrete == DiscreteState({1, 0, 0, 1, 0, 0}));

  const State all{DiscreteState({1, 1, 1, 1, 0, 0}), Eigen::Vector3d(70, 70, 70)};
  const State f = apply_action(sys.action(sys.action_id("flow")), all);
  CHECK(f.continuous[0] == doctest::Approx(75.7));
  CHECK(f.discrete == DiscreteState({0, 0, 0, 1, 0, 0}));
}

TEST_CASE("table offset without an entry is a config error") {
  AffineAction a;
  a.name = "t";
  a.matrix = Matrix::Identity(1, 1);
  TableOffset tab;
  tab.entries[DiscreteState({0})] = Vector::Constant(1, 2.0);
  a.offset = tab;
  const State q0{DiscreteState({0}), Vector::Constant(1, 1.0)};
  CHECK(apply_action(a, q0).continuous[0] == doctest::Approx(3.0));
  const State q1{DiscreteState({1}), Vector::Constant(1, 1.0)};
  CHECK_THROWS_AS(apply_action(a, q1), ConfigError);
}

TEST_CASE("consensus enabling follows the decided flags") {
  const auto m = build_consensus();
  const auto& sys = m.system;
  const State fresh = consensus_state({0, 0, 0}, {0, 0, 0});
  const State done = consensus_state({0, 0, 0}, {1, 1, 1});
  for (ActionId i = 0; i < 3; ++i) {
    CHECK(is_enabled(sys.action(i), fresh));
    CHECK_FALSE(is_enabled(sys.action(i), done));
  }
  CHECK_FALSE(is_enabled(sys.action(3), fresh));
  CHECK(is_enabled(sys.action(3), done));
}

TEST_CASE("half-space guards are closed") {
  AffineAction a;
  a.name = "g";
  a.matrix = Matrix::Identity(2, 2);
  a.offset = AffineOffset{Vector::Zero(2), Matrix(2, 0)};
  a.guard.halfspaces = {{Eigen::Vector2d(1, 1), 1.0}};
  CHECK(is_enabled(a, {DiscreteState(), Eigen::Vector2d(0.5, 0.5)}));
  CHECK_FALSE(is_enabled(a, {DiscreteState(), Eigen::Vector2d(0.5, 0.5000001)}));
}

TEST_CASE("simulate and validity") {
  const auto m = build_consensus();
  const auto& sys = m.system;
  const State q0 = consensus_state({2.5, 0.5, -3}, {0, 0, 0});

  const auto empty = simulate(sys, q0, {});
  CHECK(empty.length() == 0);
  CHECK(empty.lstate().continuous == q0.continuous);
  CHECK(is_valid_execution(sys, empty));

  const Mat3 a0{{{0.2, -0.2, -0.3}, {-0.2, 0.2, -0.1}, {-0.3, -0.1, 0.3}}};
  const Mat3 a1{{{0.2, 0.3, 0.2}, {0.3, -0.2, 0.3}, {0.2, 0.3, 0.0}}};
  const Mat3 a2{{{-0.1, 0.0, 0.4}, {0.0, 0.4, -0.2}, {0.4, -0.2, -0.1}}};
  const auto ex = simulate(sys, q0, sys.parse_trace({"a_0", "a_1", "a_2", "a_bot"}));
  const auto y = mul(a2, mul(a1, mul(a0, {2.5, 0.5, -3})));
  for (int i = 0; i < 3; ++i) CHECK(ex.lstate().continuous[i] == doctest::Approx(y[i]).epsilon(1e-12));
  CHECK(ex.lstate().discrete == DiscreteState({0, 0, 0}));
  CHECK(ex.fstate().continuous == q0.continuous);
  CHECK(is_valid_execution(sys, ex));
  CHECK(is_valid_execution(sys, simulate(sys, q0, sys.parse_trace({"a_0", "a_2", "a_1", "a_bot"}))));
  CHECK_FALSE(is_valid_execution(sys, simulate(sys, q0, sys.parse_trace({"a_0", "a_0"}))));

  // start outside the initial ball
  const State far = consensus_state({10, 0, 0}, {0, 0, 0});
  CHECK_FALSE(is_valid_execution(sys, simulate(sys, far, {})));

  // cache consistency
  for (std::size_t i = 0; i < ex.length(); ++i) {
    const State r = apply_action(sys.action(ex.trace[i]), ex.states[i]);
    CHECK(r.continuous == ex.states[i + 1].continuous);
    CHECK(r.discrete == ex.states[i + 1].discrete);
  }
}

TEST_CASE("discrete update ignores the continuous part") {
  for (const auto& name : preset_names()) {
    if (name == "platoon4") continue;
    const auto m = preset_by_name(name);
    const auto& sys = m.system;
    for (const auto& l : sys.discrete_domain()) {
      for (const auto& a : sys.actions()) {
        const State q{l, Vector::Zero(static_cast<Eigen::Index>(sys.dimension()))};
        const State q2{l, Vector::Constant(static_cast<Eigen::Index>(sys.dimension()), 37.0)};
        CHECK(apply_action(a, q).discrete == apply_action(a, q2).discrete);
      }
    }
  }
}

TEST_CASE("ball containment") {
  const State c{DiscreteState({0}), Eigen::Vector2d(0, 0)};
  const Ball b{c, 1.0};
  CHECK(ball_distance_slack(b, {DiscreteState({0}), Eigen::Vector2d(0.6, 0.8)}, Norm::L2) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ball_contains(b, {DiscreteState({0}), Eigen::Vector2d(0.6, 0.8)}, Norm::L2));
  CHECK_FALSE(ball_contains(b, {DiscreteState({1}), Eigen::Vector2d(0, 0)}, Norm::L2));
  CHECK(std::isinf(ball_distance_slack(b, {DiscreteState({1}), Eigen::Vector2d(0, 0)}, Norm::L2)));
  const Ball zero{c, 0.0};
  CHECK(ball_contains(zero, c, Norm::L2));
  CHECK_FALSE(ball_contains(zero, {DiscreteState({0}), Eigen::Vector2d(1e-9, 0)}, Norm::L2));
  CHECK(ball_contains(b, {DiscreteState({0}), Eigen::Vector2d(1, 1)}, Norm::Linf));
}

TEST_CASE("system validation") {
  CHECK_THROWS_AS(build_consensus().system.action_id("nope"), ConfigError);
  AffineAction a;
  a.name = "x";
  a.matrix = Matrix::Identity(2, 2);
  a.offset = AffineOffset{Vector::Zero(2), Matrix(2, 0)};
  InitialSet init{DiscreteState(), BallRegion{Vector::Zero(2), 1.0}};
  CHECK_THROWS_AS(TransitionSystem(2, {}, {a, a}, init), ConfigError);
  AffineAction bad = a;
  bad.name = "y";
  bad.matrix = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(TransitionSystem(2, {}, {bad}, init), ConfigError);
}
