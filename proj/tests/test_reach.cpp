#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "apor/errors.hpp"
#include "apor/models.hpp"
#include "apor/reach.hpp"

using namespace apor;

namespace {

ReachResult run(const ModelPreset& m, std::size_t horizon, std::size_t workers = 1, bool history = true) {
  const auto betas = action_discrepancies(m.system, m.discrepancy_decimals);
  const auto table = build_independence_table(m.system, m.epsilon);
  ReachParams p;
  p.horizon = horizon;
  p.delta0 = m.delta0;
  p.workers = workers;
  p.full_history = history;
  return reach(m.system, betas, table, p);
}

}  // namespace

TEST_CASE("delta cover of an interval") {
  InitialSet init{DiscreteState(), Box{Vector::Constant(1, 0.0), Vector::Constant(1, 5.0)}};
  const auto cover = delta_cover(init, 1.0, Norm::L2);
  REQUIRE(cover.size() == 3);
  CHECK(cover[0].continuous[0] == doctest::Approx(1.0));
  CHECK(cover[1].continuous[0] == doctest::Approx(2.5));
  CHECK(cover[2].continuous[0] == doctest::Approx(4.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 5);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    bool hit = false;
    for (const auto& c : cover) hit = hit || std::abs(c.continuous[0] - x) <= 1.0 + 1e-12;
    REQUIRE(hit);
  }
  CHECK_THROWS_AS(delta_cover(init, 0.0, Norm::L2), DomainError);
}

TEST_CASE("delta cover of balls and boxes") {
  InitialSet ball{DiscreteState(), BallRegion{Eigen::Vector3d(2.5, 0.5, -3), 0.5}};
  CHECK(delta_cover(ball, 0.5, Norm::L2).size() == 1);
  InitialSet box{DiscreteState(), Box{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}};
  const auto one = delta_cover(box, 1.0, Norm::L2);
  REQUIRE(one.size() == 1);
  CHECK(one[0].continuous[0] == doctest::Approx(0.0));

  InitialSet big{DiscreteState(), BallRegion{Eigen::Vector2d(0, 0), 2.0}};
  const auto cover = delta_cover(big, 0.5, Norm::L2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector2d x(u(rng), u(rng));
    if (x.norm() > 2) continue;
    bool hit = false;
    for (const auto& c : cover) hit = hit || (c.continuous - x).norm() <= 0.5 + 1e-12;
    REQUIRE(hit);
  }
}

TEST_CASE("ball enabling") {
  const auto m = build_consensus();
  const State c{DiscreteState({0, 0, 0}), Eigen::Vector3d(0, 0, 0)};
  CHECK(enabled_actions_ball({c, 0.0}, m.system) == enabled_actions(c, m.system));
  CHECK(enabled_actions_ball({c, 100.0}, m.system) == std::vector<ActionId>{0, 1, 2});

  PlatoonParams pp;
  pp.positions = {49.0, 0.0};
  pp.position_spread = {0.0, 0.0};
  const auto p = build_platoon(pp);
  const auto& sys = p.system;
  const State q{DiscreteState(), Eigen::Vector4d(49, 10, 0, 10)};
  const auto en = enabled_actions_ball({q, 2.0}, sys);
  auto has = [&](const std::string& n) { return std::ranges::count(en, sys.action_id(n)) == 1; };
  CHECK(has("ca"));
  CHECK(has("cc"));
  CHECK_FALSE(has("cb"));
  const auto point = enabled_actions(q, sys);
  CHECK(std::ranges::count(point, sys.action_id("ca")) == 0);
}

TEST_CASE("horizon zero") {
  const auto m = build_consensus();
  const auto r = run(m, 0);
  CHECK(r.explored_traces() == 1);
  REQUIRE(r.lower.size() == 1);
  CHECK(r.lower[0][0] == doctest::Approx(2.0));
  CHECK(r.upper[0][0] == doctest::Approx(3.0));
}

TEST_CASE("consensus reach envelope and safety") {
  const auto m = build_consensus();
  const auto r = run(m, m.horizon);
  CHECK_FALSE(r.partial());
  REQUIRE(r.lower.size() == m.horizon + 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(r.lower.back()[i] >= -0.4);
    CHECK(r.upper.back()[i] <= 0.4);
  }
  CHECK(check_safety(r, *m.safety).verdict == Verdict::Safe);
  const auto b = reach_bounds(r, 0);
  CHECK(b.size() == m.horizon + 1);
  CHECK_THROWS_AS(reach_bounds(r, 7), DomainError);
  CHECK(r.nominal.value() == 216u);
}

TEST_CASE("workers do not change the result") {
  const auto m = preset_by_name("platoon2");
  const auto a = run(m, m.horizon, 1);
  const auto b = run(m, m.horizon, 4);
  CHECK(a.explored_traces() == b.explored_traces());
  REQUIRE(a.covers.size() == b.covers.size());
  for (std::size_t c = 0; c < a.covers.size(); ++c) {
    const auto& ta = a.covers[c].tables.back();
    const auto& tb = b.covers[c].tables.back();
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      CHECK(ta[i].trace == tb[i].trace);
      CHECK(ta[i].radius == tb[i].radius);
    }
  }
  for (std::size_t t = 0; t < a.lower.size(); ++t) {
    CHECK(a.lower[t] == b.lower[t]);
    CHECK(a.upper[t] == b.upper[t]);
  }
}

TEST_CASE("safety queries") {
  const auto m = build_consensus();
  const auto r = run(m, m.horizon);
  SafetyQuery none;
  none.first_step = 0;
  CHECK(check_safety(r, none).verdict == Verdict::Safe);
  // unsafe set far from every ball
  SafetyQuery inside = SafetyQuery::outside_box(Vector::Constant(3, -100), Vector::Constant(3, 100));
  CHECK(check_safety(r, inside).verdict == Verdict::Safe);
  SafetyQuery hit;
  hit.unsafe = {{HalfSpace{Eigen::Vector3d(1, 0, 0), 2.5}}};
  const auto res = check_safety(r, hit);
  CHECK(res.verdict == Verdict::Unknown);
  CHECK(res.step == 0u);

  const auto lean = run(m, m.horizon, 1, false);
  CHECK_THROWS_AS(check_safety(lean, hit), DomainError);
  hit.first_step = m.horizon;
  CHECK_NOTHROW(check_safety(lean, hit));
}

TEST_CASE("ball meets polyhedron") {
  const std::vector<HalfSpace> half{{Eigen::Vector2d(1, 0), 0.0}};
  CHECK(ball_meets_polyhedron(Eigen::Vector2d(1, 0), 1.0, half, Norm::L2));
  CHECK_FALSE(ball_meets_polyhedron(Eigen::Vector2d(1.01, 0), 1.0, half, Norm::L2));
  CHECK(ball_meets_polyhedron(Eigen::Vector2d(5, 5), 0.0, {}, Norm::L2));
}

TEST_CASE("nominal count formatting") {
  NominalCount n;
  for (int i = 0; i < 3; ++i) n.multiply(2);
  for (int i = 0; i < 3; ++i) n.multiply(3);
  CHECK(n.value() == 216u);
  CHECK(n.to_string() == "216 (2^3*3^3)");
  NominalCount big;
  for (int i = 0; i < 40; ++i) big.multiply(81);
  CHECK_FALSE(big.value());
  CHECK(big.expression() == "81^40");
  CHECK(big.log10() == doctest::Approx(40 * std::log10(81.0)));
}
