#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "apor/models.hpp"
#include "apor/oracle.hpp"
#include "apor/ted.hpp"

using namespace apor;

namespace {

struct Fixture {
  ModelPreset m = build_consensus();
  std::vector<DiscrepancyFn> betas = action_discrepancies(m.system, 2);
  IndependenceTable t = build_independence_table(m.system, 0.1);
};

}  // namespace

TEST_CASE("comp_ted branches") {
  Fixture f;
  CHECK(comp_ted({}, 0, 0.5, f.betas, f.t) == doctest::Approx(0.285));
  CHECK(comp_ted({3, 0, 1}, 2, 0.5, f.betas, f.t) == doctest::Approx(0.365));
  const auto t0 = f.t.at_epsilon(0.0);
  // eep is computed at eps = 0 too, so a_2 stays at the end (k = t)
  CHECK(comp_ted({3, 0, 1}, 2, 0.5, f.betas, t0) == doctest::Approx(0.53 * 0.5));
  const auto t2 = f.t.at_epsilon(0.2);
  CHECK(comp_ted({0, 1}, 2, 0.5, f.betas, t2) > 0.53 * 0.5);
}

TEST_CASE("ted_for_trace") {
  Fixture f;
  const auto t0 = f.t.at_epsilon(0.0);
  CHECK(ted_for_trace({0, 1, 2, 3}, 0.0, f.betas, t0) == 0.0);
  CHECK(ted_for_trace({}, 0.7, f.betas, f.t) == 0.7);
  // with nothing to swap the ted is the plain composition
  CHECK(ted_for_trace({1, 2}, 1.0, f.betas, f.t) == doctest::Approx(0.56 * 0.53));
  const double r = ted_for_trace({0, 1, 2, 3}, 0.5, f.betas, f.t);
  CHECK(r == ted_for_trace({0, 1, 2, 3}, 0.5, f.betas, f.t));
  CHECK(r > 0.0);
}

TEST_CASE("ted contains related executions of a_0a_1a_2a_bot") {
  Fixture f;
  const auto& sys = f.m.system;
  const State q0{DiscreteState({0, 0, 0}), Eigen::Vector3d(2.5, 0.5, -3)};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vector> starts;
  for (int i = 0; i < 1000; ++i) {
    Vector d(3);
    for (int j = 0; j < 3; ++j) d[j] = nd(rng);
    // half the starts on the sphere
    const double rad = i % 2 ? 0.5 : 0.5 * std::cbrt(u(rng));
    starts.push_back(q0.continuous + d.normalized() * rad);
  }
  const Trace tr = sys.parse_trace({"a_0", "a_1", "a_2", "a_bot"});
  const auto audit = audit_ted(sys, f.betas, f.t, q0, tr, 0.5, starts);
  CHECK(audit.checked > 1000);
  CHECK(audit.violations == 0);
  CHECK(audit.min_slack >= kSlackTolerance);
  // one step: the ted is nearly tight, so a halved radius gets caught
  const auto cut = audit_ted(sys, f.betas, f.t, q0, {0}, 0.5, starts, 0.5);
  CHECK(cut.violations > 0);
}
