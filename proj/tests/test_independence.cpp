#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include <Eigen/SVD>

#include "apor/errors.hpp"
#include "apor/independence.hpp"
#include "apor/models.hpp"
#include "apor/oracle.hpp"

using namespace apor;

namespace {

double svd_norm(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues()(0); }

std::vector<Trace> all_traces(std::size_t letters, std::size_t len) {
  std::vector<Trace> out{{}};
  for (std::size_t l = 0; l < len; ++l) {
    std::vector<Trace> next;
    for (const auto& t : out) {
      for (ActionId a = 0; a < letters; ++a) {
        auto u = t;
        u.push_back(a);
        next.push_back(std::move(u));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("consensus commutation bounds") {
  const auto m = build_consensus();
  const auto& sys = m.system;
  const double r_inv = 4 * std::sqrt(3.0);
  const double expected[3][3] = {{0, 0.1, 0.07}, {0.1, 0, 0.17}, {0.07, 0.17, 0}};
  for (ActionId a = 0; a < 3; ++a) {
    for (ActionId b = a + 1; b < 3; ++b) {
      const Matrix& A = sys.action(a).matrix;
      const Matrix& B = sys.action(b).matrix;
      const double hand = svd_norm(A * B - B * A) * r_inv;
      const auto bound = commutation_bound(sys, a, b);
      REQUIRE(bound);
      CHECK(*bound == doctest::Approx(hand).epsilon(1e-10));
      CHECK(std::abs(*bound - expected[a][b]) <= 0.005);
    }
    CHECK_FALSE(commutation_bound(sys, a, 3));
  }
}

TEST_CASE("consensus independence at 0.1, 0.2 and 0") {
  const auto m = build_consensus();
  const auto t = build_independence_table(m.system, 0.1);
  CHECK(t.independent(0, 1));
  CHECK(t.independent(1, 0));
  CHECK(t.independent(0, 2));
  CHECK_FALSE(t.independent(1, 2));
  for (ActionId a = 0; a < 4; ++a) {
    CHECK_FALSE(t.independent(a, a));
    if (a < 3) CHECK_FALSE(t.independent(a, 3));
  }
  const auto t2 = t.at_epsilon(0.2);
  CHECK(t2.independent(0, 1));
  CHECK(t2.independent(0, 2));
  CHECK(t2.independent(1, 2));
  const auto t0 = t.at_epsilon(0.0);
  CHECK_FALSE(t0.independent(0, 1));
}

TEST_CASE("platoon cross-car bound is |(A-I) db|") {
  const auto m = preset_by_name("platoon2");
  const auto& sys = m.system;
  // names: one letter per car, a = +10, b = -10, c = 0
  const auto ab = sys.action_id("aa"), ba = sys.action_id("bb");
  const Matrix A = sys.action(ab).matrix;
  const Matrix I = Matrix::Identity(A.rows(), A.cols());
  auto base = [&](ActionId id) { return std::get<AffineOffset>(sys.action(id).offset).base; };
  const double hand = ((A - I) * (base(ba) - base(ab))).norm();
  CHECK(hand == doctest::Approx(std::sqrt(0.08)));
  CHECK(*commutation_bound(sys, ab, ba) == doctest::Approx(hand).epsilon(1e-12));
  CHECK(std::abs(hand - 0.282) <= 0.005);
  const auto bc = sys.action_id("bb"), cc = sys.action_id("cc");
  CHECK(*commutation_bound(sys, bc, cc) == doctest::Approx(std::sqrt(0.02)));
  CHECK_FALSE(commutation_bound(sys, ab, ab));
}

TEST_CASE("heating independence table") {
  const auto m = build_heating();
  const auto& sys = m.system;
  const auto t = build_independence_table(sys, m.epsilon);
  const std::vector<std::string> dec{"on_0", "off_0", "on_1", "off_1", "on_2", "off_2"};
  for (const auto& x : dec) {
    for (const auto& y : dec) {
      if (x == y) continue;
      const auto a = sys.action_id(x), b = sys.action_id(y);
      const bool same_room = x.back() == y.back();
      CHECK(t.independent(a, b) == !same_room);
      if (!same_room) CHECK(*t.bound(a, b) <= 0.6);
    }
    CHECK_FALSE(t.independent(sys.action_id(x), sys.action_id("flow")));
  }
}

TEST_CASE("non-commuting matrices need an invariant radius") {
  ConsensusParams p;
  auto m = build_consensus(p);
  const auto& s = m.system;
  TransitionSystem bare(s.dimension(), s.discrete_vars(), s.actions(), s.initial(), std::nullopt);
  CHECK_THROWS_AS(commutation_bound(bare, 0, 1), ConfigError);
}

TEST_CASE("eep") {
  const auto m = build_consensus();
  const auto t = build_independence_table(m.system, 0.1);
  CHECK(eep({3, 0, 1}, 2, t) == 2);
  CHECK(eep({}, 2, t) == 0);
  const auto t2 = t.at_epsilon(0.2);
  CHECK(eep({0, 1}, 2, t2) == 0);
  CHECK(eep({3, 3, 3}, 0, t) == 3);
}

TEST_CASE("trace equivalence examples") {
  const auto m = build_consensus();
  const auto t = build_independence_table(m.system, 0.1);
  CHECK(trace_equivalent({0, 1, 2, 3}, {0, 1, 2, 3}, t));
  CHECK(trace_equivalent({0, 1, 2, 3}, {1, 2, 0, 3}, t));
  CHECK_FALSE(trace_equivalent({1, 2}, {2, 1}, t));
  CHECK(canonical_key({1, 0}, t) == Trace{0, 1});
  CHECK(canonical_key({2}, t) == Trace{2});
}

TEST_CASE("keys agree with the swap closure on short traces") {
  const auto m = build_consensus();
  for (double eps : {0.1, 0.2, 0.0}) {
    const auto t = build_independence_table(m.system, eps);
    for (std::size_t len = 0; len <= 5; ++len) {
      for (const auto& tr : all_traces(4, len)) {
        const auto closure = swap_closure(tr, t);
        const auto key = canonical_key(tr, t);
        CHECK(key == closure.front());
        const auto fk = foata_key(tr, t);
        for (const auto& u : closure) {
          CHECK(foata_key(u, t) == fk);
          CHECK(trace_equivalent(tr, u, t));
        }
        if (!tr.empty()) {
          Trace prefix(tr.begin(), tr.end() - 1);
          CHECK(foata_extend(foata_key(prefix, t), tr.back(), t) == fk);
        }
      }
    }
  }
}

TEST_CASE("invariant radius certificate") {
  const auto m = build_consensus();
  CHECK(certify_invariant_radius(m.system).certified);
  CHECK_FALSE(certify_invariant_radius(build_heating().system).certified);
}
