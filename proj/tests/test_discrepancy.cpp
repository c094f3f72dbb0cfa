#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "apor/discrepancy.hpp"
#include "apor/errors.hpp"
#include "apor/models.hpp"

using namespace apor;

namespace {

double svd_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double max_abs_eig(const Matrix& s) {
  Eigen::EigenSolver<Matrix> es(s);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("consensus and heating norms") {
  const auto c = build_consensus();
  const double raw[] = {0.5639, 0.5540, 0.5223};
  const double expected[] = {0.57, 0.56, 0.53};
  for (ActionId i = 0; i < 3; ++i) {
    const Matrix& a = c.system.action(i).matrix;
    CHECK(induced_2norm(a) == doctest::Approx(svd_norm(a)).epsilon(1e-10));
    CHECK(induced_2norm(a) == doctest::Approx(raw[i]).epsilon(1e-3));
    CHECK(linear_discrepancy(a, Norm::L2, 2).coefficient() == doctest::Approx(expected[i]));
  }
  const auto h = build_heating();
  const Matrix& wh = h.system.action(h.system.action_id("on_0")).matrix;
  const Matrix& wt = h.system.action(h.system.action_id("flow")).matrix;
  CHECK(induced_2norm(wh) == doctest::Approx(svd_norm(wh)).epsilon(1e-10));
  CHECK(linear_discrepancy(wh, Norm::L2, 2).coefficient() == doctest::Approx(0.99));
  CHECK(linear_discrepancy(wt, Norm::L2, 2).coefficient() == doctest::Approx(0.52));
}

TEST_CASE("trivial norms") {
  CHECK(induced_2norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(induced_2norm(Matrix::Zero(3, 3)) == 0.0);
  CHECK(linear_discrepancy(Matrix::Identity(3, 3), Norm::L2, 2).coefficient() == 1.0);
  Matrix m(2, 2);
  m << 1, -2, 3, 0.5;
  CHECK(induced_norm(m, Norm::Linf) == doctest::Approx(3.5));
}

TEST_CASE("random symmetric matrices: norm is the spectral radius") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
    const Matrix s = (a + a.transpose()) / 2;
    CHECK(induced_2norm(s) == doctest::Approx(max_abs_eig(s)).epsilon(1e-9));
  }
}

TEST_CASE("round_up") {
  CHECK(round_up(0.5639, 2) == doctest::Approx(0.57));
  CHECK(round_up(1.0, 2) == 1.0);
  CHECK(round_up(0.52, 2) == doctest::Approx(0.52));
  CHECK(round_up(0.123, -1) == 0.123);
}

TEST_CASE("beta_max") {
  std::vector<DiscrepancyFn> b{DiscrepancyFn::linear(0.57), DiscrepancyFn::linear(0.56), DiscrepancyFn::linear(0.53)};
  CHECK(beta_max(b)(1.0) == doctest::Approx(0.57));
  std::vector<DiscrepancyFn> one{DiscrepancyFn::linear(0.3)};
  CHECK(beta_max(one)(2.0) == doctest::Approx(0.6));
  std::vector<DiscrepancyFn> heat{DiscrepancyFn::linear(0.99), DiscrepancyFn::linear(0.52)};
  CHECK(beta_max(heat)(1.0) == doctest::Approx(0.99));
  CHECK_THROWS_AS(beta_max(std::span<const DiscrepancyFn>{}), DomainError);
}

TEST_CASE("gamma against direct series") {
  const auto lin = DiscrepancyFn::linear(0.57);
  CHECK(gamma(0, 0.1, lin) == doctest::Approx(0.1));
  CHECK(gamma(2, 0.1, lin) == doctest::Approx(0.18949));
  for (int n = 0; n < 20; ++n) {
    CHECK(gamma(n, 0.0, lin) == 0.0);
    double sum = 0, term = 0.25;
    for (int i = 0; i <= n; ++i, term *= 0.57) sum += term;
    CHECK(gamma(n, 0.25, lin) == doctest::Approx(sum).epsilon(1e-12));
  }
  const auto one = DiscrepancyFn::linear(1.0);
  CHECK(gamma(5, 0.2, one) == doctest::Approx(1.2));
  const auto sq = DiscrepancyFn::general([](double v) { return v * v; });
  CHECK(gamma(2, 0.5, sq) == doctest::Approx(0.5 + 0.25 + 0.0625));
  CHECK_THROWS_AS(gamma(-1, 0.1, lin), DomainError);
}

TEST_CASE("compose along a trace") {
  std::vector<DiscrepancyFn> b{DiscrepancyFn::linear(0.57), DiscrepancyFn::linear(0.56)};
  CHECK(compose_along_trace({}, 1.0, b) == 1.0);
  CHECK(compose_along_trace({0, 1}, 1.0, b) == doctest::Approx(0.3192));
  CHECK(compose_along_trace({0, 1, 1, 0}, 0.0, b) == 0.0);
}
