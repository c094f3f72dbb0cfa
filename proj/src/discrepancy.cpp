#include "apor/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "apor/errors.hpp"

namespace apor {

DiscrepancyFn DiscrepancyFn::linear(double coefficient) {
  if (!std::isfinite(coefficient) || coefficient < 0)
    throw DomainError("linear discrepancy coefficient must be finite and non-negative");
  DiscrepancyFn f;
  f.coefficient_ = coefficient;
  return f;
}

DiscrepancyFn DiscrepancyFn::general(std::function<double(double)> fn) {
  if (!fn) throw DomainError("general discrepancy needs a callable");
  DiscrepancyFn f;
  f.fn_ = std::move(fn);
  return f;
}

double DiscrepancyFn::operator()(double v) const { return fn_ ? fn_(v) : coefficient_ * v; }

namespace {

constexpr Eigen::Index kDirectLimit = 16;
constexpr int kPowerIterationCap = 100000;
constexpr double kPowerTolerance = 1e-10;

double power_iteration_2norm(const Matrix& a) {
  const Matrix gram = a.transpose() * a;
  Vector v = Vector::Ones(a.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < kPowerIterationCap; ++it) {
    Vector w = gram * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    w /= next;
    if (std::abs(next - lambda) <= kPowerTolerance * next) return std::sqrt(next);
    lambda = next;
    v = std::move(w);
  }
  throw NumericError("induced 2-norm: power iteration did not converge after " +
                     std::to_string(kPowerIterationCap) + " iterations");
}

}  // namespace

double induced_2norm(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("induced norm needs a square matrix");
  if (!a.allFinite()) throw NumericError("induced norm of a matrix with non-finite entries");
  if (a.size() == 0) return 0.0;
  if (a.rows() > kDirectLimit) return power_iteration_2norm(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.transpose() * a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return power_iteration_2norm(a);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double induced_norm(const Matrix& a, Norm norm) {
  if (norm == Norm::L2) return induced_2norm(a);
  if (a.rows() != a.cols()) throw DomainError("induced norm needs a square matrix");
  if (!a.allFinite()) throw NumericError("induced norm of a matrix with non-finite entries");
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

double round_up(double value, int decimals) {
  if (decimals < 0) return value;
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double down = std::floor(scaled);
  if (scaled - down <= 1e-12 * std::max(1.0, std::abs(scaled))) return down / scale;
  return std::ceil(scaled) / scale;
}

DiscrepancyFn linear_discrepancy(const Matrix& a, Norm norm, int decimals) {
  return DiscrepancyFn::linear(round_up(induced_norm(a, norm), decimals));
}

DiscrepancyFn beta_max(std::span<const DiscrepancyFn> betas) {
  if (betas.empty()) throw DomainError("beta_max of an empty set");
  const bool all_linear = std::all_of(betas.begin(), betas.end(), [](const auto& b) { return b.is_linear(); });
  if (all_linear) {
    double c = 0.0;
    for (const auto& b : betas) c = std::max(c, b.coefficient());
    return DiscrepancyFn::linear(c);
  }
  std::vector<DiscrepancyFn> copy(betas.begin(), betas.end());
  return DiscrepancyFn::general([copy = std::move(copy)](double v) {
    double m = 0.0;
    for (const auto& b : copy) m = std::max(m, b(v));
    return m;
  });
}

double gamma(int n, double eps, const DiscrepancyFn& beta) {
  if (n < 0) throw DomainError("gamma index must be non-negative, got " + std::to_string(n));
  if (eps < 0) throw DomainError("gamma argument must be non-negative");
  if (beta.is_linear()) {
    const double c = beta.coefficient();
    if (std::abs(c - 1.0) < 1e-12) return (n + 1) * eps;
    return eps * (std::pow(c, n + 1) - 1.0) / (c - 1.0);
  }
  double term = eps;
  double sum = eps;
  for (int i = 1; i <= n; ++i) {
    term = beta(term);
    sum += term;
  }
  return sum;
}

double compose_along_trace(const Trace& trace, double delta, std::span<const DiscrepancyFn> betas) {
  if (delta < 0) throw DomainError("compose_along_trace needs delta >= 0");
  double r = delta;
  for (ActionId id : trace) {
    if (id >= betas.size()) throw ConfigError("trace references unknown action index " + std::to_string(id));
    r = betas[id](r);
  }
  return r;
}

std::vector<DiscrepancyFn> action_discrepancies(const TransitionSystem& system, int decimals) {
  std::vector<DiscrepancyFn> out;
  out.reserve(system.action_count());
  for (const auto& a : system.actions()) out.push_back(linear_discrepancy(a.matrix, system.norm(), decimals));
  return out;
}

}  // namespace apor
