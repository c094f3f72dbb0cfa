#pragma once

// Discrepancy functions: per-action bounds on how far an action can push two
// states with the same discrete part apart, plus the derived beta_max / gamma
// series.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apor/lts.hpp"

namespace apor {

/// Non-negative, non-decreasing beta with beta(v) -> 0 as v -> 0.
/// The linear kind beta(v) = c v is what every built-in model uses; the
/// general kind accepts any monotone callable.
class DiscrepancyFn {
 public:
  DiscrepancyFn() = default;

  static DiscrepancyFn linear(double coefficient);
  static DiscrepancyFn general(std::function<double(double)> fn);

  double operator()(double v) const;

  bool is_linear() const { return !fn_; }
  /// Only meaningful for the linear kind.
  double coefficient() const { return coefficient_; }

 private:
  double coefficient_ = 0.0;
  std::function<double(double)> fn_;
};

/// Largest singular value of a square matrix.
double induced_2norm(const Matrix& a);
/// Operator norm of `a` induced by the given vector norm.
double induced_norm(const Matrix& a, Norm norm);

/// Rounds `value` up to `decimals` places; decimals < 0 leaves it unchanged.
/// Values within 1e-12 (relative) above a grid point snap to that point, so
/// floating-point noise on exact values such as 1.0 does not bump them.
double round_up(double value, int decimals);

/// beta(v) = |A| v under the given norm, optionally rounded up to `decimals`.
DiscrepancyFn linear_discrepancy(const Matrix& a, Norm norm, int decimals = -1);

/// Pointwise maximum. Throws DomainError on an empty set.
DiscrepancyFn beta_max(std::span<const DiscrepancyFn> betas);

/// gamma_n(eps) = sum_{i=0..n} beta_max^i(eps).
double gamma(int n, double eps, const DiscrepancyFn& beta_max);

/// beta_{a_T}( ... beta_{a_0}(delta)).
double compose_along_trace(const Trace& trace, double delta, std::span<const DiscrepancyFn> betas);

/// One linear discrepancy per action, under the system norm.
std::vector<DiscrepancyFn> action_discrepancies(const TransitionSystem& system, int decimals = -1);

}  // namespace apor
