#pragma once

// Brute-force ground truth for small instances: exhaustive enumeration,
// swap-closure classes, random valid executions and soundness audits.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apor/discrepancy.hpp"
#include "apor/independence.hpp"
#include "apor/lts.hpp"
#include "apor/reach.hpp"

namespace apor {

inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

using ExecutionVisitor = std::function<void(const Trace&, const std::vector<State>&)>;

/// Depth-first over point-enabled actions from q0; calls visit once per valid
/// execution of length `horizon`. Returns how many were visited. Throws
/// BudgetExceeded once more than `node_budget` nodes have been expanded.
std::size_t for_each_execution(const TransitionSystem& system, const State& q0, std::size_t horizon,
                               const ExecutionVisitor& visit, std::size_t node_budget = kDefaultNodeBudget);

std::vector<PotentialExecution> enumerate_executions(const TransitionSystem& system, const State& q0,
                                                     std::size_t horizon,
                                                     std::size_t node_budget = kDefaultNodeBudget);

std::size_t count_executions(const TransitionSystem& system, const State& q0, std::size_t horizon,
                             std::size_t node_budget = kDefaultNodeBudget);

/// Every trace reachable from `trace` by swapping adjacent independent
/// actions, sorted. Throws DomainError when the trace is longer than `cap`.
std::vector<Trace> swap_closure(const Trace& trace, const IndependenceTable& table, std::size_t cap = 8);

struct Sample {
  PotentialExecution execution;
  /// True when no action was enabled before the horizon; the execution stops
  /// at the dead state.
  bool dead = false;
};

/// Uniform start in the initial set, uniform choice among point-enabled
/// actions. Sample i uses a generator seeded from (seed, i), so results do
/// not depend on the worker count.
std::vector<Sample> random_valid_executions(const TransitionSystem& system, std::size_t horizon, std::size_t count,
                                            std::uint64_t seed, std::size_t workers = 1);

/// Uniform point of the initial set's continuous region.
State sample_initial(const InitialSet& initial, Norm norm, std::uint64_t seed);

inline constexpr double kSlackTolerance = -1e-9;

struct StepAudit {
  std::size_t samples = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::optional<Trace> worst_trace;
};

struct SoundnessReport {
  std::vector<StepAudit> steps;
  std::size_t sample_count = 0;
  std::size_t dead_samples = 0;

  std::size_t violations() const;
  double min_slack() const;
  bool passed() const { return violations() == 0; }
  std::string to_text(const TransitionSystem& system) const;
};

/// Each sampled state at step t must lie in some stored R_t ball (slack >=
/// tolerance). Without full history only the last step is audited.
SoundnessReport validate_soundness(const ReachResult& result, std::span<const Sample> samples,
                                   double tolerance = kSlackTolerance);

/// Multiplies every stored radius; used to check that the audit notices.
void scale_radii(ReachResult& result, double factor);

struct TedAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
};

/// Checks the ted of `trace` against every related potential execution: each
/// start in `starts` (all within delta0 of q0, same discrete part) followed
/// by each member of the trace's swap closure. `radius_factor` scales the
/// ted before comparing.
TedAudit audit_ted(const TransitionSystem& system, std::span<const DiscrepancyFn> betas,
                   const IndependenceTable& table, const State& q0, const Trace& trace, double delta0,
                   std::span<const Vector> starts, double radius_factor = 1.0);

}  // namespace apor
