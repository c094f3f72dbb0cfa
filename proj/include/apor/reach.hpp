#pragma once

// Bounded-horizon reach-set over-approximation with approximate partial order
// reduction: one representative trace per epsilon-equivalence class, each
// bloated by its trace-equivalent discrepancy factor.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apor/discrepancy.hpp"
#include "apor/independence.hpp"
#include "apor/lts.hpp"

namespace apor {

/// Centres whose delta0-balls cover the initial set. Throws DomainError for
/// delta0 <= 0.
std::vector<State> delta_cover(const InitialSet& initial, double delta0, Norm norm);

/// Actions whose guard intersects the ball (existential semantics).
std::vector<ActionId> enabled_actions_ball(const Ball& ball, const TransitionSystem& system);

/// Actions enabled at a single state.
std::vector<ActionId> enabled_actions(const State& q, const TransitionSystem& system);

struct ReachTuple {
  Trace trace;
  State state;
  double radius = 0.0;
};

using ReachTable = std::vector<ReachTuple>;

/// Product of per-step branching factors, kept factorised so that counts far
/// beyond 2^64 can still be printed as e.g. "81^10".
class NominalCount {
 public:
  void multiply(std::uint64_t factor);
  /// nullopt when the product does not fit in 64 bits.
  std::optional<std::uint64_t> value() const;
  std::string expression() const;
  std::string to_string() const;
  double log10() const;

 private:
  std::map<std::uint64_t, unsigned> factors_;
};

struct CoverResult {
  State center;
  /// R_0 .. R_T. Tables before the last one are emptied unless full history
  /// was requested; table_sizes always records every step.
  std::vector<ReachTable> tables;
  std::vector<std::size_t> table_sizes;
  bool budget_exhausted = false;
};

struct ReachParams {
  std::size_t horizon = 0;
  double delta0 = 1.0;
  /// 0 = one worker per hardware thread.
  std::size_t workers = 1;
  /// Upper bound on the number of tuples created across all covers.
  std::size_t tuple_budget = 50'000'000;
  bool full_history = true;
};

struct ReachResult {
  std::vector<CoverResult> covers;
  std::size_t horizon = 0;
  double delta0 = 0.0;
  double epsilon = 0.0;
  std::size_t dimension = 0;
  Norm norm = Norm::L2;
  /// Per step, per coordinate envelope over every ball of every cover.
  std::vector<Vector> lower;
  std::vector<Vector> upper;
  NominalCount nominal;
  double wall_ms = 0.0;

  /// False when tables before R_T were dropped.
  bool history_kept = true;

  bool partial() const;
  /// Sum over covers of |R_T|.
  std::size_t explored_traces() const;
  /// Sum over covers and steps of |R_t|.
  std::size_t total_tuples() const;
};

/// Runs the reduced exploration from every cover centre. Epsilon is the
/// table's. Deterministic: tuple order depends only on the inputs.
ReachResult reach(const TransitionSystem& system, std::span<const DiscrepancyFn> betas,
                  const IndependenceTable& table, const ReachParams& params);

/// (lower, upper) of one coordinate at each step.
std::vector<std::pair<double, double>> reach_bounds(const ReachResult& result, std::size_t coordinate);

/// Union of closed polyhedra, each a conjunction of half-spaces.
struct SafetyQuery {
  std::vector<std::vector<HalfSpace>> unsafe;
  std::size_t first_step = 0;
  std::optional<std::size_t> last_step;

  /// Unsafe set = complement of the box lower <= x <= upper (boundary included).
  static SafetyQuery outside_box(const Vector& lower, const Vector& upper);
};

enum class Verdict { Safe, Unknown };

struct SafetyResult {
  Verdict verdict = Verdict::Safe;
  std::optional<std::size_t> step;
  std::optional<std::size_t> cover;
  std::optional<Trace> trace;
};

std::string to_string(Verdict v);

/// True if every half-space of the polyhedron meets the ball.
bool ball_meets_polyhedron(const Vector& center, double radius, const std::vector<HalfSpace>& polyhedron,
                           Norm norm);

/// Safe iff no stored ball meets an unsafe polyhedron within the step window.
/// Needs full history when the window reaches before the last step.
SafetyResult check_safety(const ReachResult& result, const SafetyQuery& query);

}  // namespace apor
