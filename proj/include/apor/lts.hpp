#pragma once

// Labeled transition systems with affine actions: states, guards, actions,
// and simulation of potential and valid executions.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace apor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Vector norm used for every distance, induced-norm and dual-norm computation
/// of a system.
enum class Norm { L2, Linf };

double vector_norm(const Vector& v, Norm norm);
/// Norm of the dual space (L2 -> L2, Linf -> L1); used to measure how far a
/// half-space boundary is from a point.
double dual_norm(const Vector& v, Norm norm);
std::string to_string(Norm norm);
Norm parse_norm(std::string_view text);

struct DiscreteVar {
  std::string name;
  int min = 0;
  int max = 1;
};

/// Valuation of the finite-valued variables, indexed by declaration order.
class DiscreteState {
 public:
  DiscreteState() = default;
  explicit DiscreteState(std::vector<int> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  const std::vector<int>& values() const { return values_; }

  DiscreteState with(std::size_t var, int value) const;

  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
  friend auto operator<=>(const DiscreteState&, const DiscreteState&) = default;

 private:
  std::vector<int> values_;
};

struct DiscreteStateHash {
  std::size_t operator()(const DiscreteState& s) const noexcept;
};

struct State {
  DiscreteState discrete;
  Vector continuous;
};

/// Closed half-space normal . x <= bound.
struct HalfSpace {
  Vector normal;
  double bound = 0.0;
};

struct DiscreteConstraint {
  std::size_t var = 0;
  int value = 0;
};

/// Conjunction of discrete equalities and closed half-spaces. An empty guard
/// holds everywhere.
struct Guard {
  std::vector<DiscreteConstraint> discrete;
  std::vector<HalfSpace> halfspaces;
};

/// Offset base + coupling * v, where v is the *updated* discrete valuation
/// (after the action's own discrete update). coupling may have zero columns.
struct AffineOffset {
  Vector base;
  Matrix coupling;
};

/// Offset looked up by the source discrete valuation.
struct TableOffset {
  std::map<DiscreteState, Vector> entries;
};

using Offset = std::variant<AffineOffset, TableOffset>;

struct Assignment {
  std::size_t var = 0;
  int value = 0;
};

/// Deterministic action x -> A x + b(l), l -> update(l). The discrete update
/// reads only the discrete part.
struct AffineAction {
  std::string name;
  Guard guard;
  Matrix matrix;
  Offset offset;
  std::vector<Assignment> update;

  DiscreteState next_discrete(const DiscreteState& l) const;
  /// Throws ConfigError when a table offset has no entry for l.
  Vector offset_at(const DiscreteState& l) const;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct BallRegion {
  Vector center;
  double radius = 0.0;
};

using ContinuousRegion = std::variant<Box, BallRegion>;

/// Initial set: one discrete valuation paired with a compact continuous set.
struct InitialSet {
  DiscreteState discrete;
  ContinuousRegion region;

  bool contains(const State& q, Norm norm, double tolerance = 0.0) const;
};

using ActionId = std::uint32_t;
using Trace = std::vector<ActionId>;

class TransitionSystem {
 public:
  TransitionSystem(std::size_t dimension, std::vector<DiscreteVar> discrete_vars,
                   std::vector<AffineAction> actions, InitialSet initial,
                   std::optional<double> invariant_radius = std::nullopt,
                   Norm norm = Norm::L2);

  std::size_t dimension() const { return dimension_; }
  const std::vector<DiscreteVar>& discrete_vars() const { return discrete_vars_; }
  const std::vector<AffineAction>& actions() const { return actions_; }
  const AffineAction& action(ActionId id) const { return actions_.at(id); }
  std::size_t action_count() const { return actions_.size(); }
  const InitialSet& initial() const { return initial_; }
  std::optional<double> invariant_radius() const { return invariant_radius_; }
  Norm norm() const { return norm_; }

  /// Throws ConfigError for unknown names.
  ActionId action_id(std::string_view name) const;
  std::size_t discrete_var_index(std::string_view name) const;
  Trace parse_trace(const std::vector<std::string>& names) const;
  std::string trace_string(const Trace& trace) const;

  /// Every valuation of the declared discrete domain, in lexicographic order.
  std::vector<DiscreteState> discrete_domain() const;

 private:
  std::size_t dimension_;
  std::vector<DiscreteVar> discrete_vars_;
  std::vector<AffineAction> actions_;
  InitialSet initial_;
  std::optional<double> invariant_radius_;
  Norm norm_;
};

/// q0, a_0, q1, ... with q_{i+1} = a_i(q_i) regardless of guards.
struct PotentialExecution {
  Trace trace;
  std::vector<State> states;

  const State& fstate() const { return states.front(); }
  const State& lstate() const { return states.back(); }
  std::size_t length() const { return trace.size(); }
};

State apply_action(const AffineAction& a, const State& q);
bool is_enabled(const AffineAction& a, const State& q);
PotentialExecution simulate(const TransitionSystem& system, const State& q0, const Trace& trace);
bool is_valid_execution(const TransitionSystem& system, const PotentialExecution& execution);

/// Closed ball B_radius(center): equal discrete part and continuous distance
/// at most radius.
struct Ball {
  State center;
  double radius = 0.0;
};

/// radius - |center.X - q.X| when the discrete parts agree, -infinity otherwise.
double ball_distance_slack(const Ball& ball, const State& q, Norm norm);
bool ball_contains(const Ball& ball, const State& q, Norm norm);

}  // namespace apor
