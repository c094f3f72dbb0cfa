#pragma once

// Approximate (epsilon) independence of affine actions and the induced
// equivalence on traces.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apor/lts.hpp"

namespace apor {

/// Symmetric matrix of state-independent commutation bounds. An empty entry
/// means the pair is DEPENDENT (discrete effects do not commute, or it is a
/// diagonal entry). Pairs whose bound is at most epsilon are independent.
class IndependenceTable {
 public:
  IndependenceTable() = default;
  IndependenceTable(std::size_t action_count, std::vector<std::optional<double>> bounds, double epsilon);

  std::size_t size() const { return n_; }
  double epsilon() const { return epsilon_; }
  std::optional<double> bound(ActionId a, ActionId b) const { return bounds_[a * n_ + b]; }
  bool independent(ActionId a, ActionId b) const { return independent_[a * n_ + b] != 0; }

  /// Same bounds, different threshold.
  IndependenceTable at_epsilon(double epsilon) const;

 private:
  std::size_t n_ = 0;
  double epsilon_ = 0.0;
  std::vector<std::optional<double>> bounds_;
  std::vector<char> independent_;
};

/// Upper bound on |ab(q).X - ba(q).X| over every discrete valuation and every
/// continuous state within the system's invariant radius, or nullopt when the
/// discrete updates do not commute for some valuation. Throws ConfigError if
/// the matrices do not commute and the system declares no invariant radius.
std::optional<double> commutation_bound(const TransitionSystem& system, ActionId a, ActionId b);

IndependenceTable build_independence_table(const TransitionSystem& system, double epsilon);

/// Result of checking the "stable linear system" certificate for the declared
/// invariant radius: every action is linear (zero offset), non-expanding under
/// the system norm, and the initial set lies inside the radius.
struct InvariantCertificate {
  bool certified = false;
  std::string reason;
};

InvariantCertificate certify_invariant_radius(const TransitionSystem& system);

/// Earliest equivalent position of `a` on `trace` (length of the retained
/// prefix built right-to-left). O(len^2).
std::size_t eep(const Trace& trace, ActionId a, const IndependenceTable& table);

/// True iff `rhs` is reachable from `lhs` by swapping adjacent independent
/// actions. Uses the dependent-pair projection test.
bool trace_equivalent(const Trace& lhs, const Trace& rhs, const IndependenceTable& table);

/// Lexicographically least member (by action index) of the trace's
/// equivalence class. Equal keys <=> equivalent traces.
Trace canonical_key(const Trace& trace, const IndependenceTable& table);

/// Foata normal form as sorted (level << 32 | action) entries, where an
/// action's level is one more than the highest level of an earlier dependent
/// (or equal) action. Equal keys <=> equivalent traces.
using FoataKey = std::vector<std::uint64_t>;

FoataKey foata_key(const Trace& trace, const IndependenceTable& table);

/// Key of trace.a from the key of trace, in O(len).
FoataKey foata_extend(const FoataKey& key, ActionId a, const IndependenceTable& table);
/// Same, writing into `out` (which must not alias `key`).
void foata_extend_into(const FoataKey& key, ActionId a, const IndependenceTable& table, FoataKey& out);

struct FoataKeyHash {
  std::size_t operator()(const FoataKey& k) const noexcept;
};

struct TraceHash {
  std::size_t operator()(const Trace& t) const noexcept;
};

}  // namespace apor
