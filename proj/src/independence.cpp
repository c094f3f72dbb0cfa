#include "apor/independence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apor/discrepancy.hpp"
#include "apor/errors.hpp"

namespace apor {

IndependenceTable::IndependenceTable(std::size_t action_count, std::vector<std::optional<double>> bounds,
                                     double epsilon)
    : n_(action_count), epsilon_(epsilon), bounds_(std::move(bounds)), independent_(n_ * n_, 0) {
  if (bounds_.size() != n_ * n_) throw DomainError("independence table size mismatch");
  if (!(epsilon >= 0)) throw DomainError("epsilon must be non-negative");
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) {
      const auto& v = bounds_[a * n_ + b];
      independent_[a * n_ + b] = (a != b && v && *v <= epsilon_) ? 1 : 0;
    }
  }
}

IndependenceTable IndependenceTable::at_epsilon(double epsilon) const {
  return IndependenceTable(n_, bounds_, epsilon);
}

std::optional<double> commutation_bound(const TransitionSystem& system, ActionId a_id, ActionId b_id) {
  if (a_id == b_id) return std::nullopt;
  const auto& a = system.action(a_id);
  const auto& b = system.action(b_id);
  const Norm norm = system.norm();

  double offset_term = 0.0;
  for (const auto& l : system.discrete_domain()) {
    const auto la = a.next_discrete(l);
    const auto lb = b.next_discrete(l);
    if (b.next_discrete(la) != a.next_discrete(lb)) return std::nullopt;
    // a then b minus b then a, with x = 0.
    const Vector diff = b.matrix * a.offset_at(l) + b.offset_at(la) - a.matrix * b.offset_at(l) - a.offset_at(lb);
    offset_term = std::max(offset_term, vector_norm(diff, norm));
  }

  const Matrix commutator = b.matrix * a.matrix - a.matrix * b.matrix;
  if (commutator.cwiseAbs().maxCoeff() == 0.0) return offset_term;
  const auto r_inv = system.invariant_radius();
  if (!r_inv) {
    throw ConfigError("actions '" + a.name + "' and '" + b.name +
                      "' have non-commuting matrices; an invariant radius is required");
  }
  return offset_term + induced_norm(commutator, norm) * *r_inv;
}

IndependenceTable build_independence_table(const TransitionSystem& system, double epsilon) {
  if (!(epsilon >= 0)) throw DomainError("epsilon must be non-negative");
  const std::size_t n = system.action_count();
  std::vector<std::optional<double>> bounds(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto v = commutation_bound(system, static_cast<ActionId>(a), static_cast<ActionId>(b));
      bounds[a * n + b] = v;
      bounds[b * n + a] = v;
    }
  }
  return IndependenceTable(n, std::move(bounds), epsilon);
}

InvariantCertificate certify_invariant_radius(const TransitionSystem& system) {
  const auto r_inv = system.invariant_radius();
  if (!r_inv) return {false, "no invariant radius declared"};
  for (const auto& a : system.actions()) {
    const auto* affine = std::get_if<AffineOffset>(&a.offset);
    const bool zero_offset = affine && affine->base.cwiseAbs().maxCoeff() == 0.0 &&
                             (affine->coupling.size() == 0 || affine->coupling.cwiseAbs().maxCoeff() == 0.0);
    if (!zero_offset) return {false, "action '" + a.name + "' has a non-zero offset"};
    const double n = induced_norm(a.matrix, system.norm());
    if (n > 1.0) return {false, "action '" + a.name + "' expands the norm (" + std::to_string(n) + ")"};
  }
  const Norm norm = system.norm();
  double sup = 0.0;
  if (const auto* box = std::get_if<Box>(&system.initial().region)) {
    Vector corner = box->lower.cwiseAbs().cwiseMax(box->upper.cwiseAbs());
    sup = vector_norm(corner, norm);
  } else {
    const auto& ball = std::get<BallRegion>(system.initial().region);
    sup = vector_norm(ball.center, norm) + ball.radius;
  }
  if (sup > *r_inv) {
    return {false, "initial set reaches norm " + std::to_string(sup) + " > invariant radius " + std::to_string(*r_inv)};
  }
  return {true, "all actions linear and non-expanding; initial set within radius"};
}

std::size_t eep(const Trace& trace, ActionId a, const IndependenceTable& table) {
  if (a >= table.size()) throw ConfigError("eep: unknown action index " + std::to_string(a));
  // Distinct members of phi.a; membership is all that matters for the test.
  thread_local std::vector<ActionId> kept;
  kept.assign(1, a);
  std::size_t length = 0;
  for (std::size_t t = trace.size(); t-- > 0;) {
    const ActionId c = trace[t];
    const bool blocked = std::any_of(kept.begin(), kept.end(), [&](ActionId b) { return !table.independent(c, b); });
    if (blocked) {
      ++length;
      if (std::find(kept.begin(), kept.end(), c) == kept.end()) kept.push_back(c);
    }
  }
  return length;
}

namespace {

std::vector<std::size_t> histogram(const Trace& t, std::size_t n) {
  std::vector<std::size_t> h(n, 0);
  for (ActionId id : t) {
    if (id >= n) throw ConfigError("trace references unknown action index " + std::to_string(id));
    ++h[id];
  }
  return h;
}

}  // namespace

bool trace_equivalent(const Trace& lhs, const Trace& rhs, const IndependenceTable& table) {
  if (lhs.size() != rhs.size()) return false;
  const std::size_t n = table.size();
  const auto h1 = histogram(lhs, n);
  if (h1 != histogram(rhs, n)) return false;

  std::vector<ActionId> present;
  for (std::size_t i = 0; i < n; ++i) {
    if (h1[i]) present.push_back(static_cast<ActionId>(i));
  }
  Trace p1, p2;
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) {
      const ActionId x = present[i], y = present[j];
      if (table.independent(x, y)) continue;
      p1.clear();
      p2.clear();
      for (ActionId c : lhs) {
        if (c == x || c == y) p1.push_back(c);
      }
      for (ActionId c : rhs) {
        if (c == x || c == y) p2.push_back(c);
      }
      if (p1 != p2) return false;
    }
  }
  return true;
}

Trace canonical_key(const Trace& trace, const IndependenceTable& table) {
  // Smallest-letter-first topological sort of the dependence order between
  // positions; equal letters are always ordered.
  const std::size_t n = trace.size();
  thread_local std::vector<std::uint32_t> blockers;
  thread_local std::vector<char> done;
  blockers.assign(n, 0);
  done.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (trace[i] == trace[j] || !table.independent(trace[i], trace[j])) ++blockers[j];
    }
  }
  Trace key;
  key.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && blockers[i] == 0 && (best == n || trace[i] < trace[best])) best = i;
    }
    done[best] = 1;
    key.push_back(trace[best]);
    for (std::size_t j = best + 1; j < n; ++j) {
      if (!done[j] && (trace[best] == trace[j] || !table.independent(trace[best], trace[j]))) --blockers[j];
    }
  }
  return key;
}

FoataKey foata_extend(const FoataKey& key, ActionId a, const IndependenceTable& table) {
  FoataKey out;
  foata_extend_into(key, a, table, out);
  return out;
}

void foata_extend_into(const FoataKey& key, ActionId a, const IndependenceTable& table, FoataKey& out) {
  std::uint64_t level = 0;
  for (std::uint64_t e : key) {
    const auto b = static_cast<ActionId>(e & 0xffffffffULL);
    if (b == a || !table.independent(a, b)) level = std::max(level, (e >> 32) + 1);
  }
  const std::uint64_t entry = (level << 32) | a;
  const auto pos = std::upper_bound(key.begin(), key.end(), entry);
  out.assign(key.begin(), pos);
  out.push_back(entry);
  out.insert(out.end(), pos, key.end());
}

FoataKey foata_key(const Trace& trace, const IndependenceTable& table) {
  FoataKey key;
  for (ActionId a : trace) key = foata_extend(key, a, table);
  return key;
}

std::size_t FoataKeyHash::operator()(const FoataKey& k) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (std::uint64_t e : k) {
    h ^= e;
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t TraceHash::operator()(const Trace& t) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (ActionId id : t) {
    h ^= id;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace apor
