#include "apor/lts.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "apor/errors.hpp"

namespace apor {

double vector_norm(const Vector& v, Norm norm) {
  switch (norm) {
    case Norm::L2:
      return v.norm();
    case Norm::Linf:
      return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  }
  return v.norm();
}

double dual_norm(const Vector& v, Norm norm) {
  switch (norm) {
    case Norm::L2:
      return v.norm();
    case Norm::Linf:
      return v.cwiseAbs().sum();
  }
  return v.norm();
}

std::string to_string(Norm norm) { return norm == Norm::L2 ? "2" : "inf"; }

Norm parse_norm(std::string_view text) {
  if (text == "2" || text == "l2" || text == "L2") return Norm::L2;
  if (text == "inf" || text == "linf" || text == "Linf") return Norm::Linf;
  throw ConfigError("unknown norm '" + std::string(text) + "' (expected 2 or inf)");
}

DiscreteState DiscreteState::with(std::size_t var, int value) const {
  auto values = values_;
  values.at(var) = value;
  return DiscreteState(std::move(values));
}

std::size_t DiscreteStateHash::operator()(const DiscreteState& s) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int v : s.values()) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

DiscreteState AffineAction::next_discrete(const DiscreteState& l) const {
  auto values = l.values();
  for (const auto& asg : update) values.at(asg.var) = asg.value;
  return DiscreteState(std::move(values));
}

Vector AffineAction::offset_at(const DiscreteState& l) const {
  if (const auto* affine = std::get_if<AffineOffset>(&offset)) {
    if (affine->coupling.cols() == 0) return affine->base;
    const auto next = next_discrete(l);
    Vector v(static_cast<Eigen::Index>(next.size()));
    for (std::size_t i = 0; i < next.size(); ++i) v[static_cast<Eigen::Index>(i)] = next[i];
    return affine->base + affine->coupling * v;
  }
  const auto& table = std::get<TableOffset>(offset);
  auto it = table.entries.find(l);
  if (it == table.entries.end()) {
    std::ostringstream os;
    os << "action '" << name << "': offset table has no entry for discrete valuation [";
    for (std::size_t i = 0; i < l.size(); ++i) os << (i ? "," : "") << l[i];
    os << "]";
    throw ConfigError(os.str());
  }
  return it->second;
}

bool InitialSet::contains(const State& q, Norm norm, double tolerance) const {
  if (q.discrete != discrete) return false;
  if (const auto* box = std::get_if<Box>(&region)) {
    for (Eigen::Index i = 0; i < q.continuous.size(); ++i) {
      if (q.continuous[i] < box->lower[i] - tolerance || q.continuous[i] > box->upper[i] + tolerance)
        return false;
    }
    return true;
  }
  const auto& ball = std::get<BallRegion>(region);
  return vector_norm(q.continuous - ball.center, norm) <= ball.radius + tolerance;
}

namespace {

void check_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw ConfigError(what + " has non-finite entries");
}

}  // namespace

TransitionSystem::TransitionSystem(std::size_t dimension, std::vector<DiscreteVar> discrete_vars,
                                   std::vector<AffineAction> actions, InitialSet initial,
                                   std::optional<double> invariant_radius, Norm norm)
    : dimension_(dimension),
      discrete_vars_(std::move(discrete_vars)),
      actions_(std::move(actions)),
      initial_(std::move(initial)),
      invariant_radius_(invariant_radius),
      norm_(norm) {
  const auto n = static_cast<Eigen::Index>(dimension_);
  const auto nvars = discrete_vars_.size();
  if (actions_.empty()) throw ConfigError("system declares no actions");

  std::set<std::string> names;
  for (const auto& var : discrete_vars_) {
    if (var.min > var.max) throw ConfigError("discrete variable '" + var.name + "' has an empty domain");
    if (!names.insert(var.name).second) throw ConfigError("duplicate discrete variable '" + var.name + "'");
  }
  names.clear();
  auto check_value = [&](std::size_t var, int value, const std::string& where) {
    if (var >= nvars) throw ConfigError(where + ": discrete variable index out of range");
    const auto& decl = discrete_vars_[var];
    if (value < decl.min || value > decl.max)
      throw ConfigError(where + ": value " + std::to_string(value) + " outside domain of '" + decl.name + "'");
  };

  for (const auto& a : actions_) {
    const std::string where = "action '" + a.name + "'";
    if (!names.insert(a.name).second) throw ConfigError("duplicate action name '" + a.name + "'");
    if (a.matrix.rows() != n || a.matrix.cols() != n)
      throw ConfigError(where + ": matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    check_finite(a.matrix, where + " matrix");
    if (const auto* affine = std::get_if<AffineOffset>(&a.offset)) {
      if (affine->base.size() != n) throw ConfigError(where + ": offset dimension mismatch");
      check_finite(affine->base, where + " offset");
      if (affine->coupling.cols() != 0 &&
          (affine->coupling.rows() != n || affine->coupling.cols() != static_cast<Eigen::Index>(nvars)))
        throw ConfigError(where + ": offset coupling must be dimension x discrete-variable-count");
      check_finite(affine->coupling, where + " offset coupling");
    } else {
      for (const auto& [l, v] : std::get<TableOffset>(a.offset).entries) {
        if (l.size() != nvars) throw ConfigError(where + ": offset table key has wrong arity");
        if (v.size() != n) throw ConfigError(where + ": offset table vector dimension mismatch");
        check_finite(v, where + " offset table");
      }
    }
    for (const auto& c : a.guard.discrete) check_value(c.var, c.value, where + " guard");
    for (const auto& h : a.guard.halfspaces) {
      if (h.normal.size() != n) throw ConfigError(where + ": guard half-space dimension mismatch");
      if (!h.normal.allFinite() || !std::isfinite(h.bound)) throw ConfigError(where + ": non-finite guard");
    }
    for (const auto& asg : a.update) check_value(asg.var, asg.value, where + " update");
  }

  if (initial_.discrete.size() != nvars) throw ConfigError("initial discrete valuation has wrong arity");
  for (std::size_t i = 0; i < nvars; ++i) check_value(i, initial_.discrete[i], "initial set");
  if (const auto* box = std::get_if<Box>(&initial_.region)) {
    if (box->lower.size() != n || box->upper.size() != n) throw ConfigError("initial box dimension mismatch");
    if (!box->lower.allFinite() || !box->upper.allFinite()) throw ConfigError("initial box must be bounded");
    if ((box->upper - box->lower).minCoeff() < 0) throw ConfigError("initial box has lower > upper");
  } else {
    const auto& ball = std::get<BallRegion>(initial_.region);
    if (ball.center.size() != n) throw ConfigError("initial ball dimension mismatch");
    if (!ball.center.allFinite() || !std::isfinite(ball.radius) || ball.radius < 0)
      throw ConfigError("initial ball must have a finite centre and non-negative radius");
  }
  if (invariant_radius_ && (!std::isfinite(*invariant_radius_) || *invariant_radius_ < 0))
    throw ConfigError("invariant radius must be finite and non-negative");
}

ActionId TransitionSystem::action_id(std::string_view name) const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i].name == name) return static_cast<ActionId>(i);
  }
  throw ConfigError("unknown action '" + std::string(name) + "'");
}

std::size_t TransitionSystem::discrete_var_index(std::string_view name) const {
  for (std::size_t i = 0; i < discrete_vars_.size(); ++i) {
    if (discrete_vars_[i].name == name) return i;
  }
  throw ConfigError("unknown discrete variable '" + std::string(name) + "'");
}

Trace TransitionSystem::parse_trace(const std::vector<std::string>& names) const {
  Trace trace;
  trace.reserve(names.size());
  for (const auto& name : names) trace.push_back(action_id(name));
  return trace;
}

std::string TransitionSystem::trace_string(const Trace& trace) const {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ' ';
    out += actions_.at(trace[i]).name;
  }
  return out;
}

std::vector<DiscreteState> TransitionSystem::discrete_domain() const {
  std::vector<DiscreteState> out;
  std::vector<int> values;
  values.reserve(discrete_vars_.size());
  for (const auto& v : discrete_vars_) values.push_back(v.min);
  while (true) {
    out.emplace_back(values);
    std::size_t i = discrete_vars_.size();
    while (i > 0) {
      --i;
      if (values[i] < discrete_vars_[i].max) {
        ++values[i];
        break;
      }
      values[i] = discrete_vars_[i].min;
      if (i == 0) return out;
    }
    if (discrete_vars_.empty()) return out;
  }
}

State apply_action(const AffineAction& a, const State& q) {
  State next;
  next.discrete = a.next_discrete(q.discrete);
  next.continuous.noalias() = a.matrix * q.continuous;
  if (const auto* affine = std::get_if<AffineOffset>(&a.offset)) {
    next.continuous += affine->base;
    if (affine->coupling.cols() > 0) {
      const auto& v = next.discrete.values();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0) next.continuous += affine->coupling.col(static_cast<Eigen::Index>(i)) * v[i];
      }
    }
  } else {
    next.continuous += a.offset_at(q.discrete);
  }
  return next;
}

bool is_enabled(const AffineAction& a, const State& q) {
  for (const auto& c : a.guard.discrete) {
    if (q.discrete[c.var] != c.value) return false;
  }
  for (const auto& h : a.guard.halfspaces) {
    if (h.normal.dot(q.continuous) > h.bound) return false;
  }
  return true;
}

PotentialExecution simulate(const TransitionSystem& system, const State& q0, const Trace& trace) {
  PotentialExecution xi;
  xi.trace = trace;
  xi.states.reserve(trace.size() + 1);
  xi.states.push_back(q0);
  for (ActionId id : trace) xi.states.push_back(apply_action(system.action(id), xi.states.back()));
  return xi;
}

bool is_valid_execution(const TransitionSystem& system, const PotentialExecution& execution) {
  if (!system.initial().contains(execution.fstate(), system.norm())) return false;
  for (std::size_t i = 0; i < execution.trace.size(); ++i) {
    if (!is_enabled(system.action(execution.trace[i]), execution.states[i])) return false;
  }
  return true;
}

double ball_distance_slack(const Ball& ball, const State& q, Norm norm) {
  if (ball.center.discrete != q.discrete) return -std::numeric_limits<double>::infinity();
  return ball.radius - vector_norm(ball.center.continuous - q.continuous, norm);
}

bool ball_contains(const Ball& ball, const State& q, Norm norm) {
  return ball_distance_slack(ball, q, norm) >= 0.0;
}

}  // namespace apor
