#include "apor/reach.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "apor/errors.hpp"
#include "apor/ted.hpp"

namespace apor {

namespace {

/// Centres along one axis: a single midpoint when the interval fits in one
/// cell, else evenly spaced from lower+h to upper-h with gaps at most 2h.
std::vector<double> axis_centres(double lower, double upper, double half_cell) {
  const double width = upper - lower;
  if (width <= 2.0 * half_cell) return {0.5 * (lower + upper)};
  const auto count = static_cast<std::size_t>(std::ceil(width / (2.0 * half_cell)));
  std::vector<double> out(count);
  const double first = lower + half_cell;
  const double last = upper - half_cell;
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? first : first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<Vector> grid_cover(const Vector& lower, const Vector& upper, double delta0, Norm norm) {
  const auto dim = lower.size();
  Eigen::Index spread = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (upper[i] > lower[i]) ++spread;
  }
  const double half_cell =
      norm == Norm::L2 && spread > 0 ? delta0 / std::sqrt(static_cast<double>(spread)) : delta0;

  std::vector<std::vector<double>> axes;
  axes.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) axes.push_back(axis_centres(lower[i], upper[i], half_cell));

  std::vector<Vector> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Vector c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) c[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    out.push_back(std::move(c));
    Eigen::Index i = dim;
    bool done = true;
    while (i > 0) {
      --i;
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k < axes[static_cast<std::size_t>(i)].size()) {
        done = false;
        break;
      }
      k = 0;
    }
    if (done) return out;
  }
}

}  // namespace

std::vector<State> delta_cover(const InitialSet& initial, double delta0, Norm norm) {
  if (!(delta0 > 0)) throw DomainError("delta0 must be positive");
  std::vector<State> out;
  if (const auto* box = std::get_if<Box>(&initial.region)) {
    for (auto& c : grid_cover(box->lower, box->upper, delta0, norm)) out.push_back({initial.discrete, std::move(c)});
    return out;
  }
  const auto& ball = std::get<BallRegion>(initial.region);
  if (ball.radius <= delta0) {
    out.push_back({initial.discrete, ball.center});
    return out;
  }
  const Vector lo = ball.center.array() - ball.radius;
  const Vector hi = ball.center.array() + ball.radius;
  for (auto& c : grid_cover(lo, hi, delta0, norm)) {
    // A cell whose ball misses the initial ball contributes nothing.
    if (vector_norm(c - ball.center, norm) > ball.radius + delta0) continue;
    out.push_back({initial.discrete, std::move(c)});
  }
  return out;
}

namespace {

void enabled_actions_ball_into(const Ball& ball, const TransitionSystem& system, std::vector<ActionId>& out) {
  out.clear();
  const Norm norm = system.norm();
  for (std::size_t i = 0; i < system.action_count(); ++i) {
    const auto& guard = system.action(static_cast<ActionId>(i)).guard;
    bool ok = std::all_of(guard.discrete.begin(), guard.discrete.end(),
                          [&](const DiscreteConstraint& c) { return ball.center.discrete[c.var] == c.value; });
    ok = ok && ball_meets_polyhedron(ball.center.continuous, ball.radius, guard.halfspaces, norm);
    if (ok) out.push_back(static_cast<ActionId>(i));
  }
}

}  // namespace

std::vector<ActionId> enabled_actions_ball(const Ball& ball, const TransitionSystem& system) {
  std::vector<ActionId> out;
  enabled_actions_ball_into(ball, system, out);
  return out;
}

std::vector<ActionId> enabled_actions(const State& q, const TransitionSystem& system) {
  std::vector<ActionId> out;
  for (std::size_t i = 0; i < system.action_count(); ++i) {
    if (is_enabled(system.action(static_cast<ActionId>(i)), q)) out.push_back(static_cast<ActionId>(i));
  }
  return out;
}

void NominalCount::multiply(std::uint64_t factor) { ++factors_[factor]; }

std::optional<std::uint64_t> NominalCount::value() const {
  std::uint64_t v = 1;
  for (const auto& [base, exp] : factors_) {
    if (base == 0) return 0;
    for (unsigned i = 0; i < exp; ++i) {
      if (v > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
      v *= base;
    }
  }
  return v;
}

std::string NominalCount::expression() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [base, exp] : factors_) {
    if (base == 1) continue;
    if (!first) os << "*";
    first = false;
    os << base;
    if (exp > 1) os << "^" << exp;
  }
  if (first) os << (factors_.count(0) ? "0" : "1");
  return os.str();
}

std::string NominalCount::to_string() const {
  const auto v = value();
  const auto expr = expression();
  if (!v) return expr;
  const auto plain = std::to_string(*v);
  return plain == expr ? plain : plain + " (" + expr + ")";
}

double NominalCount::log10() const {
  double v = 0.0;
  for (const auto& [base, exp] : factors_) v += exp * std::log10(static_cast<double>(base));
  return v;
}

bool ReachResult::partial() const {
  return std::any_of(covers.begin(), covers.end(), [](const CoverResult& c) { return c.budget_exhausted; });
}

std::size_t ReachResult::explored_traces() const {
  std::size_t n = 0;
  for (const auto& c : covers) n += c.table_sizes.empty() ? 0 : c.table_sizes.back();
  return n;
}

std::size_t ReachResult::total_tuples() const {
  std::size_t n = 0;
  for (const auto& c : covers) {
    for (auto s : c.table_sizes) n += s;
  }
  return n;
}

namespace {

struct Envelope {
  std::vector<Vector> lower;
  std::vector<Vector> upper;

  Envelope(std::size_t steps, Eigen::Index dim)
      : lower(steps, Vector::Constant(dim, std::numeric_limits<double>::infinity())),
        upper(steps, Vector::Constant(dim, -std::numeric_limits<double>::infinity())) {}

  void add(std::size_t t, const Vector& c, double r) {
    lower[t] = lower[t].cwiseMin((c.array() - r).matrix());
    upper[t] = upper[t].cwiseMax((c.array() + r).matrix());
  }
};

struct CoverJob {
  const TransitionSystem& system;
  std::span<const DiscrepancyFn> betas;
  const IndependenceTable& table;
  const ReachParams& params;
  std::atomic<std::size_t>& tuples_used;
};

CoverResult explore_cover(const CoverJob& job, const State& center, Envelope& env) {
  const auto& system = job.system;
  CoverResult out;
  out.center = center;
  out.tables.resize(job.params.horizon + 1);
  out.table_sizes.assign(job.params.horizon + 1, 0);

  // Running beta_max over the actions of each stored trace.
  std::vector<DiscrepancyFn> run_max{DiscrepancyFn::linear(0.0)};
  out.tables[0].push_back({Trace{}, center, job.params.delta0});
  out.table_sizes[0] = 1;
  env.add(0, center.continuous, job.params.delta0);
  job.tuples_used.fetch_add(1);

  // Keys of R_t and R_{t+1} live in alternating sets; tuples point at them.
  std::unordered_set<FoataKey, FoataKeyHash> key_sets[2];
  std::vector<const FoataKey*> run_key{&*key_sets[0].insert(FoataKey{}).first};
  FoataKey key;
  std::vector<ActionId> enabled;
  for (std::size_t t = 0; t < job.params.horizon; ++t) {
    auto& current = out.tables[t];
    auto& next_set = key_sets[(t + 1) % 2];
    next_set.clear();
    ReachTable next;
    next.reserve(current.size() * 2);
    std::vector<DiscrepancyFn> next_max;
    std::vector<const FoataKey*> next_key;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const auto& tuple = current[i];
      enabled_actions_ball_into(Ball{tuple.state, tuple.radius}, system, enabled);
      for (ActionId a : enabled) {
        foata_extend_into(*run_key[i], a, job.table, key);
        if (next_set.count(key)) continue;
        next_key.push_back(&*next_set.insert(key).first);
        Trace extended;
        extended.reserve(tuple.trace.size() + 1);
        extended = tuple.trace;
        extended.push_back(a);
        DiscrepancyFn combined;
        if (run_max[i].is_linear() && job.betas[a].is_linear()) {
          combined = DiscrepancyFn::linear(std::max(run_max[i].coefficient(), job.betas[a].coefficient()));
        } else {
          const DiscrepancyFn pair[] = {run_max[i], job.betas[a]};
          combined = beta_max(pair);
        }
        const double radius = comp_ted(tuple.trace, a, tuple.radius, job.betas[a], combined, job.table);
        State q = apply_action(system.action(a), tuple.state);
        env.add(t + 1, q.continuous, radius);
        next.push_back({std::move(extended), std::move(q), radius});
        next_max.push_back(std::move(combined));
        if (job.tuples_used.fetch_add(1) + 1 > job.params.tuple_budget) {
          out.budget_exhausted = true;
        }
      }
      if (out.budget_exhausted) break;
    }
    out.table_sizes[t + 1] = next.size();
    out.tables[t + 1] = std::move(next);
    run_max = std::move(next_max);
    run_key = std::move(next_key);
    if (!job.params.full_history) ReachTable().swap(current);
    if (out.budget_exhausted) break;
  }
  return out;
}

}  // namespace

ReachResult reach(const TransitionSystem& system, std::span<const DiscrepancyFn> betas,
                  const IndependenceTable& table, const ReachParams& params) {
  if (betas.size() != system.action_count()) throw ConfigError("one discrepancy function per action expected");
  if (table.size() != system.action_count()) throw ConfigError("independence table does not match the system");
  if (!(params.delta0 > 0)) throw DomainError("delta0 must be positive");

  const auto start = std::chrono::steady_clock::now();
  ReachResult result;
  result.horizon = params.horizon;
  result.delta0 = params.delta0;
  result.epsilon = table.epsilon();
  result.dimension = system.dimension();
  result.norm = system.norm();
  result.history_kept = params.full_history;

  const auto centres = delta_cover(system.initial(), params.delta0, system.norm());
  const auto dim = static_cast<Eigen::Index>(system.dimension());
  std::vector<CoverResult> covers(centres.size());
  std::vector<Envelope> envelopes(centres.size(), Envelope(params.horizon + 1, dim));
  std::atomic<std::size_t> used{0};
  std::atomic<std::size_t> next_index{0};
  CoverJob job{system, betas, table, params, used};

  auto worker = [&] {
    for (std::size_t i = next_index.fetch_add(1); i < centres.size(); i = next_index.fetch_add(1)) {
      covers[i] = explore_cover(job, centres[i], envelopes[i]);
    }
  };
  std::size_t workers = params.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : params.workers;
  workers = std::min(workers, centres.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  Envelope merged(params.horizon + 1, dim);
  for (const auto& env : envelopes) {
    for (std::size_t t = 0; t <= params.horizon; ++t) {
      merged.lower[t] = merged.lower[t].cwiseMin(env.lower[t]);
      merged.upper[t] = merged.upper[t].cwiseMax(env.upper[t]);
    }
  }
  result.lower = std::move(merged.lower);
  result.upper = std::move(merged.upper);
  result.covers = std::move(covers);

  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  // Branching along the first representative of the first cover (untimed).
  if (!result.covers.empty()) {
    const auto& first = result.covers.front();
    const auto& last = first.tables.back();
    if (!last.empty()) {
      State q = first.center;
      for (ActionId a : last.front().trace) {
        result.nominal.multiply(enabled_actions(q, system).size());
        q = apply_action(system.action(a), q);
      }
    }
  }
  return result;
}

std::vector<std::pair<double, double>> reach_bounds(const ReachResult& result, std::size_t coordinate) {
  if (coordinate >= result.dimension) throw DomainError("coordinate out of range");
  std::vector<std::pair<double, double>> out;
  out.reserve(result.lower.size());
  const auto i = static_cast<Eigen::Index>(coordinate);
  for (std::size_t t = 0; t < result.lower.size(); ++t) out.emplace_back(result.lower[t][i], result.upper[t][i]);
  return out;
}

SafetyQuery SafetyQuery::outside_box(const Vector& lower, const Vector& upper) {
  SafetyQuery q;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    Vector e = Vector::Zero(lower.size());
    e[i] = 1.0;
    if (std::isfinite(lower[i])) q.unsafe.push_back({HalfSpace{e, lower[i]}});
    if (std::isfinite(upper[i])) q.unsafe.push_back({HalfSpace{-e, -upper[i]}});
  }
  return q;
}

std::string to_string(Verdict v) { return v == Verdict::Safe ? "SAFE" : "UNKNOWN"; }

bool ball_meets_polyhedron(const Vector& center, double radius, const std::vector<HalfSpace>& polyhedron,
                           Norm norm) {
  return std::all_of(polyhedron.begin(), polyhedron.end(), [&](const HalfSpace& h) {
    return h.normal.dot(center) - h.bound <= radius * dual_norm(h.normal, norm);
  });
}

SafetyResult check_safety(const ReachResult& result, const SafetyQuery& query) {
  SafetyResult out;
  if (query.unsafe.empty()) return out;
  const std::size_t last = std::min(query.last_step.value_or(result.horizon), result.horizon);
  if (!result.history_kept && query.first_step < result.horizon)
    throw DomainError("safety window needs the full reach history");
  for (std::size_t c = 0; c < result.covers.size(); ++c) {
    const auto& tables = result.covers[c].tables;
    for (std::size_t t = query.first_step; t <= last && t < tables.size(); ++t) {
      for (const auto& tuple : tables[t]) {
        for (const auto& poly : query.unsafe) {
          if (ball_meets_polyhedron(tuple.state.continuous, tuple.radius, poly, result.norm)) {
            out.verdict = Verdict::Unknown;
            out.step = t;
            out.cover = c;
            out.trace = tuple.trace;
            return out;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace apor
