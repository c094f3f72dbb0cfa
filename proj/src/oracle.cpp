#include "apor/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "apor/errors.hpp"
#include "apor/ted.hpp"

namespace apor {

std::size_t for_each_execution(const TransitionSystem& system, const State& q0, std::size_t horizon,
                               const ExecutionVisitor& visit, std::size_t node_budget) {
  Trace trace;
  std::vector<State> states{q0};
  std::size_t nodes = 0;
  std::size_t found = 0;
  // Explicit stack of pending enabled-action lists, one per depth.
  std::vector<std::vector<ActionId>> pending;
  std::vector<std::size_t> cursor;
  if (horizon == 0) {
    visit(trace, states);
    return 1;
  }
  pending.push_back(enabled_actions(q0, system));
  cursor.push_back(0);
  while (!pending.empty()) {
    auto& pos = cursor.back();
    if (pos == pending.back().size()) {
      pending.pop_back();
      cursor.pop_back();
      if (!trace.empty()) {
        trace.pop_back();
        states.pop_back();
      }
      continue;
    }
    const ActionId a = pending.back()[pos++];
    if (++nodes > node_budget) {
      throw BudgetExceeded("enumeration exceeded " + std::to_string(node_budget) + " nodes");
    }
    trace.push_back(a);
    states.push_back(apply_action(system.action(a), states.back()));
    if (trace.size() == horizon) {
      visit(trace, states);
      ++found;
      trace.pop_back();
      states.pop_back();
      continue;
    }
    pending.push_back(enabled_actions(states.back(), system));
    cursor.push_back(0);
  }
  return found;
}

std::vector<PotentialExecution> enumerate_executions(const TransitionSystem& system, const State& q0,
                                                     std::size_t horizon, std::size_t node_budget) {
  std::vector<PotentialExecution> out;
  for_each_execution(
      system, q0, horizon, [&](const Trace& t, const std::vector<State>& s) { out.push_back({t, s}); },
      node_budget);
  return out;
}

std::size_t count_executions(const TransitionSystem& system, const State& q0, std::size_t horizon,
                             std::size_t node_budget) {
  return for_each_execution(system, q0, horizon, [](const Trace&, const std::vector<State>&) {}, node_budget);
}

std::vector<Trace> swap_closure(const Trace& trace, const IndependenceTable& table, std::size_t cap) {
  if (trace.size() > cap) {
    throw DomainError("swap_closure: trace length " + std::to_string(trace.size()) + " exceeds cap " +
                      std::to_string(cap));
  }
  std::set<Trace> seen{trace};
  std::deque<Trace> queue{trace};
  while (!queue.empty()) {
    Trace t = std::move(queue.front());
    queue.pop_front();
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (t[i] == t[i + 1] || !table.independent(t[i], t[i + 1])) continue;
      Trace s = t;
      std::swap(s[i], s[i + 1]);
      if (seen.insert(s).second) queue.push_back(std::move(s));
    }
  }
  return {seen.begin(), seen.end()};
}

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

State draw_initial(const InitialSet& initial, Norm norm, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector lo, hi;
  if (const auto* box = std::get_if<Box>(&initial.region)) {
    lo = box->lower;
    hi = box->upper;
  } else {
    const auto& ball = std::get<BallRegion>(initial.region);
    if (norm == Norm::Linf) {
      lo = ball.center.array() - ball.radius;
      hi = ball.center.array() + ball.radius;
    } else {
      const auto d = ball.center.size();
      std::normal_distribution<double> gauss;
      Vector dir(d);
      for (Eigen::Index i = 0; i < d; ++i) dir[i] = gauss(rng);
      const double n = dir.norm();
      if (n == 0.0) return {initial.discrete, ball.center};
      const double r = ball.radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
      return {initial.discrete, ball.center + dir * (r / n)};
    }
  }
  Vector x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
  return {initial.discrete, x};
}

Sample one_sample(const TransitionSystem& system, std::size_t horizon, std::mt19937_64& rng) {
  Sample s;
  s.execution.states.push_back(draw_initial(system.initial(), system.norm(), rng));
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto enabled = enabled_actions(s.execution.states.back(), system);
    if (enabled.empty()) {
      s.dead = true;
      break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
    const ActionId a = enabled[pick(rng)];
    s.execution.trace.push_back(a);
    s.execution.states.push_back(apply_action(system.action(a), s.execution.states.back()));
  }
  return s;
}

}  // namespace

State sample_initial(const InitialSet& initial, Norm norm, std::uint64_t seed) {
  auto rng = derived_rng(seed, 0);
  return draw_initial(initial, norm, rng);
}

std::vector<Sample> random_valid_executions(const TransitionSystem& system, std::size_t horizon, std::size_t count,
                                            std::uint64_t seed, std::size_t workers) {
  if (count == 0) throw DomainError("need at least one sample");
  std::vector<Sample> out(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      auto rng = derived_rng(seed, i);
      out[i] = one_sample(system, horizon, rng);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, count);
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  return out;
}

std::size_t SoundnessReport::violations() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.violations;
  return n;
}

double SoundnessReport::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) m = std::min(m, s.min_slack);
  return m;
}

std::string SoundnessReport::to_text(const TransitionSystem& system) const {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "samples " << sample_count << "\n";
  os << "dead_samples " << dead_samples << "\n";
  os << "violations " << violations() << "\n";
  os << "min_slack " << min_slack() << "\n";
  os << "verdict " << (passed() ? "PASS" : "FAIL") << "\n";
  os << "step,samples,min_slack,violations,worst_trace\n";
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& s = steps[t];
    if (s.samples == 0) continue;
    os << t << "," << s.samples << "," << s.min_slack << "," << s.violations << ","
       << (s.worst_trace ? system.trace_string(*s.worst_trace) : "") << "\n";
  }
  return os.str();
}

SoundnessReport validate_soundness(const ReachResult& result, std::span<const Sample> samples, double tolerance) {
  SoundnessReport report;
  report.steps.resize(result.horizon + 1);
  report.sample_count = samples.size();
  for (const auto& sample : samples) {
    if (sample.dead) ++report.dead_samples;
    const auto& states = sample.execution.states;
    for (std::size_t t = 0; t < states.size() && t <= result.horizon; ++t) {
      if (!result.history_kept && t != result.horizon) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& cover : result.covers) {
        if (t >= cover.tables.size()) continue;
        for (const auto& tuple : cover.tables[t]) {
          best = std::max(best, ball_distance_slack(Ball{tuple.state, tuple.radius}, states[t], result.norm));
        }
      }
      auto& step = report.steps[t];
      ++step.samples;
      step.min_slack = std::min(step.min_slack, best);
      if (best < tolerance) {
        ++step.violations;
        if (best < step.worst_slack) {
          step.worst_slack = best;
          step.worst_trace = Trace(sample.execution.trace.begin(), sample.execution.trace.begin() + t);
        }
      }
    }
  }
  return report;
}

void scale_radii(ReachResult& result, double factor) {
  for (auto& cover : result.covers) {
    for (auto& table : cover.tables) {
      for (auto& tuple : table) tuple.radius *= factor;
    }
  }
}

TedAudit audit_ted(const TransitionSystem& system, std::span<const DiscrepancyFn> betas,
                   const IndependenceTable& table, const State& q0, const Trace& trace, double delta0,
                   std::span<const Vector> starts, double radius_factor) {
  TedAudit audit;
  const double radius = radius_factor * ted_for_trace(trace, delta0, betas, table);
  const State anchor = simulate(system, q0, trace).lstate();
  const auto related = swap_closure(trace, table, std::max<std::size_t>(8, trace.size()));
  for (const auto& x : starts) {
    const State start{q0.discrete, x};
    for (const auto& other : related) {
      const State last = simulate(system, start, other).lstate();
      const double slack = ball_distance_slack(Ball{anchor, radius}, last, system.norm());
      ++audit.checked;
      audit.min_slack = std::min(audit.min_slack, slack);
      if (slack < kSlackTolerance) ++audit.violations;
    }
  }
  return audit;
}

}  // namespace apor
