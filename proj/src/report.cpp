#include "apor/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace apor {

void write_bounds_csv(std::ostream& out, const ReachResult& result) {
  out << "step,coord,lower,upper\n";
  out << std::setprecision(10);
  for (std::size_t t = 0; t < result.lower.size(); ++t) {
    for (Eigen::Index i = 0; i < result.lower[t].size(); ++i) {
      out << t << "," << i << "," << result.lower[t][i] << "," << result.upper[t][i] << "\n";
    }
  }
}

void write_independence_csv(std::ostream& out, const TransitionSystem& system, const IndependenceTable& table) {
  out << "a,b,bound,independent\n";
  out << std::setprecision(6);
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t b = a + 1; b < table.size(); ++b) {
      const auto ia = static_cast<ActionId>(a), ib = static_cast<ActionId>(b);
      const auto bound = table.bound(ia, ib);
      out << system.action(ia).name << "," << system.action(ib).name << ",";
      if (bound) {
        out << *bound;
      } else {
        out << "dependent";
      }
      out << "," << (table.independent(ia, ib) ? "yes" : "no") << "\n";
    }
  }
}

std::size_t explored_per_cover(const ReachResult& result) {
  std::size_t m = 0;
  for (const auto& c : result.covers) m = std::max(m, c.table_sizes.empty() ? 0 : c.table_sizes.back());
  return m;
}

std::string alphabet_bound(std::size_t actions, std::size_t horizon) {
  if (horizon == 0 || actions <= 1) return "1";
  return std::to_string(actions) + (horizon > 1 ? "^" + std::to_string(horizon) : "");
}

std::string format_report(const ModelPreset& model, const ReachResult& result,
                          const std::optional<SafetyResult>& safety) {
  std::ostringstream os;
  os << std::setprecision(6);
  const auto& sys = model.system;
  os << "model " << model.name << "\n";
  os << "dimension " << result.dimension << "\n";
  os << "actions " << sys.action_count() << "\n";
  os << "norm " << to_string(result.norm) << "\n";
  os << "delta0 " << result.delta0 << "\n";
  os << "epsilon " << result.epsilon << "\n";
  os << "horizon " << result.horizon << "\n";
  os << "covers " << result.covers.size() << "\n";
  const std::size_t per_cover = explored_per_cover(result);
  os << "explored_traces " << result.explored_traces() << "\n";
  os << "explored_per_cover " << per_cover << "\n";
  os << "total_tuples " << result.total_tuples() << "\n";
  os << "nominal_per_state " << result.nominal.to_string() << "\n";
  os << "alphabet_bound " << alphabet_bound(sys.action_count(), result.horizon) << "\n";
  if (per_cover > 0) {
    const double log_ratio = result.nominal.log10() - std::log10(static_cast<double>(per_cover));
    if (log_ratio < 15) {
      os << "reduction_factor " << std::pow(10.0, log_ratio) << "\n";
    } else {
      os << "reduction_factor 1e" << std::fixed << std::setprecision(1) << log_ratio << std::defaultfloat
         << std::setprecision(6) << "\n";
    }
  }
  if (!result.lower.empty()) {
    double max_radius = 0.0;
    for (const auto& c : result.covers) {
      if (c.tables.empty()) continue;
      for (const auto& t : c.tables.back()) max_radius = std::max(max_radius, t.radius);
    }
    os << "final_max_radius " << max_radius << "\n";
    os << "final_lower";
    for (Eigen::Index i = 0; i < result.lower.back().size(); ++i) os << " " << result.lower.back()[i];
    os << "\nfinal_upper";
    for (Eigen::Index i = 0; i < result.upper.back().size(); ++i) os << " " << result.upper.back()[i];
    os << "\n";
  }
  os << "status " << (result.partial() ? "PARTIAL (tuple budget exhausted)" : "complete") << "\n";
  if (safety) {
    os << "safety " << to_string(safety->verdict);
    if (safety->step) {
      os << " step " << *safety->step << " cover " << *safety->cover << " trace [" << sys.trace_string(*safety->trace)
         << "]";
    }
    os << "\n";
  }
  for (const auto& a : model.assumptions) os << "assumption " << a << "\n";
  return os.str();
}

namespace {

constexpr double kPanelW = 480, kPanelH = 220, kMargin = 40;

}  // namespace

std::string render_svg(const ReachResult& result, std::span<const Sample> samples) {
  const auto dim = static_cast<Eigen::Index>(result.dimension);
  const std::size_t steps = result.lower.size();
  std::ostringstream os;
  os << std::setprecision(6);
  const double width = kPanelW + 2 * kMargin;
  const double height = static_cast<double>(dim) * (kPanelH + kMargin) + kMargin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < dim; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t t = 0; t < steps; ++t) {
      lo = std::min(lo, result.lower[t][i]);
      hi = std::max(hi, result.upper[t][i]);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double top = kMargin + static_cast<double>(i) * (kPanelH + kMargin);
    auto px = [&](double t) { return kMargin + (steps > 1 ? t / static_cast<double>(steps - 1) : 0.5) * kPanelW; };
    auto py = [&](double v) { return top + (hi - v) / (hi - lo) * kPanelH; };
    os << "<rect x=\"" << kMargin << "\" y=\"" << top << "\" width=\"" << kPanelW << "\" height=\"" << kPanelH
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kMargin << "\" y=\"" << top - 6 << "\" font-size=\"12\">x[" << i << "] in [" << lo
       << ", " << hi << "]</text>\n";
    for (const auto& s : samples) {
      os << "<polyline fill=\"none\" stroke=\"#999\" stroke-width=\"0.5\" points=\"";
      for (std::size_t t = 0; t < s.execution.states.size() && t < steps; ++t)
        os << px(static_cast<double>(t)) << "," << py(s.execution.states[t].continuous[i]) << " ";
      os << "\"/>\n";
    }
    for (bool upper : {true, false}) {
      os << "<polyline fill=\"none\" stroke=\"" << (upper ? "blue" : "red") << "\" points=\"";
      for (std::size_t t = 0; t < steps; ++t)
        os << px(static_cast<double>(t)) << "," << py(upper ? result.upper[t][i] : result.lower[t][i]) << " ";
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace apor
