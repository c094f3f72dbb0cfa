#include "apor/ted.hpp"

#include <algorithm>
#include <string>

#include "apor/errors.hpp"

namespace apor {

double comp_ted(const Trace& trace, ActionId a, double r, const DiscrepancyFn& beta_a,
                const DiscrepancyFn& beta_max_with_a, const IndependenceTable& table) {
  if (!(r >= 0)) throw DomainError("comp_ted needs r >= 0");
  const double eps = table.epsilon();
  const std::size_t t = trace.size();
  const std::size_t k = eep(trace, a, table);
  if (k > t) throw std::logic_error("eep exceeded trace length");
  if (k == t) return beta_a(r);
  return beta_a(r) + gamma(static_cast<int>(t - k - 1), eps, beta_max_with_a);
}

double comp_ted(const Trace& trace, ActionId a, double r, std::span<const DiscrepancyFn> betas,
                const IndependenceTable& table) {
  if (a >= betas.size()) throw ConfigError("comp_ted: unknown action index " + std::to_string(a));
  std::vector<DiscrepancyFn> members{betas[a]};
  std::vector<char> seen(betas.size(), 0);
  seen[a] = 1;
  for (ActionId id : trace) {
    if (id >= betas.size()) throw ConfigError("comp_ted: unknown action index " + std::to_string(id));
    if (!seen[id]) {
      seen[id] = 1;
      members.push_back(betas[id]);
    }
  }
  return comp_ted(trace, a, r, betas[a], beta_max(members), table);
}

double ted_for_trace(const Trace& trace, double delta0, std::span<const DiscrepancyFn> betas,
                     const IndependenceTable& table) {
  if (!(delta0 >= 0)) throw DomainError("ted_for_trace needs delta0 >= 0");
  double r = delta0;
  Trace prefix;
  prefix.reserve(trace.size());
  for (ActionId a : trace) {
    r = comp_ted(prefix, a, r, betas, table);
    prefix.push_back(a);
  }
  return r;
}

}  // namespace apor
