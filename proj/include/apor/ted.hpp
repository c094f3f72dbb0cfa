#pragma once

// Trace-equivalent discrepancy factors (ted): a radius around an anchor
// execution's last state that contains the last states of every execution
// starting delta0-close and following an epsilon-equivalent trace.

#include <span>

#include "apor/discrepancy.hpp"
#include "apor/independence.hpp"

namespace apor {

/// Extends a ted `r` for trace `trace` to a ted for `trace` followed by `a`.
/// The epsilon used is the table's.
double comp_ted(const Trace& trace, ActionId a, double r, std::span<const DiscrepancyFn> betas,
                const IndependenceTable& table);

/// Same update with beta_max over trace.a supplied by the caller, for callers
/// that maintain it incrementally.
double comp_ted(const Trace& trace, ActionId a, double r, const DiscrepancyFn& beta_a,
                const DiscrepancyFn& beta_max_with_a, const IndependenceTable& table);

/// Folds comp_ted over the prefixes of `trace`, starting from delta0.
double ted_for_trace(const Trace& trace, double delta0, std::span<const DiscrepancyFn> betas,
                     const IndependenceTable& table);

}  // namespace apor
