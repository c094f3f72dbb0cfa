#pragma once

// Text, CSV and SVG emitters for reach results.

#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "apor/independence.hpp"
#include "apor/models.hpp"
#include "apor/oracle.hpp"
#include "apor/reach.hpp"

namespace apor {

/// step,coord,lower,upper
void write_bounds_csv(std::ostream& out, const ReachResult& result);

/// a,b,bound,independent for every unordered pair.
void write_independence_csv(std::ostream& out, const TransitionSystem& system, const IndependenceTable& table);

/// Largest |R_T| over covers.
std::size_t explored_per_cover(const ReachResult& result);

/// |A|^T as a power expression.
std::string alphabet_bound(std::size_t actions, std::size_t horizon);

/// Deterministic summary: no timings.
std::string format_report(const ModelPreset& model, const ReachResult& result,
                          const std::optional<SafetyResult>& safety);

/// One panel per coordinate: the envelope as two polylines, plus optional
/// sampled executions in grey.
std::string render_svg(const ReachResult& result, std::span<const Sample> samples = {});

}  // namespace apor
