#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mradlab/effective_limit.hpp"
#include "mradlab/simulation.hpp"
#include "mradlab/tail_inference.hpp"
#include "mradlab/trend_analysis.hpp"

namespace mradlab {

// Compact JSON for every result type. Doubles are written with round-trip
// precision; non-finite values become null.
std::string to_json(const ExposurePlan& plan);
std::string to_json(const EffectiveLimitResult& result);
std::string to_json(std::span<const LimitProfileRow> rows);
std::string to_json(const TailFit& fit);
std::string to_json(const TestResult& result);
std::string to_json(const SegmentedFit& fit);
std::string to_json(const LinearFit& fit);
std::string to_json(const Correlation& result);
std::string to_json(const ExceedanceEstimate& estimate);
std::string to_json(std::span<const std::optional<HazardEstimate>> rows);

// Inverses of to_json. Throw DataError on malformed input.
template <typename T>
T from_json(std::string_view json);

// {"tool_version", "command", "inputs_hash", "result"}, pretty-printed.
// result_json must itself be valid JSON.
std::string make_envelope(std::string_view command,
                          std::string_view inputs_hash,
                          std::string_view result_json);

}  // namespace mradlab
