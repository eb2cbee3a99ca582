#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mradlab {

// Outcome of one headline check.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;              // measured values against the target
  std::vector<std::string> notes;  // informational lines, never affect pass
  double seconds = 0.0;
};

struct ReproOptions {
  std::uint64_t seed = 20170706;
  std::size_t threads = 0;  // 0 = default_thread_count()
  // Criteria to run (1..10); empty runs all.
  std::vector<int> only;
};

// Runs the headline-number suite. Every stochastic check draws from Philox
// streams keyed by options.seed, so a given seed always yields the same table.
std::vector<CriterionResult> run_acceptance(const ReproOptions& options = {});

// "PASS  2  Effective limit headline  (detail)" followed by indented notes.
std::string format_result(const CriterionResult& result);

}  // namespace mradlab
