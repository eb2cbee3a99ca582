#pragma once

#include <span>
#include <vector>

#include "mradlab/survival_engine.hpp"

namespace mradlab {

// The effective limit L_e at threshold epsilon: the smallest age A such that
// the probability that anyone in the exposure plan survives to A is at most
// epsilon.
struct EffectiveLimitResult {
  double epsilon = 0.0;
  double limit_age = 0.0;
  int limit_age_ceil = 0;
  ExposurePlan exposure;
  double achieved_probability = 0.0;
  int iterations = 0;
  double bracket = 0.0;
  // epsilon already met at the base age; limit_age == base_age.
  bool at_base_age = false;
  // The exceedance jumps over epsilon at a hard endpoint L; limit_age == L and
  // achieved_probability is the right limit (0).
  bool exact_endpoint = false;
};

struct SolverOptions {
  double tolerance = 1e-6;  // final bracket width, years
  int max_iterations = 200;
  double max_age = 5000.0;  // give up searching for an upper bracket here
};

// Bisection on the non-increasing map A -> cohort_exceedance(model, plan, A).
// Throws InvalidArgument for epsilon outside (0, 1) and ConvergenceError when
// the exceedance never drops to epsilon below options.max_age.
EffectiveLimitResult solve_effective_limit(const HazardModel& model,
                                           const ExposurePlan& plan,
                                           double epsilon,
                                           const SolverOptions& options = {});

// Inverse query: the exceedance probability at `age`.
double epsilon_at_age(const HazardModel& model, const ExposurePlan& plan,
                      double age);

struct LimitProfileRow {
  double epsilon = 0.0;
  EffectiveLimitResult result;
};

// One solve per epsilon, rows sorted by descending epsilon. Rows are solved
// concurrently (threads = 0 uses default_thread_count()).
std::vector<LimitProfileRow> limit_profile(const HazardModel& model,
                                           const ExposurePlan& plan,
                                           std::span<const double> epsilons,
                                           const SolverOptions& options = {},
                                           std::size_t threads = 0);

}  // namespace mradlab
