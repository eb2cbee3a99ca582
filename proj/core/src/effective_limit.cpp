#include "mradlab/effective_limit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mradlab/errors.hpp"
#include "mradlab/parallel.hpp"

namespace mradlab {

EffectiveLimitResult solve_effective_limit(const HazardModel& model,
                                           const ExposurePlan& plan,
                                           double epsilon,
                                           const SolverOptions& options) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1)");
  }
  plan.validate();
  auto exceedance = [&](double age) {
    return cohort_exceedance(model, plan, age);
  };

  EffectiveLimitResult result;
  result.epsilon = epsilon;
  result.exposure = plan;

  const double base = plan.base_age;
  const double at_base = exceedance(base);
  if (at_base <= epsilon) {
    result.limit_age = base;
    result.limit_age_ceil = static_cast<int>(std::ceil(base));
    result.achieved_probability = at_base;
    result.at_base_age = true;
    return result;
  }

  // Survival to the endpoint itself is positive, anything past it is zero.
  if (const auto end = model.endpoint(); end && *end >= base) {
    const double at_end = exceedance(*end);
    if (at_end > epsilon) {
      result.limit_age = *end;
      result.limit_age_ceil = static_cast<int>(std::ceil(*end));
      result.achieved_probability = 0.0;
      result.exact_endpoint = true;
      return result;
    }
  }

  // Grow an upper bracket.
  double lo = base;
  double step = 1.0;
  double hi = base + step;
  while (exceedance(hi) > epsilon) {
    lo = hi;
    step *= 2.0;
    hi = base + step;
    if (hi > options.max_age) {
      throw ConvergenceError(
          "exceedance stays above epsilon up to age " +
          std::to_string(options.max_age) +
          " (the model's survival does not vanish)");
    }
  }

  int iterations = 0;
  while (hi - lo > options.tolerance) {
    if (++iterations > options.max_iterations) {
      throw ConvergenceError("bisection did not reach the age tolerance");
    }
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (exceedance(mid) > epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  result.limit_age = hi;
  result.limit_age_ceil = static_cast<int>(std::ceil(hi));
  result.achieved_probability = exceedance(hi);
  result.iterations = iterations;
  result.bracket = hi - lo;
  return result;
}

double epsilon_at_age(const HazardModel& model, const ExposurePlan& plan,
                      double age) {
  return cohort_exceedance(model, plan, age);
}

std::vector<LimitProfileRow> limit_profile(const HazardModel& model,
                                           const ExposurePlan& plan,
                                           std::span<const double> epsilons,
                                           const SolverOptions& options,
                                           std::size_t threads) {
  if (epsilons.empty()) {
    throw InvalidArgument("limit profile needs at least one epsilon");
  }
  std::vector<double> sorted(epsilons.begin(), epsilons.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<LimitProfileRow> rows(sorted.size());
  parallel_for(sorted.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      rows[i].epsilon = sorted[i];
      rows[i].result = solve_effective_limit(model, plan, sorted[i], options);
    }
  });
  return rows;
}

}  // namespace mradlab
