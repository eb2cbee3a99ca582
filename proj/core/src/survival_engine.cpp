#include "mradlab/survival_engine.hpp"

#include <cmath>
#include <limits>

#include "mradlab/errors.hpp"

namespace mradlab {

ExposurePlan ExposurePlan::single_individual(double base_age, int year) {
  return uniform(base_age, year, 1, 1);
}

ExposurePlan ExposurePlan::uniform(double base_age, int first_year, int years,
                                   std::uint64_t count) {
  if (years < 1) throw InvalidArgument("plan needs at least one year");
  ExposurePlan plan;
  plan.base_age = base_age;
  plan.horizon_years = years;
  for (int y = 0; y < years; ++y) plan.per_year_count[first_year + y] = count;
  return plan;
}

std::uint64_t ExposurePlan::total() const {
  std::uint64_t n = 0;
  for (const auto& [year, count] : per_year_count) n += count;
  return n;
}

void ExposurePlan::validate() const {
  if (!(base_age >= 0.0) || !std::isfinite(base_age)) {
    throw InvalidArgument("plan base_age must be finite and >= 0");
  }
  if (horizon_years < 1) {
    throw InvalidArgument("plan horizon_years must be >= 1");
  }
}

double individual_exceedance(const HazardModel& model, double base_age,
                             double target_age) {
  return cumulative_survival(model, base_age, target_age);
}

double cohort_exceedance(const HazardModel& model, const ExposurePlan& plan,
                         double target_age) {
  plan.validate();
  if (!(target_age >= plan.base_age)) {
    throw InvalidArgument("target age is below the plan's base age");
  }
  // Every cohort enters at the same base age and the model does not depend on
  // calendar time, so all cohorts share one individual probability.
  const double p = individual_exceedance(model, plan.base_age, target_age);
  if (p == 0.0) return 0.0;
  double log_none = 0.0;
  for (const auto& [year, count] : plan.per_year_count) {
    if (count == 0) continue;
    if (p == 1.0) return 1.0;
    log_none += static_cast<double>(count) * std::log1p(-p);
  }
  return -std::expm1(log_none);
}

double expected_waiting_time(const HazardModel& model,
                             std::uint64_t yearly_count, double target_age,
                             double base_age) {
  if (yearly_count < 1) throw InvalidArgument("yearly_count must be >= 1");
  const auto plan = ExposurePlan::uniform(base_age, 0, 1, yearly_count);
  const double p_year = cohort_exceedance(model, plan, target_age);
  if (p_year == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / p_year;
}

double harmonic_number(std::uint64_t n) {
  constexpr std::uint64_t kDirectLimit = 1'000'000;
  if (n <= kDirectLimit) {
    // Smallest terms first.
    double sum = 0.0;
    for (std::uint64_t i = n; i >= 1; --i) sum += 1.0 / static_cast<double>(i);
    return sum;
  }
  constexpr double kEulerGamma = 0.57721566490153286061;
  const double x = static_cast<double>(n);
  return std::log(x) + kEulerGamma + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
}

double max_exponential_mean(std::uint64_t n, double mean_excess, double base) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(mean_excess > 0.0) || !std::isfinite(mean_excess)) {
    throw InvalidArgument("mean_excess must be finite and > 0");
  }
  return base + mean_excess * harmonic_number(n);
}

double max_exponential_cdf(std::uint64_t n, double mean_excess, double age,
                           double base) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(mean_excess > 0.0) || !std::isfinite(mean_excess)) {
    throw InvalidArgument("mean_excess must be finite and > 0");
  }
  if (!(age >= base)) throw InvalidArgument("age is below the base age");
  const double single = -std::expm1(-(age - base) / mean_excess);
  return std::pow(single, static_cast<double>(n));
}

}  // namespace mradlab
