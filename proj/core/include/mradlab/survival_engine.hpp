#pragma once

#include <cstdint>
#include <map>

#include "mradlab/hazard_models.hpp"

namespace mradlab {

// Individuals reaching base_age per calendar year (the yearly n_t counts).
struct ExposurePlan {
  double base_age = 110.0;
  std::map<int, std::uint64_t> per_year_count;
  int horizon_years = 1;

  // One person reaching base_age in `year`.
  static ExposurePlan single_individual(double base_age = 110.0, int year = 0);
  // `count` people per year for `years` consecutive years from first_year.
  static ExposurePlan uniform(double base_age, int first_year, int years,
                              std::uint64_t count);

  std::uint64_t total() const;
  // Throws InvalidArgument for a non-finite base age or horizon < 1.
  void validate() const;
};

// P(one individual alive at base_age survives to target_age).
double individual_exceedance(const HazardModel& model, double base_age,
                             double target_age);

// P(at least one individual in the plan survives to target_age), assuming
// independent lifetimes. Accumulated as -expm1(sum count * log1p(-p)).
double cohort_exceedance(const HazardModel& model, const ExposurePlan& plan,
                         double target_age);

// Expected years until a year's cohort of yearly_count people produces a
// survivor to target_age: 1 / p_year, +inf when p_year == 0.
double expected_waiting_time(const HazardModel& model,
                             std::uint64_t yearly_count, double target_age,
                             double base_age = 110.0);

// H_n. Direct summation up to 1e6 terms, asymptotic expansion beyond.
double harmonic_number(std::uint64_t n);

// Mean of the largest of n iid exponential excesses over base:
// base + mean_excess * H_n.
double max_exponential_mean(std::uint64_t n, double mean_excess,
                            double base = 110.0);

// (1 - exp(-(age - base) / mean_excess))^n for age >= base.
double max_exponential_cdf(std::uint64_t n, double mean_excess, double age,
                           double base = 110.0);

}  // namespace mradlab
