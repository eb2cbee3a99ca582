#pragma once

#include <cstdint>
#include <span>

namespace mradlab::stats {

// Upper-tail probabilities of the reference distributions used by the tests.
double chi_squared_sf(double x, double dof);
double fisher_f_sf(double x, double dof1, double dof2);
// Two-sided p-value for a t statistic.
double student_t_two_sided(double t, double dof);
double normal_quantile(double p);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion at confidence 1 - alpha.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double alpha = 0.05);

double mean(std::span<const double> x);

}  // namespace mradlab::stats
