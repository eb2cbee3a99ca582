#include "mradlab/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mradlab/errors.hpp"

namespace mradlab::stats {

double chi_squared_sf(double x, double dof) {
  if (std::isnan(x)) return 1.0;
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(dof), x));
}

double fisher_f_sf(double x, double dof1, double dof2) {
  if (std::isnan(x) || x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::fisher_f(dof1, dof2), x));
}

double student_t_two_sided(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double tail = boost::math::cdf(
      boost::math::complement(boost::math::students_t(dof), std::fabs(t)));
  return std::min(1.0, 2.0 * tail);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double alpha) {
  if (trials == 0) throw InvalidArgument("Wilson interval needs trials > 0");
  if (successes > trials) {
    throw InvalidArgument("successes exceed trials");
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  Interval ci{centre - half, centre + half};
  if (successes == 0) ci.low = 0.0;
  if (successes == trials) ci.high = 1.0;
  ci.low = std::max(0.0, std::min(ci.low, p));
  ci.high = std::min(1.0, std::max(ci.high, p));
  return ci;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

}  // namespace mradlab::stats
