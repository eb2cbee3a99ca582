#include "mradlab/tail_inference.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "mradlab/errors.hpp"

namespace mradlab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Half the 95% chi-square(1) quantile.
constexpr double kProfileDrop = 3.841458820694124 / 2.0;
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

void check_positive(std::span<const double> x) {
  for (double v : x) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("excesses must be finite and strictly positive");
    }
  }
}

void check_entries(std::span<const double> x, std::span<const double> entry) {
  if (entry.size() != x.size()) {
    throw InvalidArgument("truncation vector length differs from sample");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(entry[i] >= 0.0) || !(entry[i] < x[i])) {
      throw InvalidArgument(
          "truncation entries must satisfy 0 <= entry < excess");
    }
  }
}

void check_not_degenerate(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo <= 1e-12 * *hi) {
    throw DataError("all excesses are equal; the GPD fit is degenerate");
  }
}

// Terms shared by the plain and truncated GPD likelihoods.
double gpd_log_density(double x, double shape, double scale) {
  if (shape == 0.0) return -std::log(scale) - x / scale;
  const double z = std::log1p(shape * x / scale);
  return -std::log(scale) - (1.0 + 1.0 / shape) * z;
}

double gpd_log_survival(double x, double shape, double scale) {
  if (shape == 0.0) return -x / scale;
  return -std::log1p(shape * x / scale) / shape;
}

bool gpd_feasible(double x_max, double shape, double scale) {
  return scale > 0.0 && std::isfinite(scale) &&
         (shape >= 0.0 || 1.0 + shape * x_max / scale > 0.0);
}

struct Maximum {
  double arg = 0.0;
  double value = kNegInf;
  int iterations = 0;
};

// Grid scan followed by Brent refinement in the cell around the best point.
template <typename F>
Maximum maximize_on_grid(F&& f, std::vector<double> grid, int max_iter) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::size_t best = 0;
  double best_value = kNegInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  Maximum out{grid[best], best_value, 0};
  if (!std::isfinite(best_value)) return out;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    const auto r = boost::math::tools::brent_find_minima(
        [&](double t) {
          const double v = f(t);
          return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
        },
        lo, hi, kBrentBits, iters);
    out.iterations = static_cast<int>(iters);
    if (-r.second > best_value) {
      out.arg = r.first;
      out.value = -r.second;
    }
  }
  return out;
}

// Log-spaced fractions in (0, 1), dense near both ends.
std::vector<double> unit_fractions(int points) {
  std::vector<double> w;
  for (int i = 0; i < points; ++i) {
    const double f = std::pow(10.0, -10.0 + 10.0 * i / (points - 1.0));
    if (f < 1.0) {
      w.push_back(f);
      w.push_back(1.0 - f);
    }
  }
  w.push_back(0.5);
  return w;
}

// Mean of log1p(theta x): the optimal shape for a fixed theta = shape/scale.
double shape_for_theta(std::span<const double> x, double theta) {
  double s = 0.0;
  for (double v : x) s += std::log1p(theta * v);
  return s / static_cast<double>(x.size());
}

// Profile log-likelihood in theta (theta = 0 is the exponential).
double theta_profile(std::span<const double> x, double mean, double x_max,
                     double theta) {
  const double n = static_cast<double>(x.size());
  if (std::fabs(theta) * x_max < 1e-13) return -n * (std::log(mean) + 1.0);
  if (1.0 + theta * x_max <= 0.0) return kNegInf;
  const double shape = shape_for_theta(x, theta);
  const double ratio = shape / theta;
  if (!(ratio > 0.0)) return kNegInf;
  return -n * (std::log(ratio) + shape + 1.0);
}

// theta with shape_for_theta(theta) == target, shape_for_theta increasing.
double theta_for_shape(std::span<const double> x, double target, double lo,
                       double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi));
       ++i) {
    const double mid = lo + (hi - lo) / 2.0;
    if (shape_for_theta(x, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2.0;
}

// Scale search for a fixed shape. `ll` evaluates the log-likelihood.
template <typename LogLik>
Maximum maximize_scale(double shape, double x_max, double mean, LogLik&& ll,
                       int max_iter) {
  double lo = shape < 0.0 ? -shape * x_max * (1.0 + 1e-12) : 1e-8 * mean;
  lo = std::max(lo, 1e-300);
  const double hi = (lo + mean) * 200.0;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  std::vector<double> grid;
  constexpr int kPoints = 40;
  for (int i = 0; i < kPoints; ++i) {
    grid.push_back(log_lo + (log_hi - log_lo) * i / (kPoints - 1.0));
  }
  // Dense near the lower bound where the optimum sits for short-tailed data.
  for (int i = 1; i <= 12; ++i) grid.push_back(log_lo + std::pow(10.0, -i));
  auto m = maximize_on_grid(
      [&](double log_scale) { return ll(shape, std::exp(log_scale)); },
      std::move(grid), max_iter);
  m.arg = std::exp(m.arg);
  return m;
}

// Bisection for the profile CI bound on one side of the estimate.
template <typename Profile>
double profile_bound(Profile&& profile, double peak, double from, double to) {
  const double target = peak - kProfileDrop;
  if (profile(to) >= target) return to;
  double inside = from;
  double outside = to;
  for (int i = 0; i < 60 && std::fabs(outside - inside) > 1e-7; ++i) {
    const double mid = inside + (outside - inside) / 2.0;
    if (profile(mid) >= target) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return inside + (outside - inside) / 2.0;
}

void finish_gpd(TailFit& fit, double threshold) {
  fit.threshold = threshold;
  fit.kind = TailModelKind::kGpd;
  fit.rate = 0.0;
  if (fit.shape < 0.0) {
    fit.endpoint = threshold + fit.scale / -fit.shape;
  } else {
    fit.endpoint.reset();
  }
}

}  // namespace

std::string_view to_string(TailModelKind kind) {
  return kind == TailModelKind::kExponential ? "exponential" : "gpd";
}

std::vector<double> excesses(std::span<const LifeRecord> records,
                             double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw InvalidArgument("threshold must be finite and > 0");
  }
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.age_at_death > threshold) out.push_back(r.age_at_death - threshold);
  }
  return out;
}

double exponential_log_likelihood(std::span<const double> x, double rate) {
  if (!(rate > 0.0)) return kNegInf;
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  return static_cast<double>(x.size()) * std::log(rate) - rate * sum;
}

double exponential_log_likelihood(std::span<const double> x,
                                  std::span<const double> entry, double rate) {
  check_entries(x, entry);
  if (!(rate > 0.0)) return kNegInf;
  double exposure = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) exposure += x[i] - entry[i];
  return static_cast<double>(x.size()) * std::log(rate) - rate * exposure;
}

double gpd_log_likelihood(std::span<const double> x, double shape,
                          double scale) {
  if (x.empty()) return 0.0;
  const double x_max = *std::max_element(x.begin(), x.end());
  if (!gpd_feasible(x_max, shape, scale)) return kNegInf;
  double ll = 0.0;
  for (double v : x) ll += gpd_log_density(v, shape, scale);
  return ll;
}

double gpd_log_likelihood(std::span<const double> x,
                          std::span<const double> entry, double shape,
                          double scale) {
  check_entries(x, entry);
  if (x.empty()) return 0.0;
  const double x_max = *std::max_element(x.begin(), x.end());
  if (!gpd_feasible(x_max, shape, scale)) return kNegInf;
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ll += gpd_log_density(x[i], shape, scale) -
          gpd_log_survival(entry[i], shape, scale);
  }
  return ll;
}

TailFit fit_exponential(std::span<const double> x, double threshold) {
  if (x.size() < 2) {
    throw InvalidArgument("exponential fit needs at least 2 excesses");
  }
  check_positive(x);
  const double n = static_cast<double>(x.size());
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  TailFit fit;
  fit.threshold = threshold;
  fit.kind = TailModelKind::kExponential;
  fit.rate = n / sum;
  fit.scale = sum / n;
  fit.log_likelihood = n * std::log(fit.rate) - n;
  fit.sample_size = x.size();
  const double half = 1.959963984540054 / std::sqrt(n);
  fit.rate_ci = stats::Interval{fit.rate * std::exp(-half),
                                fit.rate * std::exp(half)};
  return fit;
}

TailFit fit_exponential(std::span<const double> x,
                        std::span<const double> entry, double threshold) {
  if (x.size() < 2) {
    throw InvalidArgument("exponential fit needs at least 2 excesses");
  }
  check_positive(x);
  check_entries(x, entry);
  double exposure = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) exposure += x[i] - entry[i];
  const double n = static_cast<double>(x.size());
  TailFit fit;
  fit.threshold = threshold;
  fit.kind = TailModelKind::kExponential;
  fit.rate = n / exposure;
  fit.scale = exposure / n;
  fit.log_likelihood = exponential_log_likelihood(x, entry, fit.rate);
  fit.sample_size = x.size();
  const double half = 1.959963984540054 / std::sqrt(n);
  fit.rate_ci = stats::Interval{fit.rate * std::exp(-half),
                                fit.rate * std::exp(half)};
  return fit;
}

double gpd_profile_log_likelihood(std::span<const double> x, double shape) {
  if (x.empty()) throw InvalidArgument("empty sample");
  const double mean = stats::mean(x);
  const double x_max = *std::max_element(x.begin(), x.end());
  if (shape == 0.0) {
    return -static_cast<double>(x.size()) * (std::log(mean) + 1.0);
  }
  return maximize_scale(
             shape, x_max, mean,
             [&](double s, double sc) { return gpd_log_likelihood(x, s, sc); },
             200)
      .value;
}

TailFit fit_gpd(std::span<const double> x, double threshold,
                const GpdFitOptions& options) {
  if (x.size() < 10) {
    throw InvalidArgument("GPD fit needs at least 10 excesses");
  }
  check_positive(x);
  check_not_degenerate(x);
  const double bound = options.shape_bound;
  const double margin = 1e-9;
  const double mean = stats::mean(x);
  const double x_max = *std::max_element(x.begin(), x.end());

  // Admissible theta range: shape_for_theta is increasing in theta, runs to
  // -inf at theta = -1/x_max and to +inf as theta grows.
  const double theta_min = -1.0 / x_max;
  const double theta_lo =
      theta_for_shape(x, -bound + margin, theta_min, 0.0);
  double theta_top = 1.0 / mean;
  while (shape_for_theta(x, theta_top) < bound - margin) theta_top *= 2.0;
  const double theta_hi = theta_for_shape(x, bound - margin, 0.0, theta_top);

  std::vector<double> grid{0.0};
  for (double w : unit_fractions(options.grid_points)) {
    grid.push_back(theta_lo * w);
    grid.push_back(theta_hi * w);
  }
  auto profile = [&](double theta) {
    return theta_profile(x, mean, x_max, theta);
  };
  const auto best = maximize_on_grid(profile, std::move(grid),
                                     options.max_iterations);
  if (!std::isfinite(best.value)) {
    throw ConvergenceError("GPD profile likelihood is not finite anywhere");
  }
  if (best.iterations >= options.max_iterations) {
    throw ConvergenceError("GPD fit did not converge in " +
                           std::to_string(options.max_iterations) +
                           " iterations (theta = " + std::to_string(best.arg) +
                           ")");
  }

  TailFit fit;
  fit.sample_size = x.size();
  fit.iterations = best.iterations;
  if (std::fabs(best.arg) * x_max < 1e-13) {
    fit.shape = 0.0;
    fit.scale = mean;
  } else {
    fit.shape = shape_for_theta(x, best.arg);
    fit.scale = fit.shape / best.arg;
  }
  fit.log_likelihood = gpd_log_likelihood(x, fit.shape, fit.scale);
  // The exponential is nested at shape 0; never report a worse optimum.
  const double exp_ll = -static_cast<double>(x.size()) * (std::log(mean) + 1.0);
  if (exp_ll > fit.log_likelihood) {
    fit.shape = 0.0;
    fit.scale = mean;
    fit.log_likelihood = exp_ll;
  }
  finish_gpd(fit, threshold);

  if (options.profile_ci) {
    auto prof = [&](double s) { return gpd_profile_log_likelihood(x, s); };
    const double peak = fit.log_likelihood;
    fit.shape_ci = stats::Interval{
        profile_bound(prof, peak, fit.shape, -bound + margin),
        profile_bound(prof, peak, fit.shape, bound - margin)};
  }
  return fit;
}

TailFit fit_gpd(std::span<const double> x, std::span<const double> entry,
                double threshold, const GpdFitOptions& options) {
  if (x.size() < 10) {
    throw InvalidArgument("GPD fit needs at least 10 excesses");
  }
  check_positive(x);
  check_entries(x, entry);
  check_not_degenerate(x);
  const double bound = options.shape_bound;
  const double margin = 1e-9;
  const double mean = stats::mean(x);
  const double x_max = *std::max_element(x.begin(), x.end());

  auto ll = [&](double shape, double scale) {
    return gpd_log_likelihood(x, entry, shape, scale);
  };
  auto profile = [&](double shape) {
    return maximize_scale(shape, x_max, mean, ll, options.max_iterations)
        .value;
  };
  std::vector<double> grid{0.0};
  for (double w : unit_fractions(options.grid_points / 4 + 2)) {
    grid.push_back((-bound + margin) * w);
    grid.push_back((bound - margin) * w);
  }
  const auto best =
      maximize_on_grid(profile, std::move(grid), options.max_iterations);
  if (!std::isfinite(best.value)) {
    throw ConvergenceError("truncated GPD likelihood is not finite anywhere");
  }

  TailFit fit;
  fit.sample_size = x.size();
  fit.iterations = best.iterations;
  fit.shape = best.arg;
  fit.scale =
      maximize_scale(fit.shape, x_max, mean, ll, options.max_iterations).arg;
  fit.log_likelihood = ll(fit.shape, fit.scale);
  finish_gpd(fit, threshold);

  if (options.profile_ci) {
    const double peak = fit.log_likelihood;
    fit.shape_ci = stats::Interval{
        profile_bound(profile, peak, fit.shape, -bound + margin),
        profile_bound(profile, peak, fit.shape, bound - margin)};
  }
  return fit;
}

TestResult lr_test_exp_vs_gpd(std::span<const double> x) {
  GpdFitOptions options;
  options.profile_ci = false;
  const auto gpd = fit_gpd(x, 0.0, options);
  const auto exp = fit_exponential(x);
  TestResult r;
  r.statistic = std::max(0.0, 2.0 * (gpd.log_likelihood - exp.log_likelihood));
  r.p_value = stats::chi_squared_sf(r.statistic, 1.0);
  return r;
}

TestResult split_period_test(std::span<const double> a,
                             std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InvalidArgument("split-period test needs >= 2 excesses per period");
  }
  check_positive(a);
  check_positive(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  const double pooled = (na + nb) / (sa + sb);
  const double d =
      2.0 * (na * std::log((na / sa) / pooled) + nb * std::log((nb / sb) / pooled));
  TestResult r;
  r.statistic = std::max(0.0, d);
  r.p_value = stats::chi_squared_sf(r.statistic, 1.0);
  return r;
}

std::vector<std::optional<HazardEstimate>> hazard_by_age(
    std::span<const LifeRecord> records, std::span<const int> ages) {
  std::vector<double> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(r.age_at_death);
  std::sort(sorted.begin(), sorted.end());

  auto count_at_least = [&](double age) {
    return static_cast<std::uint64_t>(
        sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), age));
  };

  std::vector<std::optional<HazardEstimate>> out;
  out.reserve(ages.size());
  for (int age : ages) {
    const auto at_risk = count_at_least(age);
    if (at_risk == 0) {
      out.emplace_back(std::nullopt);
      continue;
    }
    HazardEstimate h;
    h.age = age;
    h.at_risk = at_risk;
    h.deaths = at_risk - count_at_least(age + 1.0);
    h.q_hat = static_cast<double>(h.deaths) / static_cast<double>(h.at_risk);
    const auto ci = stats::wilson_interval(h.deaths, h.at_risk);
    h.ci_low = ci.low;
    h.ci_high = ci.high;
    out.emplace_back(h);
  }
  return out;
}

}  // namespace mradlab
