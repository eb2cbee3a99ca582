#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mradlab/records.hpp"
#include "mradlab/stats.hpp"

namespace mradlab {

enum class TailModelKind { kExponential, kGpd };

std::string_view to_string(TailModelKind kind);

// A fitted model for excess lifetimes over a threshold u.
//
// Exponential: constant force of mortality, density rate * exp(-rate x).
// GPD: shape xi, scale sigma; xi < 0 implies a finite endpoint u + sigma/|xi|.
struct TailFit {
  double threshold = 0.0;
  TailModelKind kind = TailModelKind::kExponential;
  double rate = 0.0;   // exponential only
  double shape = 0.0;  // GPD only
  double scale = 0.0;  // GPD sigma, or 1/rate for the exponential
  double log_likelihood = 0.0;
  std::optional<double> endpoint;
  std::size_t sample_size = 0;
  std::optional<stats::Interval> rate_ci;   // 95%, normal approx. on log rate
  std::optional<stats::Interval> shape_ci;  // 95% profile likelihood
  int iterations = 0;
};

struct GpdFitOptions {
  bool profile_ci = true;
  // Shape is restricted to (-shape_bound, shape_bound).
  double shape_bound = 1.0;
  int grid_points = 48;  // per side of zero
  int max_iterations = 200;
};

// Excess over `threshold` for each record strictly above it, in input order.
// An empty result is legal. Throws InvalidArgument for threshold <= 0.
std::vector<double> excesses(std::span<const LifeRecord> records,
                             double threshold);

double exponential_log_likelihood(std::span<const double> x, double rate);

// GPD log-likelihood; shape == 0 is the exact exponential branch. Returns
// -inf outside the support (some 1 + shape x / scale <= 0) or for scale <= 0.
double gpd_log_likelihood(std::span<const double> x, double shape,
                          double scale);

// Left-truncated variants: excess x_i was only observable because the person
// was still alive at excess entry_i (0 <= entry_i < x_i). Each contribution is
// the density conditional on survival to entry_i.
double exponential_log_likelihood(std::span<const double> x,
                                  std::span<const double> entry, double rate);
double gpd_log_likelihood(std::span<const double> x,
                          std::span<const double> entry, double shape,
                          double scale);

// Closed-form MLE rate = 1 / mean. Needs >= 2 strictly positive values.
TailFit fit_exponential(std::span<const double> x, double threshold = 0.0);
TailFit fit_exponential(std::span<const double> x,
                        std::span<const double> entry, double threshold = 0.0);

// Maximum-likelihood GPD fit (>= 10 values). Uses the exact profile in
// theta = shape / scale, for which the optimal shape has a closed form.
TailFit fit_gpd(std::span<const double> x, double threshold = 0.0,
                const GpdFitOptions& options = {});

// Left-truncated GPD fit by profiling over shape with an inner scale search.
TailFit fit_gpd(std::span<const double> x, std::span<const double> entry,
                double threshold = 0.0, const GpdFitOptions& options = {});

// max over scale of the GPD log-likelihood at a fixed shape.
double gpd_profile_log_likelihood(std::span<const double> x, double shape);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// D = 2 (l_GPD - l_Exp), referred to chi-square(1). Small p rejects a
// constant force of mortality.
TestResult lr_test_exp_vs_gpd(std::span<const double> x);

// LR test of equal exponential rates in two periods, chi-square(1).
TestResult split_period_test(std::span<const double> a,
                             std::span<const double> b);

struct HazardEstimate {
  int age = 0;
  std::uint64_t deaths = 0;
  std::uint64_t at_risk = 0;
  double q_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Per-age death probability: at_risk = records with age_at_death >= x,
// deaths = records dying in [x, x + 1), Wilson 95% interval. Ages with nobody
// at risk yield nullopt.
std::vector<std::optional<HazardEstimate>> hazard_by_age(
    std::span<const LifeRecord> records, std::span<const int> ages);

}  // namespace mradlab
