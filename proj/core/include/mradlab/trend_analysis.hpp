#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mradlab/records.hpp"

namespace mradlab {

struct YearlyRow {
  int year = 0;
  std::uint64_t n_t = 0;  // deaths at or above the threshold that year
  double mrad = 0.0;      // maximum reported age at death
  // k-th highest age for k = 2..k_max; nullopt when fewer deaths that year.
  std::vector<std::optional<double>> kth_highest;
};

struct YearlyExtremeSeries {
  std::vector<YearlyRow> rows;  // strictly increasing years
  std::optional<std::string> country_filter;
  int k_max = 5;
  double threshold = 110.0;

  bool empty() const { return rows.empty(); }
};

// One row per death year with at least one validated death at age >=
// threshold (and a matching country when a filter is given). Ties are legal and reported as
// repeated values. An empty series is returned, not thrown, when nothing
// qualifies.
YearlyExtremeSeries yearly_extremes(std::span<const LifeRecord> records,
                                    int k_max = 5,
                                    std::optional<std::string> country = {},
                                    double threshold = 110.0);

enum class SeriesField { kYear, kDeathCount, kMrad, kRank, kOverlay };

// Which column of a series to analyse. kOverlay is threshold + mean_excess *
// H_{n_t}, the expected maximum of n_t exponential excesses.
struct FieldSelector {
  SeriesField field = SeriesField::kMrad;
  int rank = 2;
  double mean_excess = 1.31;

  static FieldSelector mrad() { return {SeriesField::kMrad}; }
  static FieldSelector death_count() { return {SeriesField::kDeathCount}; }
  static FieldSelector year() { return {SeriesField::kYear}; }
  static FieldSelector kth(int k) { return {SeriesField::kRank, k}; }
  static FieldSelector overlay(double mu) {
    return {SeriesField::kOverlay, 2, mu};
  }
};

// "year", "n_t", "mrad", "rank2".."rank5", "overlay" or "overlay:<mu>".
FieldSelector parse_field(std::string_view name);
std::string to_string(const FieldSelector& selector);

std::vector<std::optional<double>> field_values(
    const YearlyExtremeSeries& series, const FieldSelector& selector);

struct SegmentedOptions {
  // Continuous (hinge) fit instead of two independent lines.
  bool joined = false;
  int min_segment = 4;
  // Residual-permutation test of the best break (sup-F), 0 to skip.
  int permutations = 0;
  std::uint64_t seed = 0;
};

// Two-regime trend fit. break_year is the last year of the first regime.
// Intercepts are values at calendar year 0.
struct SegmentedFit {
  int break_year = 0;
  double slope_before = 0.0;
  double slope_after = 0.0;
  double intercept_before = 0.0;
  double intercept_after = 0.0;
  double sse_segmented = 0.0;
  double sse_single = 0.0;
  double f_statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> permutation_p_value;
  bool joined = false;
  std::size_t n = 0;
};

// The break minimises total SSE over every interior year leaving at least
// min_segment points on each side; exact ties go to the later year. The
// F-test compares against one line: F(2, n-4) for independent lines,
// F(1, n-3) when joined. The F p-value ignores the search over breaks; use
// permutations for a calibrated answer.
SegmentedFit fit_segmented(std::span<const double> years,
                           std::span<const double> values,
                           const SegmentedOptions& options = {});
SegmentedFit fit_segmented(const YearlyExtremeSeries& series,
                           const FieldSelector& selector,
                           const SegmentedOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;  // at calendar year 0
  double slope_se = 0.0;
  double p_value = 1.0;  // two-sided t-test of slope != 0
  double sse = 0.0;
  std::size_t n = 0;
};

LinearFit fit_linear(std::span<const double> x, std::span<const double> y);
LinearFit fit_linear(const YearlyExtremeSeries& series,
                     const FieldSelector& selector);

enum class CorrelationMethod { kPearson, kSpearman };

std::string_view to_string(CorrelationMethod method);
CorrelationMethod parse_correlation_method(std::string_view name);

struct Correlation {
  double coefficient = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

Correlation correlate(std::span<const double> x, std::span<const double> y,
                      CorrelationMethod method);
// Uses rows where both fields are present.
Correlation correlate(const YearlyExtremeSeries& series,
                      const FieldSelector& x_field,
                      const FieldSelector& y_field, CorrelationMethod method);

// 1-based ranks, tied values share the mean of their positions.
std::vector<double> mid_ranks(std::span<const double> x);

}  // namespace mradlab
