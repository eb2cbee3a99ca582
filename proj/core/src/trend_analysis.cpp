#include "mradlab/trend_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mradlab/errors.hpp"
#include "mradlab/philox.hpp"
#include "mradlab/stats.hpp"
#include "mradlab/survival_engine.hpp"

namespace mradlab {
namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;  // at x = 0
  double sse = 0.0;
};

// Least squares on x[begin, end), centred for conditioning.
Line ols(std::span<const double> x, std::span<const double> y,
         std::size_t begin, std::size_t end) {
  const double n = static_cast<double>(end - begin);
  double xm = 0.0;
  double ym = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  Line line;
  line.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double r = y[i] - ym - line.slope * (x[i] - xm);
    line.sse += r * r;
  }
  line.intercept = ym - line.slope * xm;
  return line;
}

struct Hinge {
  double slope_before = 0.0;
  double slope_after = 0.0;
  double intercept_before = 0.0;
  double sse = 0.0;
};

// y = a + b t + c (t - knot)+ by least squares.
Hinge hinge_fit(std::span<const double> x, std::span<const double> y,
                double knot) {
  const std::size_t n = x.size();
  const double nn = static_cast<double>(n);
  double xm = 0.0, ym = 0.0, hm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
    hm += std::max(0.0, x[i] - knot);
  }
  xm /= nn;
  ym /= nn;
  hm /= nn;
  double suu = 0.0, suv = 0.0, svv = 0.0, suy = 0.0, svy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = x[i] - xm;
    const double v = std::max(0.0, x[i] - knot) - hm;
    const double w = y[i] - ym;
    suu += u * u;
    suv += u * v;
    svv += v * v;
    suy += u * w;
    svy += v * w;
  }
  const double det = suu * svv - suv * suv;
  Hinge h;
  if (!(det > 0.0)) {
    h.sse = std::numeric_limits<double>::infinity();
    return h;
  }
  const double b = (svv * suy - suv * svy) / det;
  const double c = (suu * svy - suv * suy) / det;
  h.slope_before = b;
  h.slope_after = b + c;
  h.intercept_before = ym - b * xm - c * hm;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - ym - b * (x[i] - xm) -
                     c * (std::max(0.0, x[i] - knot) - hm);
    h.sse += r * r;
  }
  return h;
}

struct BreakSearch {
  std::size_t index = 0;  // last row of the first regime
  SegmentedFit fit;
};

double f_statistic(double sse_single, double sse_seg, double df_extra,
                   double df_resid) {
  const double gain = std::max(0.0, sse_single - sse_seg);
  if (sse_seg <= 0.0) {
    return gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return (gain / df_extra) / (sse_seg / df_resid);
}

BreakSearch search_breaks(std::span<const double> x, std::span<const double> y,
                          const SegmentedOptions& options) {
  const std::size_t n = x.size();
  const auto min_seg = static_cast<std::size_t>(options.min_segment);
  const Line single = ols(x, y, 0, n);

  double sst = 0.0;
  {
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
    for (double v : y) sst += (v - ym) * (v - ym);
  }

  struct Candidate {
    std::size_t index;
    double sse;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = min_seg - 1; i + min_seg < n; ++i) {
    double sse;
    if (options.joined) {
      sse = hinge_fit(x, y, x[i]).sse;
    } else {
      sse = ols(x, y, 0, i + 1).sse + ols(x, y, i + 1, n).sse;
    }
    candidates.push_back({i, sse});
  }
  double best_sse = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best_sse = std::min(best_sse, c.sse);
  const double tie = 1e-12 * sst + std::numeric_limits<double>::min();
  std::size_t best = candidates.front().index;
  for (const auto& c : candidates) {
    if (c.sse <= best_sse + tie) best = c.index;
  }

  BreakSearch out;
  out.index = best;
  auto& fit = out.fit;
  fit.break_year = static_cast<int>(std::lround(x[best]));
  fit.joined = options.joined;
  fit.n = n;
  fit.sse_single = single.sse;
  if (options.joined) {
    const Hinge h = hinge_fit(x, y, x[best]);
    fit.slope_before = h.slope_before;
    fit.slope_after = h.slope_after;
    fit.intercept_before = h.intercept_before;
    fit.intercept_after = h.intercept_before - (h.slope_after - h.slope_before) * x[best];
    fit.sse_segmented = h.sse;
  } else {
    const Line a = ols(x, y, 0, best + 1);
    const Line b = ols(x, y, best + 1, n);
    fit.slope_before = a.slope;
    fit.slope_after = b.slope;
    fit.intercept_before = a.intercept;
    fit.intercept_after = b.intercept;
    fit.sse_segmented = a.sse + b.sse;
  }
  // Nesting: the single line is one of the segmented candidates' special cases.
  fit.sse_segmented = std::min(fit.sse_segmented, fit.sse_single);
  const double df_extra = options.joined ? 1.0 : 2.0;
  const double df_resid = static_cast<double>(n) - (options.joined ? 3.0 : 4.0);
  fit.f_statistic = f_statistic(fit.sse_single, fit.sse_segmented, df_extra,
                                df_resid);
  fit.p_value = stats::fisher_f_sf(fit.f_statistic, df_extra, df_resid);
  return out;
}

void check_pairs(std::span<const double> x, std::span<const double> y,
                 std::size_t minimum, const char* what) {
  if (x.size() != y.size()) {
    throw InvalidArgument(std::string(what) + ": x and y differ in length");
  }
  if (x.size() < minimum) {
    throw DataError(std::string(what) + " needs at least " +
                    std::to_string(minimum) + " rows");
  }
}

struct Paired {
  std::vector<double> x;
  std::vector<double> y;
};

Paired paired(const YearlyExtremeSeries& series, const FieldSelector& xs,
              const FieldSelector& ys) {
  const auto xv = field_values(series, xs);
  const auto yv = field_values(series, ys);
  Paired p;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (xv[i] && yv[i]) {
      p.x.push_back(*xv[i]);
      p.y.push_back(*yv[i]);
    }
  }
  return p;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    syy += (y[i] - ym) * (y[i] - ym);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DataError("correlation of a zero-variance field");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

YearlyExtremeSeries yearly_extremes(std::span<const LifeRecord> records,
                                    int k_max, std::optional<std::string> country,
                                    double threshold) {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  std::map<int, std::vector<double>> by_year;
  for (const auto& r : records) {
    if (!r.validated) continue;
    if (country && r.country != *country) continue;
    if (r.age_at_death < threshold) continue;
    by_year[r.death_year()].push_back(r.age_at_death);
  }
  YearlyExtremeSeries series;
  series.country_filter = std::move(country);
  series.k_max = k_max;
  series.threshold = threshold;
  for (auto& [year, ages] : by_year) {
    std::sort(ages.begin(), ages.end(), std::greater<>());
    YearlyRow row;
    row.year = year;
    row.n_t = ages.size();
    row.mrad = ages.front();
    for (int k = 2; k <= k_max; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      row.kth_highest.push_back(idx < ages.size() ? std::optional(ages[idx])
                                                  : std::nullopt);
    }
    series.rows.push_back(std::move(row));
  }
  return series;
}

FieldSelector parse_field(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "year") return FieldSelector::year();
  if (n == "n_t" || n == "n" || n == "deaths") return FieldSelector::death_count();
  if (n == "mrad" || n == "rank1") return FieldSelector::mrad();
  if (n.starts_with("rank") && n.size() > 4) {
    try {
      const int k = std::stoi(n.substr(4));
      if (k >= 2) return FieldSelector::kth(k);
    } catch (const std::exception&) {
    }
  }
  if (n == "overlay") return FieldSelector::overlay(1.31);
  if (n.starts_with("overlay:")) {
    try {
      return FieldSelector::overlay(std::stod(n.substr(8)));
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("unknown series field '" + std::string(name) + "'");
}

std::string to_string(const FieldSelector& selector) {
  switch (selector.field) {
    case SeriesField::kYear:
      return "year";
    case SeriesField::kDeathCount:
      return "n_t";
    case SeriesField::kMrad:
      return "mrad";
    case SeriesField::kRank:
      return "rank" + std::to_string(selector.rank);
    case SeriesField::kOverlay:
      return "overlay";
  }
  return "unknown";
}

std::vector<std::optional<double>> field_values(
    const YearlyExtremeSeries& series, const FieldSelector& selector) {
  std::vector<std::optional<double>> out;
  out.reserve(series.rows.size());
  for (const auto& row : series.rows) {
    switch (selector.field) {
      case SeriesField::kYear:
        out.emplace_back(row.year);
        break;
      case SeriesField::kDeathCount:
        out.emplace_back(static_cast<double>(row.n_t));
        break;
      case SeriesField::kMrad:
        out.emplace_back(row.mrad);
        break;
      case SeriesField::kRank: {
        const int idx = selector.rank - 2;
        if (idx < 0 || idx >= static_cast<int>(row.kth_highest.size())) {
          throw InvalidArgument("rank " + std::to_string(selector.rank) +
                                " is not in the series");
        }
        out.push_back(row.kth_highest[static_cast<std::size_t>(idx)]);
        break;
      }
      case SeriesField::kOverlay:
        out.emplace_back(max_exponential_mean(row.n_t, selector.mean_excess,
                                              series.threshold));
        break;
    }
  }
  return out;
}

SegmentedFit fit_segmented(std::span<const double> years,
                           std::span<const double> values,
                           const SegmentedOptions& options) {
  if (options.min_segment < 2) {
    throw InvalidArgument("min_segment must be >= 2");
  }
  check_pairs(years, values, 2 * static_cast<std::size_t>(options.min_segment),
              "segmented fit");
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (!(years[i] > years[i - 1])) {
      throw DataError("segmented fit needs strictly increasing years");
    }
  }
  auto result = search_breaks(years, values, options);

  if (options.permutations > 0) {
    const std::size_t n = years.size();
    const Line single = ols(years, values, 0, n);
    std::vector<double> fitted(n), resid(n);
    for (std::size_t i = 0; i < n; ++i) {
      fitted[i] = single.intercept + single.slope * years[i];
      resid[i] = values[i] - fitted[i];
    }
    const double observed = result.fit.f_statistic;
    std::size_t at_least = 0;
    std::vector<double> shuffled(n), y(n);
    for (int b = 0; b < options.permutations; ++b) {
      PhiloxStream rng(options.seed, static_cast<std::uint32_t>(b), 0x5e67u);
      shuffled = resid;
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(shuffled[i], shuffled[rng.next_below(i + 1)]);
      }
      for (std::size_t i = 0; i < n; ++i) y[i] = fitted[i] + shuffled[i];
      if (search_breaks(years, y, options).fit.f_statistic >= observed) {
        ++at_least;
      }
    }
    result.fit.permutation_p_value =
        (1.0 + static_cast<double>(at_least)) / (1.0 + options.permutations);
  }
  return result.fit;
}

SegmentedFit fit_segmented(const YearlyExtremeSeries& series,
                           const FieldSelector& selector,
                           const SegmentedOptions& options) {
  const auto p = paired(series, FieldSelector::year(), selector);
  return fit_segmented(p.x, p.y, options);
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y, 3, "linear fit");
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  if (*xlo == *xhi) throw DataError("linear fit: all x values are equal");
  const Line line = ols(x, y, 0, x.size());
  LinearFit fit;
  fit.n = x.size();
  fit.intercept = line.intercept;
  fit.sse = line.sse;
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  if (*ylo == *yhi) {
    fit.slope = 0.0;
    fit.intercept = *ylo;
    fit.sse = 0.0;
    fit.slope_se = 0.0;
    fit.p_value = 1.0;
    return fit;
  }
  fit.slope = line.slope;
  const double n = static_cast<double>(x.size());
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - xm) * (v - xm);
  fit.slope_se = std::sqrt(line.sse / (n - 2.0) / sxx);
  const double t = fit.slope_se > 0.0
                       ? fit.slope / fit.slope_se
                       : std::copysign(std::numeric_limits<double>::infinity(),
                                       fit.slope);
  fit.p_value = stats::student_t_two_sided(t, n - 2.0);
  return fit;
}

LinearFit fit_linear(const YearlyExtremeSeries& series,
                     const FieldSelector& selector) {
  const auto p = paired(series, FieldSelector::year(), selector);
  return fit_linear(p.x, p.y);
}

std::string_view to_string(CorrelationMethod method) {
  return method == CorrelationMethod::kPearson ? "pearson" : "spearman";
}

CorrelationMethod parse_correlation_method(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "pearson") return CorrelationMethod::kPearson;
  if (n == "spearman") return CorrelationMethod::kSpearman;
  throw InvalidArgument("unknown correlation method '" + std::string(name) +
                        "'");
}

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

Correlation correlate(std::span<const double> x, std::span<const double> y,
                      CorrelationMethod method) {
  check_pairs(x, y, 3, "correlation");
  Correlation c;
  c.n = x.size();
  if (method == CorrelationMethod::kSpearman) {
    const auto rx = mid_ranks(x);
    const auto ry = mid_ranks(y);
    c.coefficient = pearson(rx, ry);
  } else {
    c.coefficient = pearson(x, y);
  }
  const double dof = static_cast<double>(c.n) - 2.0;
  const double r = c.coefficient;
  if (std::fabs(r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    c.p_value = stats::student_t_two_sided(r * std::sqrt(dof / (1.0 - r * r)),
                                           dof);
  }
  return c;
}

Correlation correlate(const YearlyExtremeSeries& series,
                      const FieldSelector& x_field,
                      const FieldSelector& y_field, CorrelationMethod method) {
  const auto p = paired(series, x_field, y_field);
  return correlate(p.x, p.y, method);
}

}  // namespace mradlab
