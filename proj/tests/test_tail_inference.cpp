#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mradlab/errors.hpp"
#include "mradlab/philox.hpp"
#include "mradlab/stats.hpp"
#include "mradlab/tail_inference.hpp"

using namespace mradlab;

namespace {

std::vector<double> exp_sample(std::uint64_t seed, std::uint32_t stream,
                               std::size_t n, double rate) {
  PhiloxStream s(seed, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = -std::log(s.next_double()) / rate;
  return x;
}

// Inverse CDF: x = sigma / xi * (u^-xi - 1).
std::vector<double> gpd_sample(std::uint64_t seed, std::uint32_t stream,
                               std::size_t n, double xi, double sigma) {
  PhiloxStream s(seed, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = sigma / xi * std::expm1(-xi * std::log(s.next_double()));
  return x;
}

// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
double ks_p_value(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  }
  const double rn = std::sqrt(n);
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(sum, 0.0, 1.0);
}

LifeRecord record_with_age(double age) {
  LifeRecord r;
  r.age_at_death = age;
  return r;
}

}  // namespace

TEST_CASE("ks_p_value helper") {
  // Critical values of the limiting Kolmogorov distribution.
  const auto q = [](double lambda) {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k)
      s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return s;
  };
  CHECK(q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(q(1.6276) == doctest::Approx(0.01).epsilon(1e-2));
  std::vector<double> grid(200);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (i + 0.5) / 200.0;
  CHECK(ks_p_value(grid) > 0.99);
}

TEST_CASE("excesses") {
  std::vector<LifeRecord> r{record_with_age(112.3), record_with_age(109.9),
                            record_with_age(115.0)};
  const auto x = excesses(r, 110.0);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(x[1] == 5.0);
  CHECK(excesses(r, 120.0).empty());
  // Exactly at the threshold does not count.
  CHECK(excesses(r, 115.0).empty());
  CHECK_THROWS_AS(excesses(r, 0.0), InvalidArgument);
}

TEST_CASE("fit_exponential") {
  SUBCASE("closed form") {
    const std::vector<double> x(10, 2.0);
    const auto f = fit_exponential(x, 110.0);
    CHECK(f.rate == 0.5);
    CHECK(f.scale == 2.0);
    CHECK(f.kind == TailModelKind::kExponential);
    CHECK(f.log_likelihood ==
          doctest::Approx(10 * std::log(0.5) - 0.5 * 20).epsilon(1e-14));
    CHECK_FALSE(f.endpoint);
    REQUIRE(f.rate_ci);
    CHECK(f.rate_ci->low < 0.5);
    CHECK(f.rate_ci->high > 0.5);
    // Normal approximation on log rate: se = 1/sqrt(n).
    CHECK(f.rate_ci->low ==
          doctest::Approx(0.5 * std::exp(-1.959963984540054 / std::sqrt(10.0)))
              .epsilon(1e-9));
  }
  SUBCASE("reciprocal mean to full precision") {
    const auto x = exp_sample(3, 0, 777, 1.1);
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    CHECK(fit_exponential(x).rate == doctest::Approx(1.0 / m).epsilon(1e-15));
  }
  SUBCASE("Monte Carlo at rate 0.7") {
    const auto x = exp_sample(20170706, 1, 10000, 0.7);
    const auto f = fit_exponential(x);
    CHECK(f.rate >= 0.68);
    CHECK(f.rate <= 0.72);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_exponential(std::vector<double>{1.0}), InvalidArgument);
    CHECK_THROWS_AS(fit_exponential(std::vector<double>{1.0, 0.0}),
                    InvalidArgument);
    CHECK_THROWS_AS(fit_exponential(std::vector<double>{1.0, -2.0}),
                    InvalidArgument);
  }
}

TEST_CASE("GPD likelihood nesting") {
  const auto x = exp_sample(5, 0, 300, 0.8);
  const double rate = fit_exponential(x).rate;
  CHECK(gpd_log_likelihood(x, 0.0, 1.0 / rate) ==
        doctest::Approx(exponential_log_likelihood(x, rate)).epsilon(1e-15));
  CHECK(std::abs(gpd_log_likelihood(x, 1e-9, 1.0 / rate) -
                 exponential_log_likelihood(x, rate)) < 1e-6);
  CHECK(std::abs(gpd_log_likelihood(x, -1e-9, 1.0 / rate) -
                 exponential_log_likelihood(x, rate)) < 1e-6);
  // Outside the support.
  const double xmax = *std::max_element(x.begin(), x.end());
  CHECK(std::isinf(gpd_log_likelihood(x, -0.5, 0.4 * xmax)));
  CHECK(std::isinf(gpd_log_likelihood(x, 0.1, -1.0)));
}

TEST_CASE("fit_gpd") {
  SUBCASE("recovers shape -0.2, scale 1.5 from 1e4 draws") {
    const auto x = gpd_sample(11, 0, 10000, -0.2, 1.5);
    const auto f = fit_gpd(x, 110.0);
    CHECK(f.kind == TailModelKind::kGpd);
    CHECK(f.shape >= -0.3);
    CHECK(f.shape <= -0.1);
    CHECK(f.scale == doctest::Approx(1.5).epsilon(0.1));
    REQUIRE(f.endpoint);
    CHECK(*f.endpoint >= 110.0 + 7.5 * 0.75);
    CHECK(*f.endpoint <= 110.0 + 7.5 * 1.25);
    // Feasibility: every excess lies below the endpoint.
    CHECK(*std::max_element(x.begin(), x.end()) < *f.endpoint - 110.0);
    REQUIRE(f.shape_ci);
    CHECK(f.shape_ci->low < f.shape);
    CHECK(f.shape_ci->high > f.shape);
    // 1.92 log-likelihood units below the peak at each end of the interval.
    const double peak = f.log_likelihood;
    CHECK(gpd_profile_log_likelihood(x, f.shape_ci->low) ==
          doctest::Approx(peak - 1.920729410347062).epsilon(1e-5));
    CHECK(gpd_profile_log_likelihood(x, f.shape_ci->high) ==
          doctest::Approx(peak - 1.920729410347062).epsilon(1e-5));
  }
  SUBCASE("exponential data: shape near 0, nesting within 2 units") {
    const auto x = exp_sample(12, 0, 2000, 0.7);
    const auto g = fit_gpd(x);
    const auto e = fit_exponential(x);
    CHECK(std::abs(g.shape) < 0.1);
    CHECK(g.log_likelihood >= e.log_likelihood - 1e-9);
    CHECK(g.log_likelihood - e.log_likelihood < 2.0);
  }
  SUBCASE("the optimum is a maximum of the likelihood") {
    const auto x = gpd_sample(13, 0, 500, -0.3, 2.0);
    const auto f = fit_gpd(x);
    for (double ds : {-0.01, 0.01}) {
      for (double dl : {-0.01, 0.0, 0.01}) {
        CHECK(gpd_log_likelihood(x, f.shape + ds, f.scale * std::exp(dl)) <=
              f.log_likelihood + 1e-9);
      }
    }
    CHECK(f.endpoint.has_value() == (f.shape < 0));
  }
  SUBCASE("endpoint arithmetic") {
    // xi = -0.5, sigma = 2, u = 110 -> 114.
    const auto x = gpd_sample(14, 0, 4000, -0.5, 2.0);
    const auto f = fit_gpd(x, 110.0);
    REQUIRE(f.endpoint);
    CHECK(*f.endpoint == doctest::Approx(110.0 + f.scale / -f.shape));
    CHECK(*f.endpoint == doctest::Approx(114.0).epsilon(0.01));
  }
  SUBCASE("positive shape has no endpoint") {
    const auto x = gpd_sample(15, 0, 3000, 0.3, 1.0);
    const auto f = fit_gpd(x);
    CHECK(f.shape > 0.15);
    CHECK_FALSE(f.endpoint);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_gpd(std::vector<double>(9, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(fit_gpd(std::vector<double>(20, 1.0)), DataError);
  }
}

TEST_CASE("truncated likelihoods") {
  const auto x = gpd_sample(21, 0, 3000, -0.2, 1.5);
  const std::vector<double> zero(x.size(), 0.0);
  SUBCASE("zero entry ages reduce to the plain fits") {
    CHECK(exponential_log_likelihood(x, zero, 0.6) ==
          doctest::Approx(exponential_log_likelihood(x, 0.6)).epsilon(1e-13));
    CHECK(gpd_log_likelihood(x, zero, -0.2, 1.5) ==
          doctest::Approx(gpd_log_likelihood(x, -0.2, 1.5)).epsilon(1e-13));
    CHECK(fit_exponential(x, zero).rate ==
          doctest::Approx(fit_exponential(x).rate).epsilon(1e-13));
    const auto a = fit_gpd(x, zero);
    const auto b = fit_gpd(x);
    CHECK(a.shape == doctest::Approx(b.shape).epsilon(1e-4));
    CHECK(a.scale == doctest::Approx(b.scale).epsilon(1e-4));
    CHECK(a.log_likelihood == doctest::Approx(b.log_likelihood).epsilon(1e-9));
  }
  SUBCASE("left-truncated sample is recovered") {
    // Entry age uniform on [0, 3); only people alive at entry are seen.
    PhiloxStream s(22, 0);
    std::vector<double> kept, entry;
    const auto pool = gpd_sample(22, 1, 12000, -0.2, 1.5);
    for (double v : pool) {
      const double e = 3.0 * s.next_double();
      if (v > e) {
        kept.push_back(v);
        entry.push_back(e);
      }
    }
    const auto f = fit_gpd(kept, entry, 110.0);
    CHECK(f.shape == doctest::Approx(-0.2).epsilon(0.5));
    CHECK(f.scale == doctest::Approx(1.5).epsilon(0.15));
    // Ignoring truncation biases the scale upward.
    CHECK(fit_gpd(kept).scale > f.scale);
  }
  SUBCASE("exponential closed form under truncation") {
    const std::vector<double> xs{2.0, 3.0, 5.0};
    const std::vector<double> en{1.0, 0.0, 4.0};
    CHECK(fit_exponential(xs, en).rate == doctest::Approx(3.0 / 5.0));
  }
  SUBCASE("entry must be below the excess") {
    const std::vector<double> xs{2.0, 3.0};
    const std::vector<double> en{2.0, 0.0};
    CHECK_THROWS_AS(fit_exponential(xs, en), InvalidArgument);
  }
}

TEST_CASE("lr_test_exp_vs_gpd") {
  SUBCASE("GPD optimum at shape 0 gives D = 0") {
    // Nine 1s and one 6: mean 1.5, second moment 4.5 = 2 mean^2, so the shape
    // score vanishes at 0.
    std::vector<double> x(9, 1.0);
    x.push_back(6.0);
    const auto t = lr_test_exp_vs_gpd(x);
    CHECK(t.statistic == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(t.p_value > 0.999);
  }
  SUBCASE("invariant under reordering") {
    auto x = gpd_sample(31, 0, 400, -0.1, 1.0);
    const auto a = lr_test_exp_vs_gpd(x);
    std::reverse(x.begin(), x.end());
    std::rotate(x.begin(), x.begin() + 123, x.end());
    const auto b = lr_test_exp_vs_gpd(x);
    CHECK(b.statistic == doctest::Approx(a.statistic).epsilon(1e-7));
    CHECK(a.statistic >= 0.0);
  }
  SUBCASE("null calibration, 400 replications of n = 300") {
    int reject = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
      const auto x = exp_sample(32, r, 300, 0.7);
      if (lr_test_exp_vs_gpd(x).p_value < 0.05) ++reject;
    }
    // 3 binomial standard errors around 5%.
    const double rate = static_cast<double>(reject) / reps;
    CHECK(std::abs(rate - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / reps));
  }
  SUBCASE("power against shape -0.3, n = 500") {
    int reject = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
      const auto x = gpd_sample(33, r, 500, -0.3, 1.5);
      if (lr_test_exp_vs_gpd(x).p_value < 0.05) ++reject;
    }
    CHECK(reject > 80);
  }
}

TEST_CASE("split_period_test") {
  SUBCASE("identical samples") {
    const auto x = exp_sample(41, 0, 50, 0.7);
    const auto t = split_period_test(x, x);
    CHECK(t.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.p_value == doctest::Approx(1.0));
  }
  SUBCASE("symmetric in its arguments") {
    const auto a = exp_sample(42, 0, 60, 0.7);
    const auto b = exp_sample(42, 1, 90, 1.0);
    CHECK(split_period_test(a, b).statistic ==
          doctest::Approx(split_period_test(b, a).statistic).epsilon(1e-14));
  }
  SUBCASE("closed form statistic") {
    const std::vector<double> a{1.0, 1.0}, b{3.0, 3.0};
    // Rates 1 and 1/3 against pooled 1/2: D = 2 [2 ln 1 - 2 + 2 ln(1/3) - 2
    // - (4 ln(1/2) - 4)].
    const double d = 2.0 * (2 * std::log(1.0 / 3.0) - 4 * std::log(0.5));
    CHECK(split_period_test(a, b).statistic == doctest::Approx(d).epsilon(1e-13));
    CHECK(split_period_test(a, b).p_value ==
          doctest::Approx(stats::chi_squared_sf(d, 1)).epsilon(1e-13));
  }
  SUBCASE("power: 0.7 vs 1.4, n = 200 each") {
    int hits = 0;
    for (int r = 0; r < 200; ++r) {
      if (split_period_test(exp_sample(43, 2 * r, 200, 0.7),
                            exp_sample(43, 2 * r + 1, 200, 1.4))
              .p_value < 0.01)
        ++hits;
    }
    CHECK(hits > 180);
  }
  SUBCASE("null p-values are uniform (Kolmogorov-Smirnov at 5%)") {
    std::vector<double> p;
    int reject = 0;
    for (int r = 0; r < 1000; ++r) {
      p.push_back(split_period_test(exp_sample(44, 2 * r, 200, 0.7),
                                    exp_sample(44, 2 * r + 1, 200, 0.7))
                      .p_value);
      if (p.back() < 0.05) ++reject;
    }
    CHECK(ks_p_value(p) > 0.05);
    CHECK(std::abs(reject / 1000.0 - 0.05) < 0.02);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(split_period_test(std::vector<double>{1.0},
                                      std::vector<double>{1.0, 2.0}),
                    InvalidArgument);
  }
}

TEST_CASE("hazard_by_age") {
  SUBCASE("Wilson example: 10 at risk, 5 deaths") {
    std::vector<LifeRecord> r;
    for (int i = 0; i < 5; ++i) r.push_back(record_with_age(110.2 + 0.1 * i));
    for (int i = 0; i < 5; ++i) r.push_back(record_with_age(111.5 + i));
    const std::vector<int> ages{110, 130};
    const auto h = hazard_by_age(r, ages);
    REQUIRE(h.size() == 2);
    REQUIRE(h[0]);
    CHECK(h[0]->at_risk == 10);
    CHECK(h[0]->deaths == 5);
    CHECK(h[0]->q_hat == 0.5);
    CHECK(h[0]->ci_low == doctest::Approx(0.236593090512564).epsilon(1e-12));
    CHECK(h[0]->ci_high == doctest::Approx(0.7634069094874361).epsilon(1e-12));
    CHECK_FALSE(h[1]);
  }
  SUBCASE("no deaths: lower bound 0") {
    std::vector<LifeRecord> r;
    for (int i = 0; i < 10; ++i) r.push_back(record_with_age(112.5));
    const std::vector<int> ages{111};
    const auto h = hazard_by_age(r, ages);
    REQUIRE(h[0]);
    CHECK(h[0]->q_hat == 0.0);
    CHECK(h[0]->ci_low == 0.0);
    CHECK(h[0]->ci_high > 0.0);
  }
  SUBCASE("plateau cohort: estimates near 0.53, counts chain") {
    // Geometric whole years with q = 0.53, uniform position in the year.
    PhiloxStream s(51, 0);
    std::vector<LifeRecord> r;
    for (int i = 0; i < 20000; ++i) {
      int k = 0;
      while (s.next_double() >= 0.53) ++k;
      r.push_back(record_with_age(110.0 + k + s.next_double()));
    }
    std::vector<int> ages;
    for (int a = 110; a <= 118; ++a) ages.push_back(a);
    const auto h = hazard_by_age(r, ages);
    for (std::size_t i = 0; i + 1 < h.size(); ++i) {
      REQUIRE(h[i]);
      if (h[i + 1]) CHECK(h[i + 1]->at_risk == h[i]->at_risk - h[i]->deaths);
      CHECK(h[i]->deaths <= h[i]->at_risk);
      CHECK(h[i]->ci_low <= h[i]->q_hat);
      CHECK(h[i]->q_hat <= h[i]->ci_high);
    }
    for (int a = 111; a <= 114; ++a) {
      const auto& e = *h[a - 110];
      const double half = (e.ci_high - e.ci_low) / 2.0;
      CHECK(std::abs(e.q_hat - 0.53) <= 3.0 * half);
    }
  }
}
