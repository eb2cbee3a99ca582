#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mradlab/errors.hpp"
#include "mradlab/hazard_models.hpp"

using namespace mradlab;

namespace {

std::vector<HazardModel> fuzz_models(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> q(0.05, 1.0);
  std::uniform_real_distribution<double> xp(60.0, 130.0);
  std::uniform_real_distribution<double> rate(0.01, 1.0);
  std::uniform_real_distribution<double> c(0.6, 1.0);
  std::uniform_real_distribution<double> loga(-14.0, -7.0);
  std::uniform_real_distribution<double> b(0.05, 0.14);
  GompertzParams g{std::exp(loga(rng)), b(rng)};
  std::vector<HazardModel> out{
      HazardModel::hard_limit(static_cast<int>(xp(rng)), g),
      HazardModel::plateau(q(rng), xp(rng), g),
      HazardModel::decline(rate(rng), xp(rng), g)};
  const double x = xp(rng);
  const double cc = c(rng);
  if (gompertz_annual_prob(g, x) < cc) {
    out.push_back(HazardModel::sigmoid(cc, x, g));
  }
  LifeTable t;
  for (int a = 100; a < 115; ++a) t.rows.push_back({a, q(rng)});
  out.push_back(HazardModel::life_table(t));
  return out;
}

}  // namespace

TEST_CASE("default Gompertz crosses 0.53 at age 110") {
  const auto g = default_gompertz();
  CHECK(g.b == doctest::Approx(0.085));
  CHECK(gompertz_annual_prob(g, 110.0) == doctest::Approx(0.53).epsilon(1e-12));
  CHECK(gompertz_annual_prob(g, 109.0) < 0.53);
}

TEST_CASE("annual_death_prob examples") {
  SUBCASE("plateau stays at 0.53") {
    const auto m = HazardModel::plateau(0.53, 110.0);
    CHECK(m.annual_death_prob(130.0) == 0.53);
  }
  SUBCASE("hard limit is certain death at the limit") {
    const auto m = HazardModel::hard_limit(115);
    CHECK(m.annual_death_prob(115.0) == 1.0);
    CHECK(m.annual_death_prob(114.0) < 1.0);
  }
  SUBCASE("sigmoid never attains its asymptote") {
    const auto m = HazardModel::sigmoid(1.0, 110.0);
    const double far = m.annual_death_prob(1e6);
    CHECK(far < 1.0);
    CHECK(far > m.annual_death_prob(200.0));
  }
  SUBCASE("rejects bad ages") {
    const auto m = HazardModel::plateau();
    CHECK_THROWS_AS(m.annual_death_prob(-1.0), InvalidArgument);
    CHECK_THROWS_AS(m.annual_death_prob(std::nan("")), InvalidArgument);
    CHECK_THROWS_AS(m.annual_death_prob(INFINITY), InvalidArgument);
  }
}

TEST_CASE("sigmoid continues the Gompertz segment C1-smoothly") {
  const auto g = default_gompertz();
  const auto m = HazardModel::sigmoid(1.0, 100.0, g);
  const double h = 1e-6;
  CHECK(m.annual_death_prob(100.0) ==
        doctest::Approx(gompertz_annual_prob(g, 100.0)).epsilon(1e-12));
  const double left = (gompertz_annual_prob(g, 100.0) -
                       gompertz_annual_prob(g, 100.0 - h)) / h;
  const double right =
      (m.annual_death_prob(100.0 + h) - m.annual_death_prob(100.0)) / h;
  CHECK(right == doctest::Approx(left).epsilon(1e-4));
}

TEST_CASE("decline is strictly decreasing past the transition") {
  const auto m = HazardModel::decline(0.2, 105.0);
  for (double x = 105.5; x < 160.0; x += 0.5) {
    CHECK(m.annual_death_prob(x + 0.5) < m.annual_death_prob(x));
  }
}

TEST_CASE("constructors validate parameters") {
  CHECK_THROWS_AS(HazardModel::plateau(0.0), InvalidArgument);
  CHECK_THROWS_AS(HazardModel::plateau(1.2), InvalidArgument);
  CHECK_THROWS_AS(HazardModel::decline(-0.1), InvalidArgument);
  CHECK_THROWS_AS(HazardModel::sigmoid(0.3, 110.0), InvalidArgument);
  CHECK_THROWS_AS(HazardModel::hard_limit(115, {0.0, 0.085}), InvalidArgument);
  CHECK_THROWS_AS(HazardModel::life_table({}), DataError);
}

TEST_CASE("cumulative_survival examples") {
  SUBCASE("coin toss to 150") {
    const auto m = HazardModel::plateau(0.5, 110.0);
    const double s = cumulative_survival(m, 110.0, 150.0);
    CHECK(std::fabs(s - 9.094947017729282379e-13) / 9.094947017729282e-13 <
          1e-12);
  }
  SUBCASE("empty interval") {
    CHECK(cumulative_survival(HazardModel::sigmoid(), 110.0, 110.0) == 1.0);
  }
  SUBCASE("annual death 0.47 over 15 years") {
    const auto m = HazardModel::plateau(0.47, 110.0);
    CHECK(cumulative_survival(m, 110.0, 125.0) ==
          doctest::Approx(7.3137151889028619e-5).epsilon(1e-12));
  }
  SUBCASE("reversed interval") {
    CHECK_THROWS_AS(cumulative_survival(HazardModel::plateau(), 120.0, 110.0),
                    InvalidArgument);
  }
  SUBCASE("fractional years are pro-rated") {
    const auto m = HazardModel::plateau(0.5, 110.0);
    CHECK(cumulative_survival(m, 110.0, 110.5) ==
          doctest::Approx(std::sqrt(0.5)));
    CHECK(cumulative_survival(m, 110.25, 112.75) ==
          doctest::Approx(std::pow(0.5, 2.5)));
  }
}

TEST_CASE("plateau closed form s^k holds exactly for k <= 64") {
  for (double q : {0.5, 0.53, 0.47, 0.25}) {
    const auto m = HazardModel::plateau(q, 110.0);
    const double s = 1.0 - q;
    double expected = 1.0;
    for (int k = 1; k <= 64; ++k) {
      expected *= s;
      CHECK(cumulative_survival(m, 110.0, 110.0 + k) == expected);
    }
  }
}

TEST_CASE("property: q in [0,1], telescoping, zero survival iff q = 1") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> age(0.0, 200.0);
  for (int trial = 0; trial < 60; ++trial) {
    for (const auto& m : fuzz_models(rng)) {
      for (int i = 0; i < 20; ++i) {
        const double q = m.annual_death_prob(age(rng));
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
      }
      double a = 100.0 + std::floor(age(rng) / 10.0);
      double b = a + std::floor(age(rng) / 20.0);
      double c = b + std::floor(age(rng) / 20.0);
      const double whole = cumulative_survival(m, a, c);
      const double split =
          cumulative_survival(m, a, b) * cumulative_survival(m, b, c);
      const double factors = c - a + 1.0;
      CHECK(std::fabs(whole - split) <=
            factors * std::numeric_limits<double>::epsilon() * whole +
                std::numeric_limits<double>::denorm_min());

      bool hits_one = false;
      for (double y = std::floor(a); y < c; y += 1.0) {
        hits_one = hits_one || m.annual_death_prob(y) == 1.0;
      }
      CHECK((whole == 0.0) == hits_one);

      const auto end = m.endpoint();
      if (end) {
        CHECK(m.annual_death_prob(*end) == 1.0);
      }
    }
  }
}

TEST_CASE("endpoint presence matches q = 1 somewhere") {
  CHECK(HazardModel::hard_limit(115).endpoint() == 115.0);
  CHECK_FALSE(HazardModel::plateau(0.53).endpoint().has_value());
  CHECK_FALSE(HazardModel::sigmoid(1.0).endpoint().has_value());
  CHECK_FALSE(HazardModel::decline().endpoint().has_value());
  CHECK(HazardModel::plateau(1.0, 112.0).endpoint() == 112.0);
  LifeTable t{{{113, 0.6}, {114, 0.8}, {115, 1.0}}};
  CHECK(HazardModel::life_table(t).endpoint() == 115.0);
  // Beyond 1e6 the Sigmoid is saturated but still below 1.
  for (double x : {200.0, 1e3, 1e6, 1e12}) {
    CHECK(HazardModel::sigmoid(1.0).annual_death_prob(x) < 1.0);
  }
}

TEST_CASE("trajectory_table") {
  SUBCASE("plateau rows") {
    const auto m = HazardModel::plateau(0.53, 110.0);
    const auto rows = trajectory_table(m, 100.0, 120.0, 1.0);
    REQUIRE(rows.size() == 21);
    for (const auto& r : rows) {
      if (r.age >= 110.0) CHECK(r.annual_death_prob == 0.53);
    }
  }
  SUBCASE("hard limit rows") {
    const auto rows =
        trajectory_table(HazardModel::hard_limit(115), 110.0, 120.0, 1.0);
    for (const auto& r : rows) {
      if (r.age >= 115.0) CHECK(r.annual_death_prob == 1.0);
    }
  }
  SUBCASE("sigmoid strictly increasing and below 1") {
    // Logistic evaluated independently from the fitted parameters.
    const auto m = HazardModel::sigmoid(1.0, 110.0);
    const auto rows = trajectory_table(m, 30.0, 200.0, 1.0);
    REQUIRE(rows.size() == 171);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].annual_death_prob > rows[i - 1].annual_death_prob);
    }
    CHECK(rows.back().annual_death_prob < 1.0);
    const double k = m.logistic_slope();
    const double x0 = m.logistic_midpoint();
    CHECK(rows.back().annual_death_prob ==
          doctest::Approx(1.0 / (1.0 + std::exp(-k * (200.0 - x0)))));
  }
  SUBCASE("bad step") {
    CHECK_THROWS_AS(trajectory_table(HazardModel::plateau(), 100, 120, 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(trajectory_table(HazardModel::plateau(), 100, 120, -1.0),
                    InvalidArgument);
    CHECK_THROWS_AS(trajectory_table(HazardModel::plateau(), 120, 100, 1.0),
                    InvalidArgument);
  }
}

TEST_CASE("variant names round-trip") {
  for (auto v : {Variant::kHardLimit, Variant::kPlateau, Variant::kDecline,
                 Variant::kSigmoid, Variant::kLifeTable}) {
    CHECK(parse_variant(to_string(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("gamma"), InvalidArgument);
}
