#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mradlab/data_io.hpp"
#include "mradlab/errors.hpp"
#include "mradlab/hazard_models.hpp"
#include "mradlab/philox.hpp"
#include "mradlab/tail_inference.hpp"
#include "mradlab/trend_analysis.hpp"

using namespace mradlab;

namespace {

// Julian day number (Fliegel and Van Flandern), independent of the library's
// calendar arithmetic.
long jdn(long y, long m, long d) {
  const long a = (14 - m) / 12;
  const long yy = y + 4800 - a;
  const long mm = m + 12 * a - 3;
  return d + (153 * mm + 2) / 5 + 365 * yy + yy / 4 - yy / 100 + yy / 400 -
         32045;
}

const std::string kFixture = std::string(MRADLAB_DATA_DIR) + "/idl_synthetic.csv";

}  // namespace

TEST_CASE("age_at_death") {
  CHECK(age_at_death({1875, 2, 21}, {1997, 8, 4}) ==
        doctest::Approx(44724 / 365.2425).epsilon(1e-15));
  CHECK(age_at_death({1875, 2, 21}, {1997, 8, 4}) ==
        doctest::Approx(122.45015298055401).epsilon(1e-14));
  CHECK(age_at_death({2000, 1, 1}, {2001, 1, 1}) ==
        doctest::Approx(1.0020739645577939).epsilon(1e-15));
  CHECK(age_at_death({1999, 5, 5}, {1999, 5, 5}) == 0.0);
  CHECK(age_at_death({1900, 2, 28}, {1900, 3, 1}) ==
        doctest::Approx(0.002737907006988508).epsilon(1e-14));
  CHECK(age_at_death({2000, 2, 28}, {2000, 3, 1}) ==
        doctest::Approx(2 / 365.2425).epsilon(1e-14));
  CHECK_THROWS_AS(age_at_death({2000, 1, 2}, {2000, 1, 1}), InvalidArgument);
}

TEST_CASE("day numbers agree with an independent oracle") {
  PhiloxStream s(2024, 0);
  const long epoch = jdn(1970, 1, 1);
  for (int i = 0; i < 10000; ++i) {
    const long y1 = 1800 + static_cast<long>(s.next_below(300));
    const long m1 = 1 + static_cast<long>(s.next_below(12));
    const long d1 = 1 + static_cast<long>(s.next_below(28));
    const long y2 = y1 + static_cast<long>(s.next_below(130));
    const long m2 = 1 + static_cast<long>(s.next_below(12));
    const long d2 = 1 + static_cast<long>(s.next_below(28));
    const Date a{static_cast<int>(y1), static_cast<unsigned>(m1),
                 static_cast<unsigned>(d1)};
    const Date b{static_cast<int>(y2), static_cast<unsigned>(m2),
                 static_cast<unsigned>(d2)};
    REQUIRE(to_day_number(a) == jdn(y1, m1, d1) - epoch);
    REQUIRE(from_day_number(to_day_number(a)) == a);
    if (b >= a) {
      REQUIRE(age_at_death(a, b) ==
              static_cast<double>(jdn(y2, m2, d2) - jdn(y1, m1, d1)) /
                  365.2425);
    }
  }
}

TEST_CASE("ISO dates") {
  CHECK(parse_iso_date("2000-02-29") == Date{2000, 2, 29});
  CHECK(format_iso_date({1875, 2, 21}) == "1875-02-21");
  for (const char* bad : {"1997-13-40", "1900-02-29", "1997-2-01",
                          "97-02-01", "1997/02/01", "1997-02-01x", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_iso_date(bad), InvalidArgument);
  }
}

TEST_CASE("parse_records") {
  SUBCASE("Calment row") {
    const auto r = parse_records(
        "id,birth_date,death_date,country,validated\n"
        "JC1,1875-02-21,1997-08-04,FR,true\n");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].age_at_death ==
          doctest::Approx(122.45015298055401).epsilon(1e-14));
    CHECK(r.records[0].country == "FR");
    CHECK(r.records[0].validated);
    CHECK(r.records[0].death_year() == 1997);
  }
  SUBCASE("same birth and death date") {
    const auto r = parse_records(
        "id,birth_date,death_date,country,validated\nA,1990-01-01,1990-01-01,"
        "JP,false\n");
    CHECK(r.records[0].age_at_death == 0.0);
    CHECK_FALSE(r.records[0].validated);
  }
  SUBCASE("CRLF and blank lines are accepted") {
    const auto r = parse_records(
        "id,birth_date,death_date,country,validated\r\n\r\n"
        "A,1890-01-01,2001-01-01,US,true\r\n");
    CHECK(r.records.size() == 1);
  }
  SUBCASE("positioned errors") {
    const auto position = [](const std::string& body) {
      try {
        parse_records("id,birth_date,death_date,country,validated\n"
                      "OK,1890-01-01,2001-01-01,US,true\n" + body);
      } catch (const ParseError& e) {
        return std::pair{e.line(), e.column()};
      }
      return std::pair<std::size_t, std::size_t>{0, 0};
    };
    CHECK(position("X,1880-01-01,1997-13-40,FR,true\n") == std::pair<std::size_t, std::size_t>{3, 3});
    CHECK(position("X,18800101,1997-01-01,FR,true\n") == std::pair<std::size_t, std::size_t>{3, 2});
    CHECK(position("X,1880-01-01,1997-01-01,FR,maybe\n") == std::pair<std::size_t, std::size_t>{3, 5});
    CHECK(position("X,1990-01-01,1980-01-01,FR,true\n") == std::pair<std::size_t, std::size_t>{3, 3});
    CHECK(position("X,1990-01-01,1980-01-01,FR\n").first == 3);
    CHECK(position(",1880-01-01,1997-01-01,FR,true\n") == std::pair<std::size_t, std::size_t>{3, 1});
  }
  SUBCASE("bad header") {
    CHECK_THROWS_AS(parse_records("id,birth,death,country,validated\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_records(""), ParseError);
  }
  SUBCASE("duplicate ids warn") {
    const auto r = parse_records(
        "id,birth_date,death_date,country,validated\n"
        "A,1890-01-01,2001-01-01,US,true\n"
        "A,1891-01-01,2002-01-01,US,true\n");
    CHECK(r.records.size() == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("duplicate id 'A'") != std::string::npos);
  }
}

TEST_CASE("records round trip byte-for-byte") {
  const std::string text = read_file(kFixture);
  const auto parsed = parse_records(text);
  std::ostringstream out;
  write_records(out, parsed.records);
  CHECK(out.str() == text);
}

TEST_CASE("synthetic IDL-like fixture") {
  const auto parsed = parse_records(read_file(kFixture));
  CHECK(parsed.warnings.empty());
  const auto x = excesses(parsed.records, 115.0);
  CHECK(x.size() == 9);
  const auto over110 = excesses(parsed.records, 110.0);
  std::size_t above5 = 0;
  for (double v : over110) above5 += v > 5.0;
  CHECK(above5 == 9);

  const auto series = yearly_extremes(parsed.records);
  std::uint64_t min_n = 1000;
  double top = 0.0;
  for (const auto& row : series.rows) {
    min_n = std::min(min_n, row.n_t);
    top = std::max(top, row.mrad);
  }
  CHECK(series.rows.size() == 48);
  CHECK(min_n == 1);
  CHECK(top == doctest::Approx(122.45015298055401).epsilon(1e-14));
  CHECK_THROWS_AS(read_file(std::string(MRADLAB_DATA_DIR) + "/missing.csv"),
                  DataError);
}

TEST_CASE("life tables") {
  SUBCASE("two rows") {
    const auto t = parse_life_table("age,qx\n110,0.5\n111,0.53\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1].age == 111);
    CHECK(t.rows[1].q == 0.53);
  }
  SUBCASE("range and gap errors") {
    CHECK_THROWS_AS(parse_life_table("age,qx\n110,1.2\n"), DataError);
    CHECK_THROWS_AS(parse_life_table("age,qx\n110,-0.1\n"), DataError);
    CHECK_THROWS_AS(parse_life_table("age,qx\n110,0.5\n112,0.5\n"), DataError);
    CHECK_THROWS_AS(parse_life_table("age,qx\n"), DataError);
    CHECK_THROWS_AS(parse_life_table("age,qx\n110.5,0.5\n"), ParseError);
    CHECK_THROWS_AS(parse_life_table("age,qx\n110,abc\n"), ParseError);
  }
  SUBCASE("table ending in q = 1 has an endpoint") {
    const auto text = read_file(std::string(MRADLAB_DATA_DIR) +
                                "/life_table_hmd_like.csv");
    const auto t = parse_life_table(text);
    const auto m = HazardModel::life_table(t);
    REQUIRE(m.endpoint());
    CHECK(*m.endpoint() == 115.0);
    std::ostringstream out;
    write_life_table(out, t);
    CHECK(out.str() == text);
  }
}

TEST_CASE("other CSV writers") {
  SUBCASE("series with missing ranks") {
    YearlyExtremeSeries s;
    s.rows.push_back({1995, 2, 114.5, {112.25, std::nullopt, std::nullopt,
                                       std::nullopt}});
    std::ostringstream out;
    write_series_csv(out, s);
    CHECK(out.str() ==
          "year,n_t,mrad,rank2,rank3,rank4,rank5\n1995,2,114.5,112.25,,,\n");
  }
  SUBCASE("hazard rows skip empty ages") {
    std::vector<std::optional<HazardEstimate>> rows{
        HazardEstimate{110, 5, 10, 0.5, 0.25, 0.75}, std::nullopt};
    std::ostringstream out;
    write_hazard_csv(out, rows);
    CHECK(out.str() == "age,n,d,q_hat,ci_low,ci_high\n110,10,5,0.5,0.25,0.75\n");
  }
  SUBCASE("trajectory") {
    const std::vector<TrajectoryRow> rows{{110.0, 0.53}, {111.0, 0.53}};
    std::ostringstream out;
    write_trajectory_csv(out, rows);
    CHECK(out.str() == "age,annual_death_prob\n110,0.53\n111,0.53\n");
  }
}

TEST_CASE("format_number round trips") {
  PhiloxStream s(77, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = (s.next_double() - 0.5) * std::pow(10.0, s.next_below(40) - 20.0);
    REQUIRE(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(125.0) == "125");
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
