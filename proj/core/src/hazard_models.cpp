#include "mradlab/hazard_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "mradlab/errors.hpp"

namespace mradlab {
namespace {

// Largest double strictly below 1.
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2;

void check_gompertz(const GompertzParams& g) {
  if (!(g.a > 0.0) || !std::isfinite(g.a)) {
    throw InvalidArgument("gompertz_a must be finite and > 0");
  }
  if (!(g.b > 0.0) || !std::isfinite(g.b)) {
    throw InvalidArgument("gompertz_b must be finite and > 0");
  }
}

void check_transition(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw InvalidArgument("transition_age must be finite and >= 0");
  }
}

// Integrated Gompertz hazard over [x, x + 1).
double gompertz_year_hazard(const GompertzParams& g, double age) {
  return (g.a / g.b) * std::exp(g.b * age) * std::expm1(g.b);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kHardLimit:
      return "hard-limit";
    case Variant::kPlateau:
      return "plateau";
    case Variant::kDecline:
      return "decline";
    case Variant::kSigmoid:
      return "sigmoid";
    case Variant::kLifeTable:
      return "life-table";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  const auto n = lower(name);
  if (n == "hard-limit" || n == "hardlimit" || n == "hard_limit" ||
      n == "limited") {
    return Variant::kHardLimit;
  }
  if (n == "plateau") return Variant::kPlateau;
  if (n == "decline") return Variant::kDecline;
  if (n == "sigmoid") return Variant::kSigmoid;
  if (n == "life-table" || n == "lifetable" || n == "life_table") {
    return Variant::kLifeTable;
  }
  throw InvalidArgument("unknown model variant '" + std::string(name) + "'");
}

GompertzParams default_gompertz() {
  constexpr double kSlope = 0.085;
  constexpr double kAnchorAge = 110.0;
  constexpr double kAnchorQ = 0.53;
  const double a = -std::log1p(-kAnchorQ) * kSlope /
                   (std::exp(kSlope * kAnchorAge) * std::expm1(kSlope));
  return {a, kSlope};
}

double gompertz_annual_prob(const GompertzParams& g, double age) {
  return std::min(-std::expm1(-gompertz_year_hazard(g, age)), kBelowOne);
}

HazardModel HazardModel::hard_limit(int limit_age, GompertzParams g) {
  check_gompertz(g);
  if (limit_age < 0) throw InvalidArgument("limit age must be >= 0");
  HazardModel m;
  m.variant_ = Variant::kHardLimit;
  m.gompertz_ = g;
  m.transition_age_ = limit_age;
  return m;
}

HazardModel HazardModel::plateau(double plateau_q, double transition_age,
                                 GompertzParams g) {
  check_gompertz(g);
  check_transition(transition_age);
  if (!(plateau_q > 0.0 && plateau_q <= 1.0)) {
    throw InvalidArgument("plateau_q must lie in (0, 1]");
  }
  HazardModel m;
  m.variant_ = Variant::kPlateau;
  m.gompertz_ = g;
  m.transition_age_ = transition_age;
  m.plateau_q_ = plateau_q;
  return m;
}

HazardModel HazardModel::decline(double decline_rate, double transition_age,
                                 GompertzParams g) {
  check_gompertz(g);
  check_transition(transition_age);
  if (!(decline_rate > 0.0) || !std::isfinite(decline_rate)) {
    throw InvalidArgument("decline_rate must be finite and > 0");
  }
  HazardModel m;
  m.variant_ = Variant::kDecline;
  m.gompertz_ = g;
  m.transition_age_ = transition_age;
  m.decline_rate_ = decline_rate;
  m.decline_start_q_ = gompertz_annual_prob(g, transition_age);
  return m;
}

HazardModel HazardModel::sigmoid(double asymptote, double transition_age,
                                 GompertzParams g) {
  check_gompertz(g);
  check_transition(transition_age);
  if (!(asymptote > 0.0 && asymptote <= 1.0)) {
    throw InvalidArgument("asymptote must lie in (0, 1]");
  }
  const double hazard = gompertz_year_hazard(g, transition_age);
  const double q = -std::expm1(-hazard);
  if (!(q < asymptote)) {
    throw InvalidArgument(
        "Gompertz q at the transition age must be below the asymptote");
  }
  // Match value and slope of the Gompertz segment at the transition age.
  // Logistic: q' = k q (1 - q / c).
  const double slope = (1.0 - q) * g.b * hazard;
  const double k = slope / (q * (1.0 - q / asymptote));
  HazardModel m;
  m.variant_ = Variant::kSigmoid;
  m.gompertz_ = g;
  m.transition_age_ = transition_age;
  m.asymptote_ = asymptote;
  m.logistic_k_ = k;
  m.logistic_x0_ = transition_age - std::log(q / (asymptote - q)) / k;
  return m;
}

HazardModel HazardModel::life_table(LifeTable table) {
  table.validate();
  HazardModel m;
  m.variant_ = Variant::kLifeTable;
  m.table_ = std::move(table);
  return m;
}

double HazardModel::annual_death_prob(double age) const {
  if (!(age >= 0.0) || !std::isfinite(age)) {
    throw InvalidArgument("age must be finite and >= 0");
  }
  switch (variant_) {
    case Variant::kHardLimit:
      if (age >= transition_age_) return 1.0;
      return gompertz_annual_prob(gompertz_, age);
    case Variant::kPlateau:
      if (age >= transition_age_) return plateau_q_;
      return gompertz_annual_prob(gompertz_, age);
    case Variant::kDecline:
      if (age > transition_age_) {
        return decline_start_q_ *
               std::exp(-decline_rate_ * (age - transition_age_));
      }
      return gompertz_annual_prob(gompertz_, age);
    case Variant::kSigmoid: {
      if (age < transition_age_) return gompertz_annual_prob(gompertz_, age);
      const double v =
          asymptote_ / (1.0 + std::exp(-logistic_k_ * (age - logistic_x0_)));
      return std::min(v, std::nextafter(asymptote_, 0.0));
    }
    case Variant::kLifeTable: {
      const auto& rows = table_.rows;
      const double first = rows.front().age;
      const double idx = std::floor(age) - first;
      if (idx <= 0.0) return rows.front().q;
      if (idx >= static_cast<double>(rows.size() - 1)) return rows.back().q;
      return rows[static_cast<std::size_t>(idx)].q;
    }
  }
  return 0.0;
}

std::optional<double> HazardModel::endpoint() const {
  switch (variant_) {
    case Variant::kHardLimit:
      return transition_age_;
    case Variant::kPlateau:
      if (plateau_q_ == 1.0) return std::ceil(transition_age_);
      return std::nullopt;
    case Variant::kLifeTable:
      for (const auto& row : table_.rows) {
        if (row.q == 1.0) {
          // Constant extrapolation below the table start.
          return row.age == table_.rows.front().age ? 0.0
                                                    : static_cast<double>(row.age);
        }
      }
      return std::nullopt;
    case Variant::kDecline:
    case Variant::kSigmoid:
      return std::nullopt;
  }
  return std::nullopt;
}

double cumulative_survival(const HazardModel& model, double from_age,
                           double to_age) {
  if (!std::isfinite(from_age) || !std::isfinite(to_age) || from_age < 0.0) {
    throw InvalidArgument("survival interval must be finite and non-negative");
  }
  if (from_age > to_age) {
    throw InvalidArgument("survival interval is reversed");
  }
  double survival = 1.0;
  double age = from_age;
  while (age < to_age) {
    const double year = std::floor(age);
    const double next = std::min(year + 1.0, to_age);
    const double fraction = next - age;
    const double annual = 1.0 - model.annual_death_prob(year);
    survival *= fraction == 1.0 ? annual : std::pow(annual, fraction);
    if (survival == 0.0) return 0.0;
    age = next;
  }
  return survival;
}

std::vector<TrajectoryRow> trajectory_table(const HazardModel& model,
                                            double age_start, double age_end,
                                            double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("step must be finite and > 0");
  }
  if (!(age_start < age_end)) {
    throw InvalidArgument("age_start must be below age_end");
  }
  // Tolerate accumulated rounding so that e.g. [100, 120] step 1 has 21 rows.
  const auto count = static_cast<std::size_t>(
      std::floor((age_end - age_start) / step + 1e-9)) + 1;
  std::vector<TrajectoryRow> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double age = age_start + static_cast<double>(i) * step;
    rows.push_back({age, model.annual_death_prob(age)});
  }
  return rows;
}

}  // namespace mradlab
