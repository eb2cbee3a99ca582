#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mradlab/records.hpp"

namespace mradlab {

enum class Variant { kHardLimit, kPlateau, kDecline, kSigmoid, kLifeTable };

std::string_view to_string(Variant variant);
// Accepts "hard-limit"/"hardlimit", "plateau", "decline", "sigmoid",
// "life-table"/"lifetable" (case-insensitive).
Variant parse_variant(std::string_view name);

// Continuous Gompertz hazard h(x) = a * exp(b * x).
struct GompertzParams {
  double a = 0.0;  // baseline hazard per year at age 0
  double b = 0.0;  // log-slope per year of age
};

// b = 0.085 with a solved so that the annual death probability at age 110 is
// exactly 0.53.
GompertzParams default_gompertz();

// Annual death probability implied by the Gompertz hazard over [x, x + 1):
// 1 - exp(-(a/b) (e^{b(x+1)} - e^{bx})). Never returns exactly 1.
double gompertz_annual_prob(const GompertzParams& g, double age);

// A late-life mortality trajectory expressed as an annual death probability
// q(x). Immutable once built; all members are const and thread-safe.
//
// Every variant follows the Gompertz curve below its transition age and then:
//   HardLimit  q = 1 from the (integer) limit age on
//   Plateau    q = plateau_q from the transition age on
//   Decline    q = q_G(x_p) * exp(-rate * (x - x_p))
//   Sigmoid    logistic q = c / (1 + exp(-k (x - x0))), C1-continuous at x_p
//   LifeTable  q read from the table, constant outside its age range
class HazardModel {
 public:
  static HazardModel hard_limit(int limit_age = 115,
                                GompertzParams g = default_gompertz());
  static HazardModel plateau(double plateau_q = 0.53,
                             double transition_age = 110.0,
                             GompertzParams g = default_gompertz());
  static HazardModel decline(double decline_rate = 0.1,
                             double transition_age = 110.0,
                             GompertzParams g = default_gompertz());
  static HazardModel sigmoid(double asymptote = 1.0,
                             double transition_age = 110.0,
                             GompertzParams g = default_gompertz());
  static HazardModel life_table(LifeTable table);

  Variant variant() const { return variant_; }
  const GompertzParams& gompertz() const { return gompertz_; }
  double transition_age() const { return transition_age_; }
  double plateau_q() const { return plateau_q_; }
  double decline_rate() const { return decline_rate_; }
  double asymptote() const { return asymptote_; }
  // Logistic slope and midpoint fitted at construction (Sigmoid only).
  double logistic_slope() const { return logistic_k_; }
  double logistic_midpoint() const { return logistic_x0_; }
  const LifeTable& table() const { return table_; }

  // Throws InvalidArgument for negative or non-finite ages.
  double annual_death_prob(double age) const;

  // Smallest age with q = 1, if any.
  std::optional<double> endpoint() const;

 private:
  HazardModel() = default;

  Variant variant_ = Variant::kPlateau;
  GompertzParams gompertz_;
  double transition_age_ = 110.0;
  double plateau_q_ = 0.0;
  double decline_rate_ = 0.0;
  double asymptote_ = 1.0;
  double logistic_k_ = 0.0;
  double logistic_x0_ = 0.0;
  double decline_start_q_ = 0.0;
  LifeTable table_;
};

inline double annual_death_prob(const HazardModel& model, double age) {
  return model.annual_death_prob(age);
}

inline std::optional<double> endpoint(const HazardModel& model) {
  return model.endpoint();
}

// Probability of surviving from from_age to to_age: the product over whole
// years y of (1 - q(y)), with partial boundary years pro-rated as
// (1 - q(y))^fraction. Throws InvalidArgument on a reversed interval.
double cumulative_survival(const HazardModel& model, double from_age,
                           double to_age);

struct TrajectoryRow {
  double age = 0.0;
  double annual_death_prob = 0.0;
};

// Evenly spaced rows from age_start to age_end inclusive (when the end falls
// on the grid). Throws InvalidArgument for step <= 0 or age_start >= age_end.
std::vector<TrajectoryRow> trajectory_table(const HazardModel& model,
                                            double age_start, double age_end,
                                            double step);

}  // namespace mradlab
