#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mradlab/hazard_models.hpp"
#include "mradlab/records.hpp"
#include "mradlab/survival_engine.hpp"
#include "mradlab/trend_analysis.hpp"

namespace mradlab {

// Monte Carlo setup. Individual i of the plan (plan order: years ascending,
// then 0..count-1) in replication r draws from Philox4x32-10 with key = seed
// and counter = (step, i, r_lo, r_hi). Step 0 places the birthday; step k >= 1
// decides the k-th year of life past base_age. Results therefore depend only
// on (seed, r, i), never on thread count or scheduling.
struct SimulationConfig {
  HazardModel model = HazardModel::plateau();
  ExposurePlan plan = ExposurePlan::single_individual();
  std::uint64_t seed = 0;
  std::uint64_t replications = 1;
  // Lifetimes still running at this age are stopped (censored) here.
  double max_age = 250.0;
  std::size_t threads = 0;  // 0 = default_thread_count()
  std::string country = "SIM";

  // Throws InvalidArgument for replications < 1 or max_age <= base_age.
  void validate() const;
};

// Age at death of one individual. Within year y the hazard is constant, so
// the death time inside a (possibly partial) year segment of length f is
// drawn from (1 - (1 - q)^t) / (1 - (1 - q)^f). Simulation halts early once
// the individual is alive at stop_age, returning stop_age.
double simulate_age(const SimulationConfig& config, std::uint64_t replication,
                    std::uint64_t individual,
                    double stop_age = std::numeric_limits<double>::infinity());

// Ages at death for every individual of one replication, in plan order.
std::vector<double> simulate_ages(const SimulationConfig& config,
                                  std::uint64_t replication);

// Death records for every replication (replication-major, plan order), with
// ids "sim-<replication>-<individual>". Dates are derived from the exact
// ages rounded to whole days.
std::vector<LifeRecord> simulate_lifetimes(const SimulationConfig& config);

// yearly_extremes over one replication's records, threshold = base age.
YearlyExtremeSeries simulate_mrad_series(const SimulationConfig& config,
                                         std::uint64_t replication = 0,
                                         int k_max = 5);

struct ExceedanceEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t replications = 0;
};

// Fraction of replications in which somebody is alive at target_age, with
// binomial standard error. Needs replications >= 100.
ExceedanceEstimate empirical_exceedance(const SimulationConfig& config,
                                        double target_age);

}  // namespace mradlab
