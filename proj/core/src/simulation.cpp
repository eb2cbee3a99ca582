#include "mradlab/simulation.hpp"

#include <cmath>

#include "mradlab/dates.hpp"
#include "mradlab/errors.hpp"
#include "mradlab/parallel.hpp"
#include "mradlab/philox.hpp"

namespace mradlab {
namespace {

Philox4x32::Counter counter(std::uint32_t step, std::uint64_t individual,
                            std::uint64_t replication) {
  return {step, static_cast<std::uint32_t>(individual),
          static_cast<std::uint32_t>(replication),
          static_cast<std::uint32_t>(replication >> 32)};
}

// Plan years per individual index.
std::vector<int> individual_years(const ExposurePlan& plan) {
  std::vector<int> years;
  years.reserve(plan.total());
  for (const auto& [year, count] : plan.per_year_count) {
    years.insert(years.end(), count, year);
  }
  return years;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

void SimulationConfig::validate() const {
  plan.validate();
  if (replications < 1) throw InvalidArgument("replications must be >= 1");
  if (!(max_age > plan.base_age)) {
    throw InvalidArgument("max_age must exceed the plan's base age");
  }
  if (plan.total() > 0xffffffffULL) {
    throw InvalidArgument("plans are limited to 2^32 individuals");
  }
}

double simulate_age(const SimulationConfig& config, std::uint64_t replication,
                    std::uint64_t individual, double stop_age) {
  const auto key = key_from_seed(config.seed);
  const double limit = std::min(stop_age, config.max_age);
  double age = config.plan.base_age;
  std::uint32_t step = 1;
  while (age < limit) {
    const double year = std::floor(age);
    const double segment = std::min(year + 1.0, config.max_age) - age;
    const double q = config.model.annual_death_prob(year);
    const auto block =
        Philox4x32::generate(counter(step++, individual, replication), key);
    if (q >= 1.0) return age;
    if (q > 0.0) {
      const double log_survive = std::log1p(-q);
      const double p_die = -std::expm1(segment * log_survive);
      if (unit_open(block[0], block[1]) < p_die) {
        const double v = unit_open(block[2], block[3]);
        const double t = std::log1p(-v * p_die) / log_survive;
        return age + std::min(t, segment);
      }
    }
    age += segment;
  }
  return limit;
}

std::vector<double> simulate_ages(const SimulationConfig& config,
                                  std::uint64_t replication) {
  config.validate();
  const std::uint64_t n = config.plan.total();
  std::vector<double> ages(n);
  parallel_for(n, config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ages[i] = simulate_age(config, replication, i);
    }
  });
  return ages;
}

namespace {

// Records for replications [first, last).
std::vector<LifeRecord> make_records(const SimulationConfig& config,
                                     std::uint64_t first, std::uint64_t last) {
  const auto years = individual_years(config.plan);
  const std::uint64_t n = years.size();
  const auto key = key_from_seed(config.seed);
  const auto base_days =
      static_cast<std::int64_t>(std::llround(config.plan.base_age * kDaysPerYear));
  std::vector<LifeRecord> records(n * (last - first));
  parallel_for(records.size(), config.threads,
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint64_t rep = first + k / n;
      const std::uint64_t i = k % n;
      const double age = simulate_age(config, rep, i);
      const auto block = Philox4x32::generate(counter(0, i, rep), key);
      const int year = years[i];
      const double days_in_year = is_leap(year) ? 366.0 : 365.0;
      const auto day = static_cast<std::int64_t>(
          unit_open(block[0], block[1]) * days_in_year);
      const std::int64_t reached = to_day_number(Date{year, 1, 1}) + day;
      const std::int64_t born = reached - base_days;
      const std::int64_t died =
          born + static_cast<std::int64_t>(std::llround(age * kDaysPerYear));
      records[k] = make_record(
          "sim-" + std::to_string(rep) + "-" + std::to_string(i),
          from_day_number(born), from_day_number(died), config.country, true);
    }
  });
  return records;
}

}  // namespace

std::vector<LifeRecord> simulate_lifetimes(const SimulationConfig& config) {
  config.validate();
  return make_records(config, 0, config.replications);
}

YearlyExtremeSeries simulate_mrad_series(const SimulationConfig& config,
                                         std::uint64_t replication, int k_max) {
  config.validate();
  if (replication >= config.replications) {
    throw InvalidArgument("replication index out of range");
  }
  const auto records = make_records(config, replication, replication + 1);
  return yearly_extremes(records, k_max, std::nullopt, config.plan.base_age);
}

ExceedanceEstimate empirical_exceedance(const SimulationConfig& config,
                                        double target_age) {
  config.validate();
  if (config.replications < 100) {
    throw InvalidArgument("empirical exceedance needs >= 100 replications");
  }
  if (!(target_age >= config.plan.base_age)) {
    throw InvalidArgument("target age is below the plan's base age");
  }
  if (target_age > config.max_age) {
    throw InvalidArgument("target age lies beyond the simulation's max_age");
  }
  const std::uint64_t n = config.plan.total();
  const std::size_t threads =
      config.threads == 0 ? default_thread_count() : config.threads;
  std::vector<std::uint64_t> hits(threads, 0);
  const std::size_t chunk =
      (config.replications + threads - 1) / threads;
  parallel_for(threads, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t first = t * chunk;
      const std::uint64_t last =
          std::min<std::uint64_t>(config.replications, first + chunk);
      for (std::uint64_t rep = first; rep < last; ++rep) {
        for (std::uint64_t i = 0; i < n; ++i) {
          if (simulate_age(config, rep, i, target_age) >= target_age) {
            ++hits[t];
            break;
          }
        }
      }
    }
  });
  ExceedanceEstimate e;
  e.replications = config.replications;
  for (auto h : hits) e.hits += h;
  const double r = static_cast<double>(config.replications);
  e.estimate = static_cast<double>(e.hits) / r;
  e.standard_error = std::sqrt(e.estimate * (1.0 - e.estimate) / r);
  return e;
}

}  // namespace mradlab
