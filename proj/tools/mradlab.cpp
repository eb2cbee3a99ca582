// mradlab: batch front end for the mortality/MRAD analysis library.
//
// Results go to stdout as a JSON envelope, or to --out as CSV, never both.
// Exit status: 0 success, 1 usage error, 2 data or convergence error.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mradlab/data_io.hpp"
#include "mradlab/effective_limit.hpp"
#include "mradlab/errors.hpp"
#include "mradlab/hazard_models.hpp"
#include "mradlab/json_io.hpp"
#include "mradlab/parallel.hpp"
#include "mradlab/repro.hpp"
#include "mradlab/scenario_config.hpp"
#include "mradlab/simulation.hpp"
#include "mradlab/survival_engine.hpp"
#include "mradlab/tail_inference.hpp"
#include "mradlab/trend_analysis.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mradlab;

namespace {

// Usage problems detected after CLI11 parsing (bad combinations of flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string command;
  std::vector<std::string> args;
  std::vector<fs::path> inputs;
  std::string out;  // CSV destination, empty for JSON on stdout
};

Invocation g_inv;

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Fingerprint of the arguments and every input file's bytes.
std::string inputs_hash() {
  std::string bytes = g_inv.command;
  for (const auto& a : g_inv.args) bytes += '\0' + a;
  for (const auto& p : g_inv.inputs) bytes += '\0' + read_file(p);
  return hex64(fnv1a64(bytes));
}

std::string read_input(const fs::path& path) {
  g_inv.inputs.push_back(path);
  return read_file(path);
}

void emit_json(const json& result) {
  std::cout << make_envelope(g_inv.command, inputs_hash(), result.dump())
            << '\n';
}

json parsed(const std::string& text) { return json::parse(text); }

// The CSV is rendered completely before the file is opened, so a failure
// never leaves a partial file behind.
void emit_csv(const std::string& csv) {
  const fs::path target(g_inv.out);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw DataError("cannot write '" + target.string() + "'");
    f << csv;
    if (!f.flush()) throw DataError("cannot write '" + target.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot write '" + target.string() + "': " + ec.message());
  }
}

template <typename Writer>
std::string render(Writer&& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

// ---------------------------------------------------------------- models

struct ModelOptions {
  std::string name = "plateau";
  std::string scenarios;
  std::string table;
  std::optional<double> survival, death, limit_age, decline_rate, asymptote,
      transition_age, gompertz_a, gompertz_b;

  void add(CLI::App* app) {
    app->add_option("--model,--scenario", name,
                    "hard-limit | plateau | decline | sigmoid | life-table, or "
                    "a name from --scenarios")
        ->capture_default_str();
    app->add_option("--scenarios", scenarios, "scenario file (INI blocks)")
        ->check(CLI::ExistingFile);
    app->add_option("--table", table, "life table CSV (age,qx)");
    app->add_option("--survival", survival,
                    "plateau: annual survival probability past the transition");
    app->add_option("--death", death,
                    "plateau: annual death probability past the transition");
    app->add_option("--limit-age", limit_age, "hard-limit: integer age L");
    app->add_option("--decline-rate", decline_rate, "decline: decay rate");
    app->add_option("--asymptote", asymptote, "sigmoid: upper asymptote");
    app->add_option("--transition-age", transition_age,
                    "age where the variant leaves the Gompertz curve");
    app->add_option("--gompertz-a", gompertz_a, "Gompertz level a");
    app->add_option("--gompertz-b", gompertz_b, "Gompertz slope b");
  }

  HazardModel build() const {
    if (!scenarios.empty()) {
      const fs::path file(scenarios);
      std::istringstream in(read_input(file));
      const auto loader = [&](std::string_view p) {
        fs::path path(p);
        if (path.is_relative()) path = file.parent_path() / path;
        return parse_life_table(read_input(path));
      };
      for (auto& s : parse_scenarios(in, loader)) {
        if (s.name == name) {
          if (has_overrides()) {
            throw UsageError("model parameters cannot override a scenario file");
          }
          return s.model;
        }
      }
    }
    const Variant v = parse_variant(name);
    if ((survival || death) && v != Variant::kPlateau) {
      throw UsageError("--survival/--death apply to the plateau model only");
    }
    if (survival && death) {
      throw UsageError("give either --survival or --death, not both");
    }
    GompertzParams g = default_gompertz();
    if (gompertz_a) g.a = *gompertz_a;
    if (gompertz_b) g.b = *gompertz_b;
    const double xp = transition_age.value_or(110.0);
    switch (v) {
      case Variant::kHardLimit: {
        const double l = limit_age.value_or(115.0);
        if (l != std::floor(l)) throw UsageError("--limit-age must be an integer");
        return HazardModel::hard_limit(static_cast<int>(l), g);
      }
      case Variant::kPlateau: {
        double q = 0.53;
        if (survival) q = 1.0 - *survival;
        if (death) q = *death;
        return HazardModel::plateau(q, xp, g);
      }
      case Variant::kDecline:
        return HazardModel::decline(decline_rate.value_or(0.1), xp, g);
      case Variant::kSigmoid:
        return HazardModel::sigmoid(asymptote.value_or(1.0), xp, g);
      case Variant::kLifeTable:
        if (table.empty()) throw UsageError("life-table model needs --table");
        return HazardModel::life_table(parse_life_table(read_input(table)));
    }
    throw UsageError("unknown model");
  }

  bool has_overrides() const {
    return survival || death || limit_age || decline_rate || asymptote ||
           transition_age || gompertz_a || gompertz_b || !table.empty();
  }
};

json model_json(const HazardModel& m) {
  json j;
  j["variant"] = std::string(to_string(m.variant()));
  j["transition_age"] = m.transition_age();
  switch (m.variant()) {
    case Variant::kPlateau:
      j["plateau_q"] = m.plateau_q();
      break;
    case Variant::kDecline:
      j["decline_rate"] = m.decline_rate();
      break;
    case Variant::kSigmoid:
      j["asymptote"] = m.asymptote();
      break;
    default:
      break;
  }
  if (const auto e = m.endpoint()) {
    j["endpoint"] = *e;
  } else {
    j["endpoint"] = nullptr;
  }
  return j;
}

struct ExposureOptions {
  double base_age = 110.0;
  std::uint64_t individuals = 1;
  int years = 1;
  int first_year = 2000;

  void add(CLI::App* app) {
    app->add_option("--base-age", base_age, "age at which people enter")
        ->capture_default_str();
    app->add_option("--individuals", individuals,
                    "people reaching the base age per year")
        ->capture_default_str();
    app->add_option("--years", years, "number of plan years")
        ->capture_default_str();
    app->add_option("--first-year", first_year, "first plan year")
        ->capture_default_str();
  }

  ExposurePlan build() const {
    if (years < 1) throw UsageError("--years must be >= 1");
    return ExposurePlan::uniform(base_age, first_year, years, individuals);
  }
};

struct RecordOptions {
  std::string input;
  std::optional<std::string> country;
  bool include_unvalidated = false;

  void add(CLI::App* app) {
    app->add_option("--input", input, "death records CSV")->required();
    app->add_option("--country", country, "keep one country only");
    app->add_flag("--include-unvalidated", include_unvalidated,
                  "keep records flagged validated=false");
  }

  std::vector<LifeRecord> load() const {
    auto result = parse_records(read_input(input));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::vector<LifeRecord> out;
    for (auto& r : result.records) {
      if (!include_unvalidated && !r.validated) continue;
      if (country && r.country != *country) continue;
      out.push_back(std::move(r));
    }
    return out;
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

// ---------------------------------------------------------- subcommands

void add_out(CLI::App* app) {
  app->add_option("--out", g_inv.out, "write CSV here instead of JSON to stdout");
}

void require_no_out(const char* what) {
  if (!g_inv.out.empty()) {
    throw UsageError(std::string(what) + " has no CSV form; drop --out");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mradlab: mortality plateaus, effective limits and MRAD trends"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MRADLAB_VERSION);

  ModelOptions model;
  ExposureOptions exposure;
  RecordOptions records;

  // trajectories
  double from = 100.0, to = 130.0, step = 1.0;
  auto* traj = app.add_subcommand("trajectories",
                                  "annual death probability by age (plot data)");
  model.add(traj);
  traj->add_option("--from", from)->capture_default_str();
  traj->add_option("--to", to)->capture_default_str();
  traj->add_option("--step", step)->capture_default_str();
  add_out(traj);

  // limit
  double epsilon = 1e-4;
  auto* limit = app.add_subcommand("limit", "effective limit L_e for one epsilon");
  model.add(limit);
  exposure.add(limit);
  limit->add_option("--epsilon", epsilon)->capture_default_str();

  // profile
  std::string epsilons = "0.5,0.1,0.01,0.001,0.0001,1e-6,1e-9,1e-12";
  auto* profile = app.add_subcommand("profile", "effective limit for many epsilons");
  model.add(profile);
  exposure.add(profile);
  profile->add_option("--epsilons", epsilons, "comma-separated list")
      ->capture_default_str();
  add_out(profile);

  // fit-tail
  double threshold = 110.0;
  std::string family = "both";
  auto* fit_tail = app.add_subcommand(
      "fit-tail", "exponential and GPD fits to excesses over a threshold");
  records.add(fit_tail);
  fit_tail->add_option("--threshold", threshold)->capture_default_str();
  fit_tail->add_option("--family", family, "exp | gpd | both")
      ->check(CLI::IsMember({"exp", "gpd", "both"}))
      ->capture_default_str();

  // test-split
  int split_year = 0;
  auto* test_split = app.add_subcommand(
      "test-split", "LR test of equal exponential rates before/after a year");
  records.add(test_split);
  test_split->add_option("--threshold", threshold)->capture_default_str();
  test_split->add_option("--split-year", split_year,
                         "last death year of the first period")
      ->required();

  // hazard
  int age_from = 110, age_to = 120;
  auto* hazard = app.add_subcommand("hazard", "per-age death probability with CIs");
  records.add(hazard);
  hazard->add_option("--from", age_from)->capture_default_str();
  hazard->add_option("--to", age_to)->capture_default_str();
  add_out(hazard);

  // trend
  std::string field = "mrad";
  bool joined = false, linear = false;
  int permutations = 0, min_segment = 4;
  const int k_max = 5;
  std::optional<std::uint64_t> seed;
  auto* trend = app.add_subcommand(
      "trend", "yearly MRAD series and segmented or linear trend fits");
  records.add(trend);
  trend->add_option("--threshold", threshold)->capture_default_str();
  trend->add_option("--field", field, "year | n_t | mrad | rank2..rank5 | overlay[:mu]")
      ->capture_default_str();
  trend->add_flag("--joined", joined, "continuous (hinge) segmented fit");
  trend->add_flag("--linear", linear, "single line instead of a break");
  trend->add_option("--permutations", permutations,
                    "residual permutations for the break test (needs --seed)")
      ->capture_default_str();
  trend->add_option("--min-segment", min_segment)->capture_default_str();
  trend->add_option("--seed", seed);
  add_out(trend);

  // correlate
  std::string x_field = "n_t", y_field = "mrad", method = "pearson";
  auto* corr = app.add_subcommand("correlate", "correlation between series fields");
  records.add(corr);
  corr->add_option("--threshold", threshold)->capture_default_str();
  corr->add_option("--x", x_field)->capture_default_str();
  corr->add_option("--y", y_field)->capture_default_str();
  corr->add_option("--method", method, "pearson | spearman")->capture_default_str();

  // simulate
  std::uint64_t replications = 1;
  double max_age = 250.0;
  std::optional<double> target;
  auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo death records");
  model.add(sim);
  exposure.add(sim);
  sim->add_option("--seed", seed, "64-bit seed (required)")->required();
  sim->add_option("--replications", replications)->capture_default_str();
  sim->add_option("--max-age", max_age)->capture_default_str();
  sim->add_option("--target", target,
                  "also estimate P(anyone reaches this age), needs >= 100 "
                  "replications");
  std::string country_label = "SIM";
  sim->add_option("--country-label", country_label, "country written to records")
      ->capture_default_str();
  add_out(sim);

  // mrad-model
  std::string counts = "1,5,10,20,35,50";
  double mean_excess = 1.31;
  auto* mrad = app.add_subcommand(
      "mrad-model", "expected MRAD as the maximum of n_t exponential excesses");
  mrad->add_option("--counts", counts, "comma-separated n_t values")
      ->capture_default_str();
  mrad->add_option("--mean-excess", mean_excess)->capture_default_str();
  mrad->add_option("--base-age", exposure.base_age)->capture_default_str();
  add_out(mrad);

  // repro
  std::vector<int> only;
  bool repro_json = false;
  auto* repro = app.add_subcommand("repro", "run the headline-number suite");
  repro->add_option("--seed", seed, "64-bit seed (required)")->required();
  repro->add_option("--only", only, "criterion ids to run");
  repro->add_flag("--json", repro_json, "JSON envelope instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto* sub = app.get_subcommands().front();
  g_inv.command = sub->get_name();
  for (int i = 2; i < argc; ++i) g_inv.args.emplace_back(argv[i]);

  try {
    if (sub == traj) {
      const auto m = model.build();
      const auto rows = trajectory_table(m, from, to, step);
      if (!g_inv.out.empty()) {
        emit_csv(render([&](std::ostream& o) { write_trajectory_csv(o, rows); }));
      } else {
        json r;
        r["model"] = model_json(m);
        json ages = json::array(), q = json::array();
        for (const auto& row : rows) {
          ages.push_back(row.age);
          q.push_back(row.annual_death_prob);
        }
        r["age"] = ages;
        r["annual_death_prob"] = q;
        emit_json(r);
      }
    } else if (sub == limit) {
      const auto m = model.build();
      json r;
      r["model"] = model_json(m);
      r["limit"] = parsed(to_json(solve_effective_limit(m, exposure.build(), epsilon)));
      emit_json(r);
    } else if (sub == profile) {
      const auto m = model.build();
      const auto eps = parse_list(epsilons);
      const auto rows = limit_profile(m, exposure.build(), eps);
      if (!g_inv.out.empty()) {
        emit_csv(render([&](std::ostream& o) {
          o << "epsilon,limit_age,limit_age_ceil,achieved_probability,"
               "exact_endpoint\n";
          for (const auto& row : rows) {
            o << format_number(row.epsilon) << ','
              << format_number(row.result.limit_age) << ','
              << row.result.limit_age_ceil << ','
              << format_number(row.result.achieved_probability) << ','
              << (row.result.exact_endpoint ? "true" : "false") << '\n';
          }
        }));
      } else {
        json r;
        r["model"] = model_json(m);
        r["rows"] = parsed(to_json(rows));
        emit_json(r);
      }
    } else if (sub == fit_tail) {
      const auto x = excesses(records.load(), threshold);
      json r;
      r["threshold"] = threshold;
      r["sample_size"] = x.size();
      if (family != "gpd") r["exponential"] = parsed(to_json(fit_exponential(x, threshold)));
      if (family != "exp") {
        r["gpd"] = parsed(to_json(fit_gpd(x, threshold)));
        r["lr_test_exp_vs_gpd"] = parsed(to_json(lr_test_exp_vs_gpd(x)));
      }
      emit_json(r);
    } else if (sub == test_split) {
      const auto all = records.load();
      std::vector<LifeRecord> a, b;
      for (const auto& rec : all) {
        (rec.death_year() <= split_year ? a : b).push_back(rec);
      }
      const auto xa = excesses(a, threshold);
      const auto xb = excesses(b, threshold);
      json r;
      r["threshold"] = threshold;
      r["split_year"] = split_year;
      r["n_before"] = xa.size();
      r["n_after"] = xb.size();
      r["test"] = parsed(to_json(split_period_test(xa, xb)));
      emit_json(r);
    } else if (sub == hazard) {
      if (age_to < age_from) throw UsageError("--to must be >= --from");
      std::vector<int> ages;
      for (int a = age_from; a <= age_to; ++a) ages.push_back(a);
      const auto rows = hazard_by_age(records.load(), ages);
      if (!g_inv.out.empty()) {
        emit_csv(render([&](std::ostream& o) { write_hazard_csv(o, rows); }));
      } else {
        emit_json(parsed(to_json(rows)));
      }
    } else if (sub == trend) {
      const auto series = yearly_extremes(records.load(), k_max, records.country,
                                          threshold);
      if (series.empty()) throw DataError("no qualifying deaths for the series");
      if (!g_inv.out.empty()) {
        emit_csv(render([&](std::ostream& o) { write_series_csv(o, series); }));
      } else {
        const auto selector = parse_field(field);
        json r;
        r["field"] = to_string(selector);
        r["rows"] = series.rows.size();
        if (linear) {
          r["linear"] = parsed(to_json(fit_linear(series, selector)));
        } else {
          if (permutations > 0 && !seed) {
            throw UsageError("--permutations needs --seed");
          }
          SegmentedOptions opt;
          opt.joined = joined;
          opt.min_segment = min_segment;
          opt.permutations = permutations;
          opt.seed = seed.value_or(0);
          r["segmented"] = parsed(to_json(fit_segmented(series, selector, opt)));
        }
        emit_json(r);
      }
    } else if (sub == corr) {
      const auto series =
          yearly_extremes(records.load(), k_max, records.country, threshold);
      const auto res = correlate(series, parse_field(x_field), parse_field(y_field),
                                 parse_correlation_method(method));
      json r;
      r["x"] = x_field;
      r["y"] = y_field;
      r["method"] = std::string(to_string(parse_correlation_method(method)));
      r["correlation"] = parsed(to_json(res));
      emit_json(r);
    } else if (sub == sim) {
      SimulationConfig cfg;
      cfg.model = model.build();
      cfg.plan = exposure.build();
      cfg.seed = *seed;
      cfg.replications = replications;
      cfg.max_age = max_age;
      cfg.country = country_label;
      if (!g_inv.out.empty()) {
        if (target) throw UsageError("--target reports JSON; drop --out");
        const auto recs = simulate_lifetimes(cfg);
        emit_csv(render([&](std::ostream& o) { write_records(o, recs); }));
      } else {
        json r;
        r["model"] = model_json(cfg.model);
        r["plan"] = parsed(to_json(cfg.plan));
        r["seed"] = cfg.seed;
        r["replications"] = cfg.replications;
        if (target) {
          r["target_age"] = *target;
          r["exceedance"] = parsed(to_json(empirical_exceedance(cfg, *target)));
          r["analytic"] = cohort_exceedance(cfg.model, cfg.plan, *target);
        } else {
          const auto ages = simulate_ages(cfg, 0);
          double sum = 0.0;
          for (double a : ages) sum += a;
          r["replication_0"] = {
              {"individuals", ages.size()},
              {"mean_age", ages.empty() ? 0.0 : sum / ages.size()},
              {"max_age", ages.empty() ? 0.0
                                       : *std::max_element(ages.begin(), ages.end())}};
        }
        emit_json(r);
      }
    } else if (sub == mrad) {
      const auto ns = parse_list(counts);
      std::vector<std::uint64_t> n;
      for (double v : ns) {
        if (v < 1 || v != std::floor(v)) throw UsageError("--counts must be positive integers");
        n.push_back(static_cast<std::uint64_t>(v));
      }
      if (!g_inv.out.empty()) {
        emit_csv(render([&](std::ostream& o) {
          o << "n_t,harmonic,expected_mrad\n";
          for (auto k : n) {
            o << k << ',' << format_number(harmonic_number(k)) << ','
              << format_number(max_exponential_mean(k, mean_excess, exposure.base_age))
              << '\n';
          }
        }));
      } else {
        json rows = json::array();
        for (auto k : n) {
          rows.push_back({{"n_t", k},
                          {"harmonic", harmonic_number(k)},
                          {"expected_mrad",
                           max_exponential_mean(k, mean_excess, exposure.base_age)}});
        }
        emit_json({{"mean_excess", mean_excess},
                   {"base_age", exposure.base_age},
                   {"rows", rows}});
      }
    } else if (sub == repro) {
      ReproOptions opt;
      opt.seed = *seed;
      opt.only = only;
      const auto results = run_acceptance(opt);
      if (repro_json) {
        json rows = json::array();
        for (const auto& r : results) {
          rows.push_back({{"id", r.id},
                          {"title", r.title},
                          {"passed", r.passed},
                          {"detail", r.detail},
                          {"notes", r.notes},
                          {"seconds", r.seconds}});
        }
        emit_json({{"seed", opt.seed}, {"criteria", rows}});
      } else {
        std::size_t pass = 0;
        for (const auto& r : results) {
          std::cout << format_result(r);
          pass += r.passed;
        }
        std::cout << pass << "/" << results.size() << " criteria pass\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "mradlab " << g_inv.command << ": " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "mradlab " << g_inv.command << ": " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "mradlab " << g_inv.command << ": " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "mradlab " << g_inv.command << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mradlab " << g_inv.command << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
