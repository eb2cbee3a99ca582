#include "mradlab/json_io.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "mradlab/errors.hpp"

namespace mradlab {

using nlohmann::json;

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double get_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

json interval(const std::optional<stats::Interval>& ci) {
  if (!ci) return nullptr;
  return json::array({number(ci->low), number(ci->high)});
}

std::optional<stats::Interval> get_interval(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& a = j.at(key);
  return stats::Interval{a.at(0).get<double>(), a.at(1).get<double>()};
}

json plan_json(const ExposurePlan& plan) {
  json counts = json::object();
  for (const auto& [year, count] : plan.per_year_count) {
    counts[std::to_string(year)] = count;
  }
  return {{"base_age", number(plan.base_age)},
          {"per_year_count", counts},
          {"horizon_years", plan.horizon_years}};
}

ExposurePlan plan_from(const json& j) {
  ExposurePlan plan;
  plan.base_age = get_number(j, "base_age");
  plan.horizon_years = j.at("horizon_years").get<int>();
  for (const auto& [year, count] : j.at("per_year_count").items()) {
    plan.per_year_count[std::stoi(year)] = count.get<std::uint64_t>();
  }
  return plan;
}

json limit_json(const EffectiveLimitResult& r) {
  return {{"epsilon", number(r.epsilon)},
          {"limit_age", number(r.limit_age)},
          {"limit_age_ceil", r.limit_age_ceil},
          {"exposure", plan_json(r.exposure)},
          {"achieved_probability", number(r.achieved_probability)},
          {"iterations", r.iterations},
          {"bracket", number(r.bracket)},
          {"at_base_age", r.at_base_age},
          {"exact_endpoint", r.exact_endpoint}};
}

EffectiveLimitResult limit_from(const json& j) {
  EffectiveLimitResult r;
  r.epsilon = get_number(j, "epsilon");
  r.limit_age = get_number(j, "limit_age");
  r.limit_age_ceil = j.at("limit_age_ceil").get<int>();
  r.exposure = plan_from(j.at("exposure"));
  r.achieved_probability = get_number(j, "achieved_probability");
  r.iterations = j.at("iterations").get<int>();
  r.bracket = get_number(j, "bracket");
  r.at_base_age = j.at("at_base_age").get<bool>();
  r.exact_endpoint = j.at("exact_endpoint").get<bool>();
  return r;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(std::string_view text, F&& f) {
  const json j = parse(text);
  try {
    return f(j);
  } catch (const json::exception& e) {
    throw DataError(std::string("unexpected JSON shape: ") + e.what());
  }
}

}  // namespace

std::string to_json(const ExposurePlan& plan) { return plan_json(plan).dump(); }

std::string to_json(const EffectiveLimitResult& result) {
  return limit_json(result).dump();
}

std::string to_json(std::span<const LimitProfileRow> rows) {
  json a = json::array();
  for (const auto& row : rows) {
    a.push_back({{"epsilon", number(row.epsilon)},
                 {"limit_age", number(row.result.limit_age)},
                 {"result", limit_json(row.result)}});
  }
  return a.dump();
}

std::string to_json(const TailFit& fit) {
  json j{{"threshold", number(fit.threshold)},
         {"model_kind", std::string(to_string(fit.kind))},
         {"rate", number(fit.rate)},
         {"shape", number(fit.shape)},
         {"scale", number(fit.scale)},
         {"log_likelihood", number(fit.log_likelihood)},
         {"endpoint", fit.endpoint ? number(*fit.endpoint) : json(nullptr)},
         {"sample_size", fit.sample_size},
         {"rate_ci", interval(fit.rate_ci)},
         {"shape_ci", interval(fit.shape_ci)},
         {"iterations", fit.iterations}};
  return j.dump();
}

std::string to_json(const TestResult& result) {
  return json{{"statistic", number(result.statistic)},
              {"p_value", number(result.p_value)}}
      .dump();
}

std::string to_json(const SegmentedFit& fit) {
  return json{{"break_year", fit.break_year},
              {"slope_before", number(fit.slope_before)},
              {"slope_after", number(fit.slope_after)},
              {"intercept_before", number(fit.intercept_before)},
              {"intercept_after", number(fit.intercept_after)},
              {"sse_segmented", number(fit.sse_segmented)},
              {"sse_single", number(fit.sse_single)},
              {"f_statistic", number(fit.f_statistic)},
              {"p_value", number(fit.p_value)},
              {"permutation_p_value", fit.permutation_p_value
                                          ? number(*fit.permutation_p_value)
                                          : json(nullptr)},
              {"joined", fit.joined},
              {"n", fit.n}}
      .dump();
}

std::string to_json(const LinearFit& fit) {
  return json{{"slope", number(fit.slope)},
              {"intercept", number(fit.intercept)},
              {"slope_se", number(fit.slope_se)},
              {"p_value", number(fit.p_value)},
              {"sse", number(fit.sse)},
              {"n", fit.n}}
      .dump();
}

std::string to_json(const Correlation& result) {
  return json{{"coefficient", number(result.coefficient)},
              {"p_value", number(result.p_value)},
              {"n", result.n}}
      .dump();
}

std::string to_json(const ExceedanceEstimate& estimate) {
  return json{{"estimate", number(estimate.estimate)},
              {"standard_error", number(estimate.standard_error)},
              {"hits", estimate.hits},
              {"replications", estimate.replications}}
      .dump();
}

std::string to_json(std::span<const std::optional<HazardEstimate>> rows) {
  json a = json::array();
  for (const auto& row : rows) {
    if (!row) continue;
    a.push_back({{"age", row->age},
                 {"n", row->at_risk},
                 {"d", row->deaths},
                 {"q_hat", number(row->q_hat)},
                 {"ci_low", number(row->ci_low)},
                 {"ci_high", number(row->ci_high)}});
  }
  return a.dump();
}

template <>
ExposurePlan from_json<ExposurePlan>(std::string_view text) {
  return guarded(text, [](const json& j) { return plan_from(j); });
}

template <>
EffectiveLimitResult from_json<EffectiveLimitResult>(std::string_view text) {
  return guarded(text, [](const json& j) { return limit_from(j); });
}

template <>
TailFit from_json<TailFit>(std::string_view text) {
  return guarded(text, [](const json& j) {
    TailFit fit;
    fit.threshold = get_number(j, "threshold");
    const auto kind = j.at("model_kind").get<std::string>();
    if (kind == "exponential") {
      fit.kind = TailModelKind::kExponential;
    } else if (kind == "gpd") {
      fit.kind = TailModelKind::kGpd;
    } else {
      throw DataError("unknown model_kind '" + kind + "'");
    }
    fit.rate = get_number(j, "rate");
    fit.shape = get_number(j, "shape");
    fit.scale = get_number(j, "scale");
    fit.log_likelihood = get_number(j, "log_likelihood");
    if (!j.at("endpoint").is_null()) fit.endpoint = get_number(j, "endpoint");
    fit.sample_size = j.at("sample_size").get<std::size_t>();
    fit.rate_ci = get_interval(j, "rate_ci");
    fit.shape_ci = get_interval(j, "shape_ci");
    fit.iterations = j.at("iterations").get<int>();
    return fit;
  });
}

template <>
TestResult from_json<TestResult>(std::string_view text) {
  return guarded(text, [](const json& j) {
    return TestResult{get_number(j, "statistic"), get_number(j, "p_value")};
  });
}

template <>
SegmentedFit from_json<SegmentedFit>(std::string_view text) {
  return guarded(text, [](const json& j) {
    SegmentedFit f;
    f.break_year = j.at("break_year").get<int>();
    f.slope_before = get_number(j, "slope_before");
    f.slope_after = get_number(j, "slope_after");
    f.intercept_before = get_number(j, "intercept_before");
    f.intercept_after = get_number(j, "intercept_after");
    f.sse_segmented = get_number(j, "sse_segmented");
    f.sse_single = get_number(j, "sse_single");
    f.f_statistic = j.at("f_statistic").is_null()
                        ? std::numeric_limits<double>::infinity()
                        : get_number(j, "f_statistic");
    f.p_value = get_number(j, "p_value");
    if (!j.at("permutation_p_value").is_null()) {
      f.permutation_p_value = get_number(j, "permutation_p_value");
    }
    f.joined = j.at("joined").get<bool>();
    f.n = j.at("n").get<std::size_t>();
    return f;
  });
}

template <>
LinearFit from_json<LinearFit>(std::string_view text) {
  return guarded(text, [](const json& j) {
    LinearFit f;
    f.slope = get_number(j, "slope");
    f.intercept = get_number(j, "intercept");
    f.slope_se = get_number(j, "slope_se");
    f.p_value = get_number(j, "p_value");
    f.sse = get_number(j, "sse");
    f.n = j.at("n").get<std::size_t>();
    return f;
  });
}

template <>
Correlation from_json<Correlation>(std::string_view text) {
  return guarded(text, [](const json& j) {
    return Correlation{get_number(j, "coefficient"), get_number(j, "p_value"),
                       j.at("n").get<std::size_t>()};
  });
}

template <>
ExceedanceEstimate from_json<ExceedanceEstimate>(std::string_view text) {
  return guarded(text, [](const json& j) {
    return ExceedanceEstimate{get_number(j, "estimate"),
                              get_number(j, "standard_error"),
                              j.at("hits").get<std::uint64_t>(),
                              j.at("replications").get<std::uint64_t>()};
  });
}

std::string make_envelope(std::string_view command,
                          std::string_view inputs_hash,
                          std::string_view result_json) {
  json envelope{{"tool_version", MRADLAB_VERSION},
                {"command", std::string(command)},
                {"inputs_hash", std::string(inputs_hash)},
                {"result", parse(result_json)}};
  return envelope.dump(2);
}

}  // namespace mradlab
