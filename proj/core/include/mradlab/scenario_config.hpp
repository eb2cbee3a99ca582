#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mradlab/hazard_models.hpp"

namespace mradlab {

struct NamedScenario {
  std::string name;
  HazardModel model;
};

// Resolves a `table_file` value to a life table (LifeTable scenarios only).
using TableLoader = std::function<LifeTable(std::string_view path)>;

// Reads scenario blocks of the form
//
//   # comment
//   [plateau-fig1]
//   variant = plateau
//   plateau_q = 0.53
//   transition_age = 110
//
// Recognised keys: variant, gompertz_a, gompertz_b, transition_age,
// limit_age, plateau_q, decline_rate, asymptote, table_file. Unknown keys and
// keys that do not apply to the block's variant are errors (ParseError).
std::vector<NamedScenario> parse_scenarios(std::istream& in,
                                           const TableLoader& loader = {});

// The default Fig.-style scenarios: hard-limit, plateau, decline, sigmoid.
HazardModel builtin_scenario(std::string_view name);

}  // namespace mradlab
