#include "mradlab/scenario_config.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <set>

#include "mradlab/errors.hpp"

namespace mradlab {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Block {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> values;
};

double number(const Block& block, const std::string& key) {
  const auto& [text, line] = block.values.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, 2, "value for '" + key + "' is not a number");
  }
}

HazardModel build(const Block& block, const TableLoader& loader) {
  if (!block.values.contains("variant")) {
    throw ParseError(block.line, 1,
                     "scenario '" + block.name + "' has no variant");
  }
  const auto& [variant_text, variant_line] = block.values.at("variant");
  Variant variant;
  try {
    variant = parse_variant(variant_text);
  } catch (const InvalidArgument& e) {
    throw ParseError(variant_line, 2, e.what());
  }

  std::set<std::string> allowed{"variant"};
  if (variant != Variant::kLifeTable) {
    allowed.insert({"gompertz_a", "gompertz_b"});
  }
  switch (variant) {
    case Variant::kHardLimit:
      allowed.insert("limit_age");
      break;
    case Variant::kPlateau:
      allowed.insert({"plateau_q", "transition_age"});
      break;
    case Variant::kDecline:
      allowed.insert({"decline_rate", "transition_age"});
      break;
    case Variant::kSigmoid:
      allowed.insert({"asymptote", "transition_age"});
      break;
    case Variant::kLifeTable:
      allowed.insert("table_file");
      break;
  }
  for (const auto& [key, value] : block.values) {
    if (!allowed.contains(key)) {
      throw ParseError(value.second, 1,
                       "key '" + key + "' does not apply to variant " +
                           std::string(to_string(variant)));
    }
  }

  auto get = [&](const std::string& key, double fallback) {
    return block.values.contains(key) ? number(block, key) : fallback;
  };
  GompertzParams g = default_gompertz();
  g.a = get("gompertz_a", g.a);
  g.b = get("gompertz_b", g.b);

  try {
    switch (variant) {
      case Variant::kHardLimit: {
        const double limit = get("limit_age", 115.0);
        if (limit != std::floor(limit)) {
          throw InvalidArgument("limit_age must be a whole number of years");
        }
        return HazardModel::hard_limit(static_cast<int>(limit), g);
      }
      case Variant::kPlateau:
        return HazardModel::plateau(get("plateau_q", 0.53),
                                    get("transition_age", 110.0), g);
      case Variant::kDecline:
        return HazardModel::decline(get("decline_rate", 0.1),
                                    get("transition_age", 110.0), g);
      case Variant::kSigmoid:
        return HazardModel::sigmoid(get("asymptote", 1.0),
                                    get("transition_age", 110.0), g);
      case Variant::kLifeTable: {
        if (!block.values.contains("table_file") || !loader) {
          throw InvalidArgument("life-table scenario needs a table_file");
        }
        return HazardModel::life_table(
            loader(block.values.at("table_file").first));
      }
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(block.line, 1,
                     "scenario '" + block.name + "': " + e.what());
  }
  throw ParseError(block.line, 1, "unhandled variant");
}

}  // namespace

std::vector<NamedScenario> parse_scenarios(std::istream& in,
                                           const TableLoader& loader) {
  std::vector<Block> blocks;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(line_no, 1, "malformed block header");
      }
      blocks.push_back({std::string(trim(line.substr(1, line.size() - 2))),
                        line_no,
                        {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, 1, "expected key = value");
    }
    if (blocks.empty()) {
      throw ParseError(line_no, 1, "key/value pair outside a [scenario] block");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ParseError(line_no, key.empty() ? 1 : 2, "empty key or value");
    }
    auto& values = blocks.back().values;
    if (values.contains(key)) {
      throw ParseError(line_no, 1, "duplicate key '" + key + "'");
    }
    values.emplace(key, std::make_pair(value, line_no));
  }

  std::vector<NamedScenario> out;
  out.reserve(blocks.size());
  for (const auto& block : blocks) {
    out.push_back({block.name, build(block, loader)});
  }
  return out;
}

HazardModel builtin_scenario(std::string_view name) {
  switch (parse_variant(name)) {
    case Variant::kHardLimit:
      return HazardModel::hard_limit();
    case Variant::kPlateau:
      return HazardModel::plateau();
    case Variant::kDecline:
      return HazardModel::decline();
    case Variant::kSigmoid:
      return HazardModel::sigmoid();
    case Variant::kLifeTable:
      break;
  }
  throw InvalidArgument("life-table scenarios need a table file");
}

}  // namespace mradlab
