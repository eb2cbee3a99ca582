#include "mradlab/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mradlab/errors.hpp"

namespace mradlab {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::optional<bool> parse_flag(std::string_view s) {
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  return std::nullopt;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(1, 1, "missing header '" + std::string(header) + "'");
  }
  if (strip_cr(line) != header) {
    throw ParseError(1, 1, "expected header '" + std::string(header) +
                               "', got '" + std::string(strip_cr(line)) + "'");
  }
}

}  // namespace

RecordsParseResult parse_records(std::istream& in) {
  expect_header(in, kRecordsHeader);
  RecordsParseResult result;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) {
      throw ParseError(line_no, std::min<std::size_t>(f.size(), 6),
                       "expected 5 fields, found " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw ParseError(line_no, 1, "empty id");
    Date birth;
    Date death;
    try {
      birth = parse_iso_date(f[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, 2, e.what());
    }
    try {
      death = parse_iso_date(f[2]);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, 3, e.what());
    }
    const auto flag = parse_flag(f[4]);
    if (!flag) {
      throw ParseError(line_no, 5,
                       "validated must be true or false, got '" +
                           std::string(f[4]) + "'");
    }
    if (death < birth) {
      throw ParseError(line_no, 3, "death date precedes birth date");
    }
    std::string id(f[0]);
    if (!seen.insert(id).second) {
      result.warnings.push_back("line " + std::to_string(line_no) +
                                ": duplicate id '" + id + "'");
    }
    result.records.push_back(
        make_record(std::move(id), birth, death, std::string(f[3]), *flag));
  }
  return result;
}

RecordsParseResult parse_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_records(in);
}

void write_records(std::ostream& out, std::span<const LifeRecord> records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.id << ',' << format_iso_date(r.birth_date) << ','
        << format_iso_date(r.death_date) << ',' << r.country << ','
        << (r.validated ? "true" : "false") << '\n';
  }
}

LifeTable parse_life_table(std::istream& in) {
  expect_header(in, kLifeTableHeader);
  LifeTable table;
  std::string raw;
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 2) {
      throw ParseError(line_no, std::min<std::size_t>(f.size(), 3),
                       "expected 2 fields, found " + std::to_string(f.size()));
    }
    LifeTableRow row;
    if (!parse_number(f[0], row.age)) {
      throw ParseError(line_no, 1, "age must be an integer");
    }
    if (!parse_number(f[1], row.q)) {
      throw ParseError(line_no, 2, "qx is not a number");
    }
    table.rows.push_back(row);
  }
  table.validate();
  return table;
}

LifeTable parse_life_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_life_table(in);
}

void write_life_table(std::ostream& out, const LifeTable& table) {
  out << kLifeTableHeader << '\n';
  for (const auto& row : table.rows) {
    out << row.age << ',' << format_number(row.q) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out,
                          std::span<const TrajectoryRow> rows) {
  out << kTrajectoryHeader << '\n';
  for (const auto& row : rows) {
    out << format_number(row.age) << ',' << format_number(row.annual_death_prob)
        << '\n';
  }
}

void write_hazard_csv(std::ostream& out,
                      std::span<const std::optional<HazardEstimate>> rows) {
  out << kHazardHeader << '\n';
  for (const auto& row : rows) {
    if (!row) continue;
    out << row->age << ',' << row->at_risk << ',' << row->deaths << ','
        << format_number(row->q_hat) << ',' << format_number(row->ci_low)
        << ',' << format_number(row->ci_high) << '\n';
  }
}

void write_series_csv(std::ostream& out, const YearlyExtremeSeries& series) {
  out << kSeriesHeader << '\n';
  for (const auto& row : series.rows) {
    out << row.year << ',' << row.n_t << ',' << format_number(row.mrad);
    for (std::size_t k = 0; k < 4; ++k) {
      out << ',';
      if (k < row.kth_highest.size() && row.kth_highest[k]) {
        out << format_number(*row.kth_highest[k]);
      }
    }
    out << '\n';
  }
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mradlab
