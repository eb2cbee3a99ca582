#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mradlab/hazard_models.hpp"
#include "mradlab/records.hpp"
#include "mradlab/tail_inference.hpp"
#include "mradlab/trend_analysis.hpp"

namespace mradlab {

inline constexpr std::string_view kRecordsHeader =
    "id,birth_date,death_date,country,validated";
inline constexpr std::string_view kLifeTableHeader = "age,qx";
inline constexpr std::string_view kTrajectoryHeader = "age,annual_death_prob";
inline constexpr std::string_view kHazardHeader = "age,n,d,q_hat,ci_low,ci_high";
inline constexpr std::string_view kSeriesHeader =
    "year,n_t,mrad,rank2,rank3,rank4,rank5";

struct RecordsParseResult {
  std::vector<LifeRecord> records;
  std::vector<std::string> warnings;  // e.g. duplicate ids
};

// Throws ParseError (with line and field position) on a bad header, wrong
// field count, malformed date, unknown validated flag or death before birth.
RecordsParseResult parse_records(std::istream& in);
RecordsParseResult parse_records(std::string_view text);

// Canonical form: the exact header, ISO dates, validated as true/false, LF.
void write_records(std::ostream& out, std::span<const LifeRecord> records);

// Throws ParseError for a bad row and DataError for q outside [0, 1] or
// non-contiguous ages.
LifeTable parse_life_table(std::istream& in);
LifeTable parse_life_table(std::string_view text);
void write_life_table(std::ostream& out, const LifeTable& table);

void write_trajectory_csv(std::ostream& out,
                          std::span<const TrajectoryRow> rows);
// Ages with nobody at risk are skipped.
void write_hazard_csv(std::ostream& out,
                      std::span<const std::optional<HazardEstimate>> rows);
// Missing k-th highest ages are written as empty fields.
void write_series_csv(std::ostream& out, const YearlyExtremeSeries& series);

// Shortest text that round-trips to the same double.
std::string format_number(double value);

// Whole file as a string; DataError when it cannot be read.
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a, used to fingerprint command inputs.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace mradlab
