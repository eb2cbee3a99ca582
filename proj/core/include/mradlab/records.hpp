#pragma once

#include <string>
#include <vector>

#include "mradlab/dates.hpp"

namespace mradlab {

// One death record in the IDL/GRG-like schema.
struct LifeRecord {
  std::string id;
  Date birth_date;
  Date death_date;
  std::string country;
  bool validated = true;
  // Derived: day count / kDaysPerYear. Kept in sync by make_record().
  double age_at_death = 0.0;

  int death_year() const { return death_date.year; }
};

// Builds a record and derives its age. Throws InvalidArgument when the death
// date precedes the birth date.
LifeRecord make_record(std::string id, Date birth, Date death,
                       std::string country, bool validated = true);

struct LifeTableRow {
  int age = 0;
  double q = 0.0;  // annual death probability
};

// Contiguous ages, q in [0, 1]. Usable directly as a HazardModel.
struct LifeTable {
  std::vector<LifeTableRow> rows;

  // Throws DataError on an empty table, gaps or q outside [0, 1].
  void validate() const;
};

}  // namespace mradlab
