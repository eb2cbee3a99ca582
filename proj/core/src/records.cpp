#include "mradlab/records.hpp"

#include <string>

#include "mradlab/errors.hpp"

namespace mradlab {

LifeRecord make_record(std::string id, Date birth, Date death,
                       std::string country, bool validated) {
  LifeRecord r;
  r.id = std::move(id);
  r.birth_date = birth;
  r.death_date = death;
  r.country = std::move(country);
  r.validated = validated;
  r.age_at_death = mradlab::age_at_death(birth, death);
  return r;
}

void LifeTable::validate() const {
  if (rows.empty()) throw DataError("life table has no rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!(row.q >= 0.0 && row.q <= 1.0)) {
      throw DataError("life table q at age " + std::to_string(row.age) +
                      " is outside [0, 1]");
    }
    if (row.age < 0) {
      throw DataError("life table age " + std::to_string(row.age) +
                      " is negative");
    }
    if (i > 0 && row.age != rows[i - 1].age + 1) {
      throw DataError("life table ages are not contiguous at age " +
                      std::to_string(row.age));
    }
  }
}

}  // namespace mradlab
