"""Regenerates the synthetic fixtures in this directory.

idl_synthetic.csv: IDL-like death records, 1968-2015. Excess ages over 110 are
exponential with mean 1.31 years, capped below 115 except for nine hand-placed
long-lived records (one is the Calment span). Every year has at least one
validated death at 110+, and 1968 has exactly one. A few rows are below 110 or
unvalidated so that filters have something to do.

life_table_hmd_like.csv: contiguous ages 100-115 ending with q = 1.
"""
import datetime as dt
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
DAYS_PER_YEAR = 365.2425
COUNTRIES = ["FR", "JP", "US", "GB", "IT"]


def record(rng, rid, year, age, country, validated=True, death=None):
    if death is None:
        start = dt.date(year, 1, 1)
        length = (dt.date(year + 1, 1, 1) - start).days
        death = start + dt.timedelta(days=rng.randrange(length))
    birth = death - dt.timedelta(days=round(age * DAYS_PER_YEAR))
    return (rid, birth.isoformat(), death.isoformat(), country,
            "true" if validated else "false")


def records():
    rng = random.Random(20170706)
    long_lived = {1982: 115.3, 1990: 115.8, 1994: 116.2, 1997: None,
                  1998: 117.1, 2001: 115.4, 2006: 116.9, 2009: 115.6,
                  2013: 116.4}
    rows = []
    n = 0
    for year in range(1968, 2016):
        count = 1 if year == 1968 else 1 + rng.randrange(2 + (year - 1968) // 4)
        for _ in range(count):
            excess = rng.expovariate(1 / 1.31)
            while excess >= 4.9:
                excess = rng.expovariate(1 / 1.31)
            n += 1
            rows.append(record(rng, f"S{n:04d}", year, 110.0 + excess,
                               rng.choice(COUNTRIES)))
        if year in long_lived:
            if long_lived[year] is None:
                rows.append(("JC1", "1875-02-21", "1997-08-04", "FR", "true"))
            else:
                n += 1
                rows.append(record(rng, f"S{n:04d}", year, long_lived[year],
                                   rng.choice(COUNTRIES)))
        if year % 3 == 0:
            n += 1
            rows.append(record(rng, f"S{n:04d}", year,
                               105.0 + 4.9 * rng.random(),
                               rng.choice(COUNTRIES)))
        if year % 16 == 5:
            n += 1
            rows.append(record(rng, f"S{n:04d}", year,
                               110.0 + 3.0 * rng.random(),
                               rng.choice(COUNTRIES), validated=False))
    return rows


def main():
    with open(HERE / "idl_synthetic.csv", "w", newline="\n") as f:
        f.write("id,birth_date,death_date,country,validated\n")
        for row in records():
            f.write(",".join(row) + "\n")
    with open(HERE / "life_table_hmd_like.csv", "w", newline="\n") as f:
        f.write("age,qx\n")
        q = [0.35, 0.37, 0.39, 0.41, 0.43, 0.45, 0.47, 0.49, 0.5, 0.51, 0.52,
             0.53, 0.6, 0.7, 0.85, 1]
        for age, qx in zip(range(100, 116), q):
            f.write(f"{age},{qx}\n")


if __name__ == "__main__":
    main()
