#!/usr/bin/env python3
"""Writes the synthetic 80-day case-count snapshot used by the tests.

The files follow the CSSE global time-series layout (Province/State,
Country/Region, Lat, Long, then M/D/YY date columns, cumulative counts).
Curves are logistic epidemics with multiplicative noise and a few reporting
corrections, so the daily differences occasionally go negative.

    python3 tools/make_fixture.py tests/fixtures
"""

import csv
import datetime as dt
import sys
from pathlib import Path

import numpy as np

START = dt.date(2020, 1, 22)
DAYS = 80

# country -> list of (province, share, peak day, growth rate, final size)
REGIONS = {
    "China": [("Hubei", 1.0, 14, 0.30, 68000), ("Guangdong", 1.0, 16, 0.35, 1500),
              ("Beijing", 1.0, 17, 0.30, 580)],
    "Korea, South": [("", 1.0, 38, 0.35, 10500)],
    "Italy": [("", 1.0, 62, 0.17, 170000)],
    "Spain": [("", 1.0, 65, 0.20, 190000)],
    "Germany": [("", 1.0, 66, 0.19, 140000)],
    "US": [("", 1.0, 78, 0.21, 900000)],
    "France": [("", 1.0, 66, 0.19, 130000), ("Reunion", 1.0, 70, 0.2, 400)],
}

COORDS = {"China": (30.6, 114.3), "Korea, South": (35.9, 127.8), "Italy": (41.9, 12.6),
          "Spain": (40.5, -3.7), "Germany": (51.2, 10.5), "US": (40.0, -100.0),
          "France": (46.2, 2.2)}


def cumulative(rng, peak, rate, size, lag=0.0, fraction=1.0):
    t = np.arange(DAYS, dtype=float)
    curve = fraction * size / (1.0 + np.exp(-rate * (t - peak - lag)))
    daily = np.diff(np.concatenate([[0.0], curve]))
    daily *= rng.lognormal(0.0, 0.25, DAYS)
    counts = np.floor(np.cumsum(daily)).astype(np.int64)
    # reporting corrections: a few downward revisions
    for day in rng.choice(np.arange(20, DAYS), size=2, replace=False):
        counts[day:] -= min(int(counts[day] * 0.01), counts[day])
    return np.maximum(counts, 0)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20200412)
    dates = [(START + dt.timedelta(days=i)) for i in range(DAYS)]
    header = ["Province/State", "Country/Region", "Lat", "Long"] + [
        f"{d.month}/{d.day}/{d.year % 100:02d}" for d in dates]
    kinds = {"confirmed": (0.0, 1.0), "deaths": (7.0, 0.06), "recovered": (14.0, 0.55)}
    tables = {k: [] for k in kinds}
    for country, provinces in REGIONS.items():
        lat, lon = COORDS[country]
        for province, _, peak, rate, size in provinces:
            for kind, (lag, fraction) in kinds.items():
                counts = cumulative(rng, peak, rate, size, lag, fraction)
                tables[kind].append([province, country, f"{lat:.4f}", f"{lon:.4f}"] +
                                    [str(c) for c in counts])
    for kind, rows in tables.items():
        path = out / f"time_series_covid19_{kind}_global.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        print(path)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
