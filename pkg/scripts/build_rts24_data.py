#!/usr/bin/env python3
"""Regenerate the bundled 24-bus test-system data files.

Source: the IEEE Reliability Test System (single-area 1996 revision) —
24 buses, 38 branches (transformers modeled as lines), 32 generating units
plus the bus-14 synchronous condenser carried as a 0-MW unit (33 units
total), 2850 MW peak demand, and the chronological weekly/daily/hourly
load model expanded to a per-unit 8760-hour profile.

Unit conventions in the emitted file:
  * susceptance b_pu = 1 / X  (100 MVA base),
  * line ratings = continuous MVA ratings taken as MW limits,
  * outage rates per year: lines carry the permanent outage rate directly,
    generators use 8760 / MTTF; repair rates are 8760 / duration.
  * generator pmin = 0: units are freely dispatchable in every study here,
    so economic minimum-output data is intentionally not carried over.

The variant manifest documents the three reinforcement candidates
(14-15, 14-24, 6-9) with parameters copied from a donor line of the same
voltage level and nearest length class, and the candidate subsets of the
eight topology variants.

Run from the repository root:  python scripts/build_rts24_data.py
"""

from __future__ import annotations

import json
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "gridr3" / "data"

HOURS = 8760

# --- branches: (from, to, x_pu, rating_mw, outages_per_yr, outage_hours) ----
BRANCHES = [
    (1, 2, 0.0139, 175.0, 0.24, 16.0),
    (1, 3, 0.2112, 175.0, 0.51, 10.0),
    (1, 5, 0.0845, 175.0, 0.33, 10.0),
    (2, 4, 0.1267, 175.0, 0.39, 10.0),
    (2, 6, 0.1920, 175.0, 0.48, 10.0),
    (3, 9, 0.1190, 175.0, 0.38, 10.0),
    (3, 24, 0.0839, 400.0, 0.02, 768.0),
    (4, 9, 0.1037, 175.0, 0.36, 10.0),
    (5, 10, 0.0883, 175.0, 0.34, 10.0),
    (6, 10, 0.0605, 175.0, 0.33, 35.0),
    (7, 8, 0.0614, 175.0, 0.30, 10.0),
    (8, 9, 0.1651, 175.0, 0.44, 10.0),
    (8, 10, 0.1651, 175.0, 0.44, 10.0),
    (9, 11, 0.0839, 400.0, 0.02, 768.0),
    (9, 12, 0.0839, 400.0, 0.02, 768.0),
    (10, 11, 0.0839, 400.0, 0.02, 768.0),
    (10, 12, 0.0839, 400.0, 0.02, 768.0),
    (11, 13, 0.0476, 500.0, 0.40, 11.0),
    (11, 14, 0.0418, 500.0, 0.39, 11.0),
    (12, 13, 0.0476, 500.0, 0.40, 11.0),
    (12, 23, 0.0966, 500.0, 0.52, 11.0),
    (13, 23, 0.0865, 500.0, 0.49, 11.0),
    (14, 16, 0.0389, 500.0, 0.38, 11.0),
    (15, 16, 0.0173, 500.0, 0.33, 11.0),
    (15, 21, 0.0490, 500.0, 0.41, 11.0),
    (15, 21, 0.0490, 500.0, 0.41, 11.0),
    (15, 24, 0.0519, 500.0, 0.41, 11.0),
    (16, 17, 0.0259, 500.0, 0.35, 11.0),
    (16, 19, 0.0231, 500.0, 0.34, 11.0),
    (17, 18, 0.0144, 500.0, 0.32, 11.0),
    (17, 22, 0.1053, 500.0, 0.54, 11.0),
    (18, 21, 0.0259, 500.0, 0.35, 11.0),
    (18, 21, 0.0259, 500.0, 0.35, 11.0),
    (19, 20, 0.0396, 500.0, 0.38, 11.0),
    (19, 20, 0.0396, 500.0, 0.38, 11.0),
    (20, 23, 0.0216, 500.0, 0.34, 11.0),
    (20, 23, 0.0216, 500.0, 0.34, 11.0),
    (21, 22, 0.0678, 500.0, 0.45, 11.0),
]

# --- generating units: (bus, pmax_mw, mttf_h, mttr_h) -----------------------
# The bus-14 entry is the synchronous condenser: 0 MW, never fails (it has
# no active-power role in a DC study but keeps the unit count at 33).
UNITS = [
    (1, 20.0, 450.0, 50.0),
    (1, 20.0, 450.0, 50.0),
    (1, 76.0, 1960.0, 40.0),
    (1, 76.0, 1960.0, 40.0),
    (2, 20.0, 450.0, 50.0),
    (2, 20.0, 450.0, 50.0),
    (2, 76.0, 1960.0, 40.0),
    (2, 76.0, 1960.0, 40.0),
    (7, 100.0, 1200.0, 50.0),
    (7, 100.0, 1200.0, 50.0),
    (7, 100.0, 1200.0, 50.0),
    (13, 197.0, 950.0, 50.0),
    (13, 197.0, 950.0, 50.0),
    (13, 197.0, 950.0, 50.0),
    (14, 0.0, None, None),
    (15, 12.0, 2940.0, 60.0),
    (15, 12.0, 2940.0, 60.0),
    (15, 12.0, 2940.0, 60.0),
    (15, 12.0, 2940.0, 60.0),
    (15, 12.0, 2940.0, 60.0),
    (15, 155.0, 960.0, 40.0),
    (16, 155.0, 960.0, 40.0),
    (18, 400.0, 1100.0, 150.0),
    (21, 400.0, 1100.0, 150.0),
    (22, 50.0, 1980.0, 20.0),
    (22, 50.0, 1980.0, 20.0),
    (22, 50.0, 1980.0, 20.0),
    (22, 50.0, 1980.0, 20.0),
    (22, 50.0, 1980.0, 20.0),
    (22, 50.0, 1980.0, 20.0),
    (23, 155.0, 960.0, 40.0),
    (23, 155.0, 960.0, 40.0),
    (23, 350.0, 1150.0, 100.0),
]

# --- bus peak loads (MW), total 2850 ----------------------------------------
PEAK_LOADS = {
    1: 108.0, 2: 97.0, 3: 180.0, 4: 74.0, 5: 71.0, 6: 136.0, 7: 125.0,
    8: 171.0, 9: 175.0, 10: 195.0, 13: 265.0, 14: 194.0, 15: 317.0,
    16: 100.0, 18: 333.0, 19: 181.0, 20: 128.0,
}

# --- chronological load model -----------------------------------------------
# Weekly peak in percent of annual peak, weeks 1..52.
WEEKLY_PCT = [
    86.2, 90.0, 87.8, 83.4, 88.0, 84.1, 83.2, 80.6, 74.0, 73.7, 71.5, 72.7,
    70.4, 75.0, 72.1, 80.0, 75.4, 83.7, 87.0, 88.0, 85.6, 81.1, 90.0, 88.7,
    89.6, 86.1, 75.5, 81.6, 80.1, 88.0, 72.2, 77.6, 80.0, 72.9, 72.6, 70.5,
    78.0, 69.5, 72.4, 72.4, 74.3, 74.4, 80.0, 88.1, 88.5, 90.9, 94.0, 89.0,
    94.2, 97.0, 100.0, 95.2,
]
# Daily peak in percent of weekly peak, Monday..Sunday.
DAILY_PCT = [93.0, 100.0, 98.0, 96.0, 94.0, 77.0, 75.0]
# Hourly load in percent of daily peak, by season block and day type.
HOURLY_PCT = {
    # winter: weeks 1-8 and 44-52
    ("winter", "weekday"): [
        67, 63, 60, 59, 59, 60, 74, 86, 95, 96, 96, 95,
        95, 95, 93, 94, 99, 100, 100, 96, 91, 83, 73, 63,
    ],
    ("winter", "weekend"): [
        78, 72, 68, 66, 64, 65, 66, 70, 80, 88, 90, 91,
        90, 88, 87, 87, 91, 100, 99, 97, 94, 92, 87, 81,
    ],
    # summer: weeks 18-30
    ("summer", "weekday"): [
        64, 60, 58, 56, 56, 58, 64, 76, 87, 95, 99, 100,
        99, 100, 100, 97, 96, 96, 93, 92, 92, 93, 87, 72,
    ],
    ("summer", "weekend"): [
        74, 70, 66, 65, 64, 62, 62, 66, 81, 86, 91, 93,
        93, 92, 91, 91, 92, 94, 95, 95, 100, 93, 88, 80,
    ],
    # spring/fall: weeks 9-17 and 31-43
    ("shoulder", "weekday"): [
        63, 62, 60, 58, 59, 65, 72, 85, 95, 99, 100, 99,
        93, 92, 90, 88, 90, 92, 96, 98, 96, 90, 80, 70,
    ],
    ("shoulder", "weekend"): [
        75, 73, 69, 66, 65, 65, 68, 74, 83, 89, 92, 94,
        91, 90, 90, 86, 85, 88, 92, 100, 97, 95, 90, 85,
    ],
}


def season_of_week(week: int) -> str:
    if week <= 8 or week >= 44:
        return "winter"
    if 18 <= week <= 30:
        return "summer"
    return "shoulder"


def build_profile() -> list[float]:
    """Per-unit hourly factors; the year starts on a Monday.

    The weekly/daily/hourly model covers 52*7*24 = 8736 hours; the final
    24 hours repeat the last modeled day so the profile spans 8760.
    """
    factors: list[float] = []
    for week in range(1, 53):
        season = season_of_week(week)
        for day in range(7):
            day_type = "weekday" if day < 5 else "weekend"
            for hour_pct in HOURLY_PCT[(season, day_type)]:
                factors.append(
                    round(
                        WEEKLY_PCT[week - 1] / 100.0
                        * DAILY_PCT[day] / 100.0
                        * hour_pct / 100.0,
                        6,
                    )
                )
    factors.extend(factors[-24:])
    assert len(factors) == HOURS
    assert max(factors) == 1.0
    return factors


def build_case() -> dict:
    lines = []
    for i, (f, t, x, rating, lam, dur) in enumerate(BRANCHES, start=1):
        lines.append(
            {
                "id": i,
                "from": f,
                "to": t,
                "b_pu": round(1.0 / x, 9),
                "rating_mw": rating,
                "lambda_per_yr": lam,
                "mu_per_yr": round(HOURS / dur, 9),
            }
        )
    generators = []
    for i, (bus, pmax, mttf, mttr) in enumerate(UNITS, start=1):
        generators.append(
            {
                "id": i,
                "bus": bus,
                "pmin_mw": 0.0,
                "pmax_mw": pmax,
                "lambda_per_yr": 0.0 if mttf is None else round(HOURS / mttf, 9),
                "mu_per_yr": 0.0 if mttr is None else round(HOURS / mttr, 9),
            }
        )
    return {
        "base_mva": 100.0,
        "variant_label": "Case 1",
        "buses": [{"id": i, "name": f"Bus {i}"} for i in range(1, 25)],
        "lines": lines,
        "generators": generators,
        "loads": [
            {"bus": bus, "peak_mw": mw} for bus, mw in sorted(PEAK_LOADS.items())
        ],
        "profile_8760": build_profile(),
    }


def build_variant_manifest(case: dict) -> dict:
    """Reinforcement candidates with donor-copied parameters.

    Donors (same voltage level, nearest length class):
      14-15 <- line 23 (14-16, 230 kV)
      14-24 <- line 27 (15-24, 230 kV)
      6-9   <- line 8  (4-9, 138 kV)
    """
    by_id = {ln["id"]: ln for ln in case["lines"]}

    def candidate(key: str, f: int, t: int, donor_id: int) -> dict:
        donor = by_id[donor_id]
        return {
            "key": key,
            "from": f,
            "to": t,
            "donor_line_id": donor_id,
            "donor_endpoints": f"{donor['from']}-{donor['to']}",
            "b_pu": donor["b_pu"],
            "rating_mw": donor["rating_mw"],
            "lambda_per_yr": donor["lambda_per_yr"],
            "mu_per_yr": donor["mu_per_yr"],
        }

    return {
        "candidate_lines": [
            candidate("14-15", 14, 15, 23),
            candidate("14-24", 14, 24, 27),
            candidate("6-9", 6, 9, 8),
        ],
        "variants": {
            "1": [],
            "2": ["14-15"],
            "3": ["14-24"],
            "4": ["6-9"],
            "5": ["14-15", "14-24"],
            "6": ["14-15", "6-9"],
            "7": ["14-24", "6-9"],
            "8": ["14-15", "14-24", "6-9"],
        },
    }


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    case = build_case()
    assert sum(ld["peak_mw"] for ld in case["loads"]) == 2850.0
    assert len(case["lines"]) == 38
    assert len(case["generators"]) == 33

    (OUT_DIR / "rts24.json").write_text(
        json.dumps(case, indent=1) + "\n", encoding="utf-8"
    )
    (OUT_DIR / "rts24_variants.json").write_text(
        json.dumps(build_variant_manifest(case), indent=1) + "\n", encoding="utf-8"
    )
    print(f"wrote {OUT_DIR / 'rts24.json'}")
    print(f"wrote {OUT_DIR / 'rts24_variants.json'}")


if __name__ == "__main__":
    main()
