"""Combined R3 report: per-variant metrics, deltas against Case 1, rankings.

Delta definitions (percent, positive = better than Case 1):

* reliability  dEENS% = 100 * (EENS_1 - EENS_k) / EENS_1
* robustness   dSD%   = 100 * (SD_k - SD_1) / SD_1
* resilience   dENS%  = 100 * (ENS_1 - ENS_k) / ENS_1

``PUBLISHED_*`` hold the benchmark values reported in the literature for
this reinforcement study on the 24-bus system.  They are shown side by
side with computed results for orientation only: the published experiment
used unpublished seeds and unspecified added-line parameters, and its own
tables are not mutually consistent, so no equality is asserted anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

VARIANTS = tuple(range(1, 9))

# Benchmark deltas (dSD%, dEENS%, dENS%) per variant.
PUBLISHED_DELTAS = {
    1: (0.0, 0.0, 0.0),
    2: (1.825, 5.732, 35.662),
    3: (1.593, 0.623, 13.93),
    4: (1.594, 1.184, 31.841),
    5: (2.215, 8.623, 21.742),
    6: (2.231, 7.581, 27.864),
    7: (1.778, 2.038, 35.625),
    8: (1.864, 9.473, 58.691),
}
# Benchmark absolute values per variant.
PUBLISHED_EENS_MWH = {
    1: 126985.4, 2: 124874.0, 3: 125351.0, 4: 125349.0,
    5: 124522.0, 6: 124508.0, 7: 125029.0, 8: 124921.0,
}
PUBLISHED_MEAN_SD = {
    1: 0.34, 2: 0.38, 3: 0.34, 4: 0.35, 5: 0.40, 6: 0.39, 7: 0.35, 8: 0.40,
}
PUBLISHED_ENS_MWH = {
    1: 3277.82, 2: 2108.23, 3: 3701.65, 4: 2233.49,
    5: 2564.52, 6: 2371.71, 7: 2110.90, 8: 1359.0,
}


@dataclass(frozen=True)
class VariantMetrics:
    variant: int
    eens_mwh_per_yr: float
    mean_final_sd: float
    ens_mwh: float


@dataclass(frozen=True)
class VariantRow:
    variant: int
    eens_mwh_per_yr: float
    mean_final_sd: float
    ens_mwh: float
    delta_sd_pct: float
    delta_eens_pct: float
    delta_ens_pct: float
    published_delta_sd_pct: float | None
    published_delta_eens_pct: float | None
    published_delta_ens_pct: float | None


@dataclass(frozen=True)
class R3Report:
    rows: tuple[VariantRow, ...]
    # variants ordered best-first per attribute
    ranking_reliability: tuple[int, ...]
    ranking_robustness: tuple[int, ...]
    ranking_resilience: tuple[int, ...]


def _improvement_pct(base: float, value: float) -> float:
    if base == 0.0:
        return 0.0
    return 100.0 * (base - value) / base


def build_report(metrics: dict[int, VariantMetrics]) -> R3Report:
    """Assemble the report from per-variant metrics keyed by variant number.

    Requires Case 1 (the comparison base).  Variants may be a subset of
    1..8; published reference columns are filled where defined.
    """
    if 1 not in metrics:
        raise ValueError("report requires Case 1 metrics as the comparison base")
    base = metrics[1]
    rows = []
    for variant in sorted(metrics):
        m = metrics[variant]
        published = PUBLISHED_DELTAS.get(variant)
        rows.append(
            VariantRow(
                variant=variant,
                eens_mwh_per_yr=m.eens_mwh_per_yr,
                mean_final_sd=m.mean_final_sd,
                ens_mwh=m.ens_mwh,
                delta_sd_pct=(
                    100.0 * (m.mean_final_sd - base.mean_final_sd) / base.mean_final_sd
                    if base.mean_final_sd != 0.0
                    else 0.0
                ),
                delta_eens_pct=_improvement_pct(base.eens_mwh_per_yr, m.eens_mwh_per_yr),
                delta_ens_pct=_improvement_pct(base.ens_mwh, m.ens_mwh),
                published_delta_sd_pct=published[0] if published else None,
                published_delta_eens_pct=published[1] if published else None,
                published_delta_ens_pct=published[2] if published else None,
            )
        )
    variants = [r.variant for r in rows]
    return R3Report(
        rows=tuple(rows),
        ranking_reliability=tuple(
            sorted(variants, key=lambda v: (metrics[v].eens_mwh_per_yr, v))
        ),
        ranking_robustness=tuple(
            sorted(variants, key=lambda v: (-metrics[v].mean_final_sd, v))
        ),
        ranking_resilience=tuple(
            sorted(variants, key=lambda v: (metrics[v].ens_mwh, v))
        ),
    )


def report_to_dict(report: R3Report) -> dict:
    return {
        "rows": [
            {
                "variant": r.variant,
                "eens_mwh_per_yr": r.eens_mwh_per_yr,
                "mean_final_sd": r.mean_final_sd,
                "ens_mwh": r.ens_mwh,
                "delta_sd_pct": r.delta_sd_pct,
                "delta_eens_pct": r.delta_eens_pct,
                "delta_ens_pct": r.delta_ens_pct,
                "published_delta_sd_pct": r.published_delta_sd_pct,
                "published_delta_eens_pct": r.published_delta_eens_pct,
                "published_delta_ens_pct": r.published_delta_ens_pct,
            }
            for r in report.rows
        ],
        "ranking_reliability": list(report.ranking_reliability),
        "ranking_robustness": list(report.ranking_robustness),
        "ranking_resilience": list(report.ranking_resilience),
        "published_reference": {
            "eens_mwh_per_yr": PUBLISHED_EENS_MWH,
            "mean_final_sd": PUBLISHED_MEAN_SD,
            "ens_mwh": PUBLISHED_ENS_MWH,
            "note": (
                "published benchmark values for orientation only; "
                "not reproducible bit-exactly and not asserted"
            ),
        },
    }


def format_table(report: R3Report) -> str:
    """Fixed-width text table of deltas vs Case 1, with reference columns."""
    header = (
        f"{'case':>5} | {'dSD%':>8} {'dEENS%':>8} {'dENS%':>8} | "
        f"{'ref dSD%':>9} {'ref dEENS%':>10} {'ref dENS%':>9}"
    )
    sep = "-" * len(header)
    lines = [header, sep]
    for r in report.rows:
        ref = (
            f"{r.published_delta_sd_pct:>9.3f} "
            f"{r.published_delta_eens_pct:>10.3f} "
            f"{r.published_delta_ens_pct:>9.3f}"
            if r.published_delta_sd_pct is not None
            else f"{'-':>9} {'-':>10} {'-':>9}"
        )
        lines.append(
            f"{r.variant:>5} | {r.delta_sd_pct:>8.3f} {r.delta_eens_pct:>8.3f} "
            f"{r.delta_ens_pct:>8.3f} | {ref}"
        )
    lines.append(sep)
    lines.append(
        "rank by reliability: "
        + " > ".join(f"Case {v}" for v in report.ranking_reliability)
    )
    lines.append(
        "rank by robustness:  "
        + " > ".join(f"Case {v}" for v in report.ranking_robustness)
    )
    lines.append(
        "rank by resilience:  "
        + " > ".join(f"Case {v}" for v in report.ranking_resilience)
    )
    return "\n".join(lines) + "\n"
