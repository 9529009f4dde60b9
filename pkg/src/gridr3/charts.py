"""Static SVG charts for the command-line reports.

matplotlib is imported lazily and configured for byte-reproducible SVG
output (fixed hash salt, no embedded creation date), so re-running a
command regenerates identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "gridr3"
    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    _plt().close(fig)


def render_sd_dispersion(
    path: Path, scenarios: Sequence[tuple[int, float, float]], mean_sd: float, label: str
) -> None:
    """Final SD of every (event bus, alpha) scenario, plus the mean."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(1, len(scenarios) + 1)
    ax.scatter(
        xs,
        [sd for _, _, sd in scenarios],
        s=18,
        facecolors="none",
        edgecolors="tab:red",
        label="final SD per scenario",
    )
    ax.axhline(mean_sd, color="tab:green", lw=1.2, label=f"mean = {mean_sd:.3f}")
    ax.set_xlabel("scenario")
    ax.set_ylabel("final satisfied demand [p.u.]")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"Disturbance sweep dispersion: {label}")
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def render_recovery_curve(
    path: Path,
    minutes: Sequence[float],
    rd_mw: Sequence[float],
    total_demand: float,
    label: str,
) -> None:
    """Stepwise served-demand curve over the restoration timeline."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(minutes, rd_mw, where="post", color="tab:blue", label="served demand")
    ax.axhline(total_demand, color="black", lw=0.8, ls="--", label="total demand")
    ax.set_xlabel("minutes since restoration start")
    ax.set_ylabel("served demand [MW]")
    ax.set_title(f"Recovery curve: {label}")
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def render_r3_scatter(path: Path, rows: Sequence[dict]) -> None:
    """3-axis view of the per-variant deltas (robustness, reliability,
    resilience improvements vs Case 1)."""
    plt = _plt()
    fig = plt.figure(figsize=(6.5, 5.5))
    ax = fig.add_subplot(projection="3d")
    for r in rows:
        ax.scatter(
            r["delta_sd_pct"], r["delta_eens_pct"], r["delta_ens_pct"],
            s=40, color="tab:blue",
        )
        ax.text(
            r["delta_sd_pct"], r["delta_eens_pct"], r["delta_ens_pct"],
            f"  C{r['variant']}", fontsize=8,
        )
    ax.set_xlabel("dSD [%]")
    ax.set_ylabel("dEENS [%]")
    ax.set_zlabel("dENS [%]")
    ax.set_title("R3 deltas vs Case 1")
    fig.tight_layout()
    _save(fig, path)
