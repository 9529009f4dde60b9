"""Command-line front end.

Subcommands::

    gridr3 reliability  --case F --variant N --years N --cov F --seed S ...
    gridr3 robustness   --case F --variant N --alphas 1,1.1,... --floor on|off
    gridr3 resilience   --case F --variant N [--input robustness-result.json]
    gridr3 pipeline     run all three for variants 1..8, then the report
    gridr3 report       assemble the combined R3 report from artifacts

Every command writes ``result.json`` plus CSV/SVG artifacts and a
``manifest.json`` under ``<out>/<case-dir>/<command>/``.  The manifest
captures everything needed to reproduce the run; its SHA-256 (computed
without the timestamp) is embedded in every result file, and re-running a
command with the same manifest reproduces the result files byte for byte.

Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cascade import SweepSummary, run_sweep
from .model import (
    CaseError,
    NetworkCase,
    TopologyState,
    build_variant,
    bundled_case_path,
    load_case_file,
)
from .powerflow import PowerFlowError
from .recovery import LIMITS_CASCADE, LIMITS_THERMAL, RecoveryConfig, run_recovery
from .reliability import MonteCarloConfig, run_monte_carlo
from .report import VariantMetrics, build_report, format_table, report_to_dict

log = logging.getLogger("gridr3")

DEFAULT_ALPHAS = "1,1.1,1.2,1.3,1.4,1.5"
RATING_FLOOR_FRACTION = 0.05


# ---------------------------------------------------------------------------
# Artifact plumbing
# ---------------------------------------------------------------------------

def _canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_canonical_json(obj), encoding="utf-8")


def write_csv(path: Path, manifest_hash: str, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"# manifest_hash={manifest_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def build_manifest(command: str, args, config: dict) -> dict:
    case_path = Path(args.case)
    return {
        "command": command,
        "case_path": str(case_path),
        "case_sha256": hashlib.sha256(case_path.read_bytes()).hexdigest(),
        "variant": getattr(args, "variant", None),
        "config": config,
        "tool_version": __version__,
    }


def manifest_hash(manifest: dict) -> str:
    stripped = {k: v for k, v in manifest.items() if k != "created_utc"}
    return hashlib.sha256(
        json.dumps(stripped, sort_keys=True).encode()
    ).hexdigest()


def write_manifest(out_dir: Path, manifest: dict) -> str:
    import datetime

    digest = manifest_hash(manifest)
    stamped = {
        **manifest,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_json(out_dir / "manifest.json", stamped)
    return digest


def _case_dir(args) -> str:
    return f"case{args.variant}"


def _load_variant_case(args) -> NetworkCase:
    case = load_case_file(args.case)
    if args.variant != 1:
        case = build_variant(case, args.variant)
    return case


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_reliability(args) -> int:
    case = _load_variant_case(args)
    config = MonteCarloConfig(
        seed=args.seed,
        max_years=args.years,
        cov_threshold=args.cov,
        workers=args.workers,
        angle_bound=args.angle_bound,
    )
    log.info("reliability: %s, <=%d years, cov<%.3g", case.variant_label, args.years, args.cov)
    result = run_monte_carlo(case, config)
    ind = result.indicators

    out_dir = Path(args.out) / _case_dir(args) / "reliability"
    manifest = build_manifest(
        "reliability",
        args,
        {
            "seed": args.seed,
            "max_years": args.years,
            "cov_threshold": args.cov,
            "workers": args.workers,
            "angle_bound": args.angle_bound,
        },
    )
    digest = write_manifest(out_dir, manifest)
    write_json(
        out_dir / "result.json",
        {
            "manifest_hash": digest,
            "tool_version": __version__,
            "command": "reliability",
            "variant": args.variant,
            "variant_label": case.variant_label,
            "indicators": {
                "eens_mwh_per_yr": ind.eens,
                "edns_mw": ind.edns,
                "eflc_per_yr": ind.eflc,
                "lole_h_per_yr": ind.lole,
                "lolp": ind.lolp,
                "adlc_h_per_outage": ind.adlc,
                "adlc_undefined": ind.adlc_undefined,
            },
            "n_years": ind.n_years,
            "cov_eens": ind.cov_eens if math.isfinite(ind.cov_eens) else None,
            "converged": ind.converged,
        },
    )
    write_csv(
        out_dir / "yearly_ens.csv",
        digest,
        ["year", "ens_mwh"],
        [(y + 1, ens) for y, ens in enumerate(result.yearly_ens)],
    )
    log.info("reliability done: EENS=%.2f MWh/yr over %d years", ind.eens, ind.n_years)
    return 0


def _sweep_artifacts(out_dir: Path, digest: str, case: NetworkCase, sweep: SweepSummary) -> None:
    rep = sweep.representative
    write_json(
        out_dir / "result.json",
        {
            "manifest_hash": digest,
            "tool_version": __version__,
            "command": "robustness",
            "variant_label": case.variant_label,
            "n_scenarios": len(sweep.scenarios),
            "mean_final_sd": sweep.mean_final_sd,
            "representative": {
                "event_bus": rep.event_bus,
                "alpha": rep.alpha,
                "final_sd": rep.final_sd,
                "initial_rd_mw": rep.final_sd * case.total_peak_mw,
                "line_status": [int(s) for s in rep.trace.final_state.line_status],
                "generator_status": [
                    int(s) for s in rep.trace.final_state.generator_status
                ],
                "capacities_mw": [float(c) for c in rep.trace.capacities],
            },
        },
    )
    write_csv(
        out_dir / "scenarios.csv",
        digest,
        ["scenario_id", "event_bus", "alpha", "final_sd", "n_stages"],
        [
            (i + 1, s.event_bus, s.alpha, s.final_sd, len(s.trace.stages))
            for i, s in enumerate(sweep.scenarios)
        ],
    )
    write_csv(
        out_dir / "stages.csv",
        digest,
        ["scenario_id", "event_bus", "alpha", "stage", "tripped_line_ids", "island_count", "sd"],
        [
            (
                i + 1,
                s.event_bus,
                s.alpha,
                stage.stage_index,
                ";".join(str(l) for l in sorted(stage.tripped_lines)),
                len(stage.partition.islands),
                stage.sd,
            )
            for i, s in enumerate(sweep.scenarios)
            for stage in s.trace.stages
        ],
    )
    from .charts import render_sd_dispersion

    render_sd_dispersion(
        out_dir / "sd_dispersion.svg",
        [(s.event_bus, s.alpha, s.final_sd) for s in sweep.scenarios],
        sweep.mean_final_sd,
        case.variant_label,
    )


def cmd_robustness(args) -> int:
    case = _load_variant_case(args)
    alphas = args.alphas
    floor_fraction = RATING_FLOOR_FRACTION if args.floor == "on" else None
    log.info("robustness: %s, %d alphas, floor=%s", case.variant_label, len(alphas), args.floor)
    sweep = run_sweep(
        case,
        alphas,
        rating_floor_fraction=floor_fraction,
        workers=args.workers,
        angle_bound=args.angle_bound,
    )
    out_dir = Path(args.out) / _case_dir(args) / "robustness"
    manifest = build_manifest(
        "robustness",
        args,
        {
            "alphas": alphas,
            "floor": args.floor,
            "angle_bound": args.angle_bound,
            "workers": args.workers,
        },
    )
    digest = write_manifest(out_dir, manifest)
    _sweep_artifacts(out_dir, digest, case, sweep)
    log.info(
        "robustness done: %d scenarios, mean SD=%.4f",
        len(sweep.scenarios),
        sweep.mean_final_sd,
    )
    return 0


def _read_recovery_input(args) -> dict:
    if args.input is not None:
        path = Path(args.input)
    else:
        path = Path(args.out) / _case_dir(args) / "robustness" / "result.json"
    if not path.exists():
        raise FileNotFoundError(
            f"no restoration input state: {path} "
            "(run the robustness command first or pass --input)"
        )
    doc = json.loads(path.read_text(encoding="utf-8"))
    if "representative" in doc:
        return doc["representative"]
    return doc  # explicit topology-state file with the same fields


def cmd_resilience(args) -> int:
    case = _load_variant_case(args)
    rep = _read_recovery_input(args)
    mode = LIMITS_THERMAL if args.limits == "thermal" else LIMITS_CASCADE
    required = {"line_status", "generator_status", "initial_rd_mw"}
    if mode == LIMITS_CASCADE:
        required.add("capacities_mw")
    if missing := required - rep.keys():
        raise ValueError(
            f"restoration input lacks fields {sorted(missing)} "
            "(expected a robustness result.json or an equivalent state file)"
        )
    state = TopologyState(
        line_status=tuple(bool(v) for v in rep["line_status"]),
        generator_status=tuple(bool(v) for v in rep["generator_status"]),
    )
    initial_rd = float(rep["initial_rd_mw"])
    config = RecoveryConfig(
        n_c=args.nc,
        step_minutes=args.step_minutes,
        angle_bound=args.angle_bound,
        line_limits_mode=mode,
    )
    line_limits = None
    if mode == LIMITS_CASCADE:
        line_limits = np.asarray(rep["capacities_mw"], dtype=float)
    log.info("resilience: %s, n_c=%d, %s limits", case.variant_label, args.nc, args.limits)
    trace = run_recovery(
        case, state, initial_rd, config, line_limits=line_limits, workers=args.workers
    )

    out_dir = Path(args.out) / _case_dir(args) / "resilience"
    manifest = build_manifest(
        "resilience",
        args,
        {
            "nc": args.nc,
            "step_minutes": args.step_minutes,
            "angle_bound": args.angle_bound,
            "limits": args.limits,
            "input": str(args.input) if args.input else None,
            "workers": args.workers,
        },
    )
    digest = write_manifest(out_dir, manifest)
    final_rd = trace.steps[-1].rd if trace.steps else initial_rd
    write_json(
        out_dir / "result.json",
        {
            "manifest_hash": digest,
            "tool_version": __version__,
            "command": "resilience",
            "variant_label": case.variant_label,
            "ens_mwh": trace.ens_mwh,
            "initial_rd_mw": trace.initial_rd,
            "final_rd_mw": float(final_rd),
            "total_demand_mw": case.total_peak_mw,
            "iterations": len(trace.steps),
            "fully_restored": trace.fully_restored,
        },
    )
    curve_rows = [(0, 0.0, trace.initial_rd, "")] + [
        (
            s.iteration,
            s.iteration * config.step_minutes,
            float(s.rd),
            ";".join(str(l) for l in sorted(s.closed_lines)),
        )
        for s in trace.steps
    ]
    write_csv(
        out_dir / "recovery_curve.csv",
        digest,
        ["iteration", "minutes_elapsed", "rd_mw", "closed_line_ids"],
        curve_rows,
    )
    from .charts import render_recovery_curve

    render_recovery_curve(
        out_dir / "recovery_curve.svg",
        [row[1] for row in curve_rows],
        [row[2] for row in curve_rows],
        case.total_peak_mw,
        case.variant_label,
    )
    log.info("resilience done: ENS=%.2f MWh in %d iterations", trace.ens_mwh, len(trace.steps))
    return 0


def _read_result(out: Path, variant: int, command: str) -> dict:
    path = out / f"case{variant}" / command / "result.json"
    if not path.exists():
        raise FileNotFoundError(str(path))
    return json.loads(path.read_text(encoding="utf-8"))


def cmd_report(args) -> int:
    out = Path(args.out)
    metrics: dict[int, VariantMetrics] = {}
    missing: list[str] = []
    versions: set[str] = set()
    for variant in range(1, 9):
        try:
            rel = _read_result(out, variant, "reliability")
            rob = _read_result(out, variant, "robustness")
            res = _read_result(out, variant, "resilience")
        except FileNotFoundError as exc:
            missing.append(str(exc))
            continue
        for doc in (rel, rob, res):
            versions.add(doc.get("tool_version", "unknown"))
        metrics[variant] = VariantMetrics(
            variant=variant,
            eens_mwh_per_yr=rel["indicators"]["eens_mwh_per_yr"],
            mean_final_sd=rob["mean_final_sd"],
            ens_mwh=res["ens_mwh"],
        )
    if missing:
        for m in missing:
            print(f"missing artifact: {m}", file=sys.stderr)
        return 1
    if len(versions) > 1:
        print(
            f"refusing mixed-version inputs: {sorted(versions)}", file=sys.stderr
        )
        return 1

    report = build_report(metrics)
    doc = report_to_dict(report)

    out_dir = out / "report"
    manifest = build_manifest("report", args, {"variants": sorted(metrics)})
    digest = write_manifest(out_dir, manifest)
    write_json(out_dir / "report.json", {"manifest_hash": digest, **doc})
    (out_dir / "table.txt").write_text(format_table(report), encoding="utf-8")
    write_csv(
        out_dir / "r3_scatter.csv",
        digest,
        ["variant", "delta_sd_pct", "delta_eens_pct", "delta_ens_pct"],
        [
            (r.variant, r.delta_sd_pct, r.delta_eens_pct, r.delta_ens_pct)
            for r in report.rows
        ],
    )
    from .charts import render_r3_scatter

    render_r3_scatter(out_dir / "r3_scatter.svg", doc["rows"])
    print(format_table(report), end="")
    return 0


def cmd_pipeline(args) -> int:
    for variant in range(1, 9):
        sub = argparse.Namespace(**vars(args))
        sub.variant = variant
        log.info("pipeline: variant %d", variant)
        rc = cmd_reliability(sub)
        if rc:
            return rc
        rc = cmd_robustness(sub)
        if rc:
            return rc
        sub.input = None
        rc = cmd_resilience(sub)
        if rc:
            return rc
    return cmd_report(args)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _alpha_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("alpha list is empty")
    if any(a < 1.0 for a in values):
        raise argparse.ArgumentTypeError("alphas must be >= 1")
    return values


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", default=str(bundled_case_path()), help="case file path")
    p.add_argument(
        "--variant", type=int, choices=range(1, 9), default=1, metavar="1..8",
        help="topology variant of the bundled 24-bus system",
    )
    p.add_argument("--out", default="out", help="output directory root")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--seed", type=int, default=42, help="RNG seed")
    p.add_argument("--angle-bound", type=float, default=0.6, help="bus angle bound [rad]")
    p.add_argument("--verbose", action="store_true", help="diagnostic logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridr3",
        description="Reliability, robustness and resilience assessment of DC-modeled grids",
    )
    parser.add_argument("--version", action="version", version=f"gridr3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reliability", help="sequential Monte Carlo indicators")
    _add_common(p)
    p.add_argument("--years", type=int, default=1500, help="maximum simulated years")
    p.add_argument("--cov", type=float, default=0.05, help="EENS convergence threshold")
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("robustness", help="cascading-failure disturbance sweep")
    _add_common(p)
    p.add_argument("--alphas", type=_alpha_list, default=_alpha_list(DEFAULT_ALPHAS),
                   help="comma-separated overload tolerances")
    p.add_argument("--floor", choices=["on", "off"], default="off",
                   help="raise capacities to 5%% of rating (times alpha)")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("resilience", help="optimal staged restoration")
    _add_common(p)
    p.add_argument("--nc", type=int, default=3, help="max lines closed per iteration")
    p.add_argument("--step-minutes", type=float, default=15.0,
                   help="duration of one restoration iteration")
    p.add_argument("--limits", choices=["cascade", "thermal"], default="cascade",
                   help="line limits during restoration")
    p.add_argument("--input", default=None,
                   help="robustness result.json (or explicit state file)")
    p.set_defaults(func=cmd_resilience)

    p = sub.add_parser("pipeline", help="all variants, all assessments, then report")
    _add_common(p)
    p.add_argument("--years", type=int, default=1500, help="maximum simulated years")
    p.add_argument("--cov", type=float, default=0.05, help="EENS convergence threshold")
    p.add_argument("--alphas", type=_alpha_list, default=_alpha_list(DEFAULT_ALPHAS))
    p.add_argument("--floor", choices=["on", "off"], default="off")
    p.add_argument("--nc", type=int, default=3)
    p.add_argument("--step-minutes", type=float, default=15.0)
    p.add_argument("--limits", choices=["cascade", "thermal"], default="cascade")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="combined R3 report from existing artifacts")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.verbose:
        from .powerflow import set_verbose_solver

        set_verbose_solver(True)
        logging.getLogger("gridr3").setLevel(logging.DEBUG)
    else:
        logging.getLogger("gridr3").setLevel(logging.INFO)
    try:
        return args.func(args)
    except (CaseError, PowerFlowError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
