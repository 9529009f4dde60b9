"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Tolerances are pinned here and nowhere else.  Published benchmark values
for the 24-bus study are informational only (criterion 8): unpublished
seeds, unspecified added-line parameters and internally inconsistent
reported tables make bit-exact reproduction impossible, so acceptance
rests on criteria 1-7 plus the side-by-side reference columns in the
report.
"""

import json
import time

import numpy as np
import pytest

from gridr3 import (
    CascadeConfig,
    InitiatingEvent,
    MonteCarloConfig,
    RecoveryConfig,
    RecoveryTrace,
    ens_above_curve,
    initiating_events,
    max_served_dispatch,
    max_served_value,
    recovery_step,
    run_cascade,
    run_monte_carlo,
    run_sweep,
    solve_dc_flow,
)
from gridr3.cli import main
from gridr3.powerflow import assemble_dispatch_lp
from gridr3.recovery import LIMITS_THERMAL, RecoveryStepResult

from .conftest import make_triangle, make_two_bus
from .oracles import (
    best_closure_by_enumeration,
    lp_vertex_maximum,
    random_connected_case,
)
from .test_reliability import single_unit_case


def report(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n}: PASS — {text}")


def test_criterion_1_dc_flow_oracle():
    start = time.perf_counter()
    triangle = make_triangle(b_pu=1.0)
    state = triangle.all_closed_state()
    flows = solve_dc_flow(triangle, state, [100.0, -60.0, -40.0]).flows
    expected = (160.0 / 3.0, 140.0 / 3.0, -20.0 / 3.0)
    np.testing.assert_allclose(flows, expected, atol=1e-9)

    doubled = make_triangle(b_pu=2.0)
    flows2 = solve_dc_flow(doubled, doubled.all_closed_state(), [100.0, -60.0, -40.0]).flows
    np.testing.assert_allclose(flows2, flows, atol=1e-9)

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(1, f"triangle flows within 1e-9, scaling-invariant, {elapsed:.3f}s < 1s")


def test_criterion_2_dispatch_lp_oracle():
    two_bus = make_two_bus()
    served = max_served_dispatch(two_bus, two_bus.all_closed_state()).total_served
    assert served == 50.0

    fixtures = [
        (make_triangle(), None),
        (make_triangle(rating_mw=45.0), None),
        (make_triangle(gen_mw=55.0), None),
        (make_triangle(), np.array([30.0, 20.0, 15.0])),
        (make_triangle(load2_mw=120.0, load3_mw=10.0, rating_mw=60.0), None),
    ]
    for case, limits in fixtures:
        state = case.all_closed_state()
        lp = assemble_dispatch_lp(case, state, line_limits=limits)
        expected = lp_vertex_maximum(lp)
        got = max_served_value(case, state, line_limits=limits)
        assert got == pytest.approx(expected, rel=1e-7, abs=1e-7)
    report(2, "2-bus = 50 MW exactly; 3-bus optima match vertex enumeration @1e-7")


def test_criterion_3_reliability_analytic_oracle():
    start = time.perf_counter()
    case = single_unit_case(
        gen_mw=100.0, load_mw=100.0, failure_rate=4.0, mttr_hours=100.0
    )
    result = run_monte_carlo(
        case, MonteCarloConfig(seed=42, max_years=2000, cov_threshold=0.0)
    )
    ind = result.indicators
    assert ind.n_years == 2000

    lolp_target = 0.04367  # lambda / (lambda + mu) with mu = 8760/100
    eens_target = 38255.0
    assert abs(ind.lolp - lolp_target) / lolp_target <= 0.10
    assert abs(ind.eens - eens_target) / eens_target <= 0.10

    assert ind.edns == ind.eens / 8760.0
    assert ind.lolp == ind.lole / 8760.0
    assert ind.adlc * ind.eflc == pytest.approx(ind.lole, rel=1e-12)

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report(
        3,
        f"LOLP {ind.lolp:.5f} vs {lolp_target}, EENS {ind.eens:.0f} vs {eens_target:.0f} "
        f"(both within 10%), identities exact, {elapsed:.1f}s < 60s",
    )


def test_criterion_4_worker_determinism(rts24):
    results = {}
    for workers in (1, 4, 8):
        res = run_monte_carlo(
            rts24,
            MonteCarloConfig(seed=42, max_years=200, cov_threshold=0.0, workers=workers),
        )
        results[workers] = res
    assert results[1] == results[4] == results[8]
    ind = results[1].indicators
    assert ind.n_years == 200
    report(
        4,
        f"seed 42 / 200 years identical for 1, 4, 8 workers "
        f"(EENS {ind.eens:.2f} MWh/yr)",
    )


def test_criterion_5_cascade_suite(rts24):
    # Hand-derived ring outcomes (5%-of-rating capacity floor, 800 MW ratings).
    triangle = make_triangle()
    event = InitiatingEvent(bus=0, line_ids=frozenset({1}))
    collapse = run_cascade(
        triangle, event, CascadeConfig(alpha=1.5, rating_floor_fraction=0.05)
    )
    assert collapse.final_sd == 0.0
    survive = run_cascade(
        triangle, event, CascadeConfig(alpha=3.0, rating_floor_fraction=0.05)
    )
    assert survive.final_sd == 1.0

    # SD never increases across stages on 1000 random small networks.
    rng = np.random.default_rng(2025)
    checked = 0
    while checked < 1000:
        case = random_connected_case(rng, min_buses=3, max_buses=8)
        events = initiating_events(case)
        ev = events[int(rng.integers(0, len(events)))]
        alpha = float(rng.uniform(1.0, 3.0))
        trace = run_cascade(case, ev, CascadeConfig(alpha=alpha))
        sds = [s.sd for s in trace.stages]
        assert all(b <= a + 1e-9 for a, b in zip(sds, sds[1:]))
        checked += 1

    # Full sweep: exactly 19 x 6 scenarios, under 5 minutes per variant.
    alphas = [1, 1.1, 1.2, 1.3, 1.4, 1.5]
    timings = {}
    for variant_case, label in ((rts24, "Case 1"),):
        start = time.perf_counter()
        sweep = run_sweep(variant_case, alphas=alphas)
        timings[label] = time.perf_counter() - start
        assert len(sweep.scenarios) == 114
        assert timings[label] < 300.0
    report(
        5,
        f"ring trip/no-trip reproduced (SD 0 / SD 1), SD monotone on 1000 random nets, "
        f"114 scenarios in {timings['Case 1']:.1f}s < 300s",
    )


def test_criterion_6_recovery_optimality():
    rng = np.random.default_rng(77)
    config = RecoveryConfig(n_c=3, line_limits_mode=LIMITS_THERMAL)
    for _ in range(200):
        case = random_connected_case(rng, min_buses=3, max_buses=7)
        n_open = int(rng.integers(1, min(8, len(case.lines)) + 1))
        open_ids = sorted(
            int(i)
            for i in rng.choice([ln.id for ln in case.lines], size=n_open, replace=False)
        )
        state = case.state_with(open_lines=open_ids)
        step = recovery_step(case, state, config)
        subset, value = best_closure_by_enumeration(case, state, config.n_c)
        assert step.closed_lines == frozenset(subset)
        assert step.rd == pytest.approx(value, abs=1e-6)
        assert 1 <= len(step.closed_lines) <= config.n_c

    # Final RD equals the full-topology optimum on a fresh sample.
    from gridr3 import run_recovery

    for _ in range(10):
        case = random_connected_case(rng, min_buses=3, max_buses=6)
        open_ids = [ln.id for ln in case.lines][: min(5, len(case.lines))]
        state = case.state_with(open_lines=open_ids)
        trace = run_recovery(case, state, 0.0, config)
        full = max_served_value(case, case.all_closed_state())
        assert trace.steps[-1].rd == pytest.approx(full, abs=1e-6)
        for s in trace.steps:
            assert 1 <= len(s.closed_lines) <= config.n_c

    # Synthetic area fixture: one 15-minute slot at half of 2850 MW.
    fixture = RecoveryTrace(
        initial_state=None,
        initial_rd=1425.0,
        steps=(
            RecoveryStepResult(
                iteration=1, closed_lines=frozenset({1}), rd=2850.0, dispatch=None
            ),
        ),
        ens_mwh=0.0,
        fully_restored=True,
    )
    ens = ens_above_curve(fixture, 2850.0, RecoveryConfig())
    assert ens == 356.25
    report(
        6,
        "200 random nets match exhaustive enumeration, budgets held, "
        "final RD = full-topology optimum, ENS fixture = 356.25 MWh exactly",
    )


def test_criterion_7_desk_scale_pipeline(tmp_path):
    out = tmp_path / "out"
    start = time.perf_counter()
    rc = main(
        [
            "pipeline",
            "--years", "100",
            "--cov", "0.05",
            "--seed", "42",
            "--workers", "4",
            "--out", str(out),
        ]
    )
    elapsed = time.perf_counter() - start
    assert rc == 0
    assert elapsed < 1800.0

    report_doc = json.loads((out / "report" / "report.json").read_text())
    rows = {r["variant"]: r for r in report_doc["rows"]}
    assert set(rows) == set(range(1, 9))
    assert rows[1]["delta_sd_pct"] == 0.0
    assert rows[1]["delta_eens_pct"] == 0.0
    assert rows[1]["delta_ens_pct"] == 0.0
    for v in range(1, 9):
        for command in ("reliability", "robustness", "resilience"):
            assert (out / f"case{v}" / command / "result.json").exists()
        rob = json.loads((out / f"case{v}" / "robustness" / "result.json").read_text())
        assert rob["n_scenarios"] == 114  # 19 disturbances x 6 alphas
        res = json.loads((out / f"case{v}" / "resilience" / "result.json").read_text())
        assert res["fully_restored"] is True
        assert res["final_rd_mw"] == pytest.approx(2850.0, abs=1e-6)
    report(
        7,
        f"8 variants x (100-year MC + 114-scenario sweep + recovery) in "
        f"{elapsed/60:.1f} min < 30 min, Case 1 deltas = 0",
    )


def test_criterion_8_published_values_are_informational(tmp_path):
    # The published tables cannot be reproduced bit-exactly (unpublished
    # seeds, unspecified added-line parameters, and the reported
    # EDNS/LOLP/ADLC rows contradict their own defining ratios), so the
    # deliverable is the side-by-side comparison, not numeric equality.
    from gridr3.report import (
        PUBLISHED_DELTAS,
        PUBLISHED_EENS_MWH,
        PUBLISHED_ENS_MWH,
        PUBLISHED_MEAN_SD,
        VariantMetrics,
        build_report,
        report_to_dict,
    )

    # documented internal inconsistency: EENS/8760 does not match the
    # reported EDNS row (14.496 vs 15.23), so equality is not assertable.
    implied_edns = PUBLISHED_EENS_MWH[1] / 8760.0
    assert abs(implied_edns - 15.23) > 0.5

    metrics = {
        v: VariantMetrics(
            variant=v,
            eens_mwh_per_yr=PUBLISHED_EENS_MWH[v],
            mean_final_sd=PUBLISHED_MEAN_SD[v],
            ens_mwh=PUBLISHED_ENS_MWH[v],
        )
        for v in range(1, 9)
    }
    doc = report_to_dict(build_report(metrics))
    for row in doc["rows"]:
        assert row["published_delta_sd_pct"] == PUBLISHED_DELTAS[row["variant"]][0]
        assert row["published_delta_eens_pct"] == PUBLISHED_DELTAS[row["variant"]][1]
        assert row["published_delta_ens_pct"] == PUBLISHED_DELTAS[row["variant"]][2]
    assert "not reproducible" in doc["published_reference"]["note"]
    report(
        8,
        "published values carried as an informational side-by-side column; "
        "bit-exact reproduction documented as impossible",
    )
