"""Sequential Monte Carlo security assessment.

Chronological two-state sampling of every failable line and generator over
8760 hourly steps, hourly maximum-served-load evaluation of the sampled
outage states, and the six standard indicator formulas (EENS, EDNS, EFLC,
LOLE, LOLP, ADLC) with a coefficient-of-variation stopping rule on the
EENS estimator.

Rates are per year; mean times to failure/repair are ``8760 / rate`` hours,
so exponential state durations are drawn as ``-ln(u) * 8760 / rate``.

Simulated years are independent work units: each year draws from its own
RNG stream derived from ``(seed, year_index)`` and the yearly results are
always reduced in year order, so indicators are identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .model import HOURS_PER_YEAR, NetworkCase, TopologyState, connected_components
from .powerflow import (
    DEFAULT_ANGLE_BOUND_RAD,
    max_served_value,
    solve_dc_flow,
)

SHORTFALL_TOL_MW = 1e-6
_WITNESS_TOL = 1e-9

Component = tuple[str, int]  # ("line", id) or ("gen", id)


class SamplingError(ValueError):
    """Invalid argument to one of the sampling primitives."""


@dataclass(frozen=True)
class TwoStateParams:
    """Failure/repair rates of a two-state component, per year."""

    failure_rate: float
    repair_rate: float

    @property
    def mttf_hours(self) -> float:
        return HOURS_PER_YEAR / self.failure_rate if self.failure_rate > 0 else math.inf

    @property
    def mttr_hours(self) -> float:
        return HOURS_PER_YEAR / self.repair_rate if self.repair_rate > 0 else math.inf


def sample_ttr(params: TwoStateParams, u: float) -> float:
    """Time to repair in hours from a uniform draw ``u`` in (0, 1]."""
    if not 0.0 < u <= 1.0:
        raise SamplingError(f"u must be in (0, 1], got {u!r}")
    return -math.log(u) * params.mttr_hours


def sample_ttf(params: TwoStateParams, u: float) -> float:
    """Time to failure in hours; a zero failure rate never fails (+inf)."""
    if not 0.0 < u <= 1.0:
        raise SamplingError(f"u must be in (0, 1], got {u!r}")
    if params.failure_rate == 0:
        return math.inf
    return -math.log(u) * HOURS_PER_YEAR / params.failure_rate


@dataclass(frozen=True)
class OutageEvent:
    """Maximal run of hours with an unchanged, non-empty set of failed
    components.  ``end_hour`` is exclusive."""

    start_hour: int
    end_hour: int
    components: frozenset[Component]


@dataclass(frozen=True)
class YearTimeline:
    n_hours: int
    events: tuple[OutageEvent, ...]

    def down_hours(self) -> int:
        return sum(ev.end_hour - ev.start_hour for ev in self.events)


@dataclass(frozen=True)
class DisruptionRecord:
    duration_hours: float
    energy_not_supplied_mwh: float


@dataclass(frozen=True)
class ReliabilityIndicators:
    eens: float            # MWh / yr
    edns: float            # MW
    eflc: float            # interruptions / yr
    lole: float            # h / yr
    lolp: float            # fraction of the year
    adlc: float            # h / interruption (0 with flag when EFLC == 0)
    n_years: int
    cov_eens: float
    converged: bool = True
    adlc_undefined: bool = False


@dataclass(frozen=True)
class MonteCarloConfig:
    seed: int = 42
    max_years: int = 1500
    cov_threshold: float = 0.05
    workers: int = 1
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD


@dataclass(frozen=True)
class MonteCarloResult:
    indicators: ReliabilityIndicators
    yearly_ens: tuple[float, ...]


# ---------------------------------------------------------------------------
# Chronological state sampling
# ---------------------------------------------------------------------------

def _failable_components(
    case: NetworkCase, base_state: TopologyState
) -> list[tuple[Component, TwoStateParams]]:
    comps = []
    for ln, closed in zip(case.lines, base_state.line_status):
        if closed and ln.failure_rate > 0:
            comps.append((("line", ln.id), TwoStateParams(ln.failure_rate, ln.repair_rate)))
    for g, on in zip(case.generators, base_state.generator_status):
        if on and g.failure_rate > 0:
            comps.append((("gen", g.id), TwoStateParams(g.failure_rate, g.repair_rate)))
    return comps


def simulate_year(
    case: NetworkCase,
    base_state: TopologyState | None = None,
    rng: np.random.Generator | None = None,
) -> YearTimeline:
    """Sample one chronological year of component states.

    Each failable component alternates up/down with exponential durations,
    starting up at hour 0 and truncated at 8760 h.  A component counts as
    down during hour ``h`` when its outage interval covers the instant
    ``t = h``.  Overlapping outages of several components are preserved:
    the returned events segment the year wherever the failed set changes.
    """
    if base_state is None:
        base_state = case.all_closed_state()
    if rng is None:
        rng = np.random.default_rng()

    transitions: dict[int, tuple[list[Component], list[Component]]] = {}

    def mark(comp: Component, start_h: int, end_h: int) -> None:
        transitions.setdefault(start_h, ([], []))[0].append(comp)
        transitions.setdefault(end_h, ([], []))[1].append(comp)

    for comp, params in _failable_components(case, base_state):
        t = 0.0
        while t < HOURS_PER_YEAR:
            ttf = sample_ttf(params, 1.0 - rng.random())
            fail = t + ttf
            if fail >= HOURS_PER_YEAR:
                break
            ttr = sample_ttr(params, 1.0 - rng.random())
            repair = min(fail + ttr, HOURS_PER_YEAR)
            start_h = math.ceil(fail)
            end_h = math.ceil(repair)
            if end_h > start_h:
                mark(comp, start_h, min(end_h, HOURS_PER_YEAR))
            t = fail + ttr

    events: list[OutageEvent] = []

    def emit(start: int, end: int, comps: frozenset[Component]) -> None:
        if events and events[-1].end_hour == start and events[-1].components == comps:
            events[-1] = OutageEvent(events[-1].start_hour, end, comps)
        else:
            events.append(OutageEvent(start, end, comps))

    down: set[Component] = set()
    prev_hour = 0
    for hour in sorted(transitions):
        if down and hour > prev_hour:
            emit(prev_hour, hour, frozenset(down))
        added, removed = transitions[hour]
        down.difference_update(removed)
        down.update(added)
        prev_hour = hour
    if down and prev_hour < HOURS_PER_YEAR:
        emit(prev_hour, HOURS_PER_YEAR, frozenset(down))

    return YearTimeline(n_hours=HOURS_PER_YEAR, events=tuple(events))


# ---------------------------------------------------------------------------
# Hourly curtailment evaluation
# ---------------------------------------------------------------------------

class CurtailmentEvaluator:
    """Computes optimal served load per hour, with exact shortcuts.

    For a fixed outage state the proportional dispatch scales linearly with
    the island's served target, so one linear flow solve per state yields a
    feasibility *witness* for every load level at once: whenever the scaled
    witness respects all flow and angle limits, its served total (demand
    capped by available capacity, per island) is provably optimal and the
    LP is skipped.  Hours where the witness is violated fall back to the
    exact dispatch LP.  Both routes produce the same optimum; the witness
    only changes speed.  The shortcut requires every generator minimum to
    be zero, which the shipped data satisfies; otherwise every hour uses
    the LP.
    """

    def __init__(
        self,
        case: NetworkCase,
        base_state: TopologyState | None = None,
        angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
    ):
        self.case = case
        self.base_state = base_state if base_state is not None else case.all_closed_state()
        self.angle_bound = angle_bound
        self.witness_enabled = bool(np.all(case.gen_pmin == 0.0))
        self._states: dict[frozenset[Component], TopologyState] = {}
        self._units: dict[tuple[int, int], tuple] = {}
        self._lp_cache: dict[tuple[int, int, float], float] = {}

    def state_for(self, failed: frozenset[Component]) -> TopologyState:
        try:
            return self._states[failed]
        except KeyError:
            pass
        state = self.case.state_with(
            base=self.base_state,
            open_lines=[cid for kind, cid in failed if kind == "line"],
            off_generators=[cid for kind, cid in failed if kind == "gen"],
        )
        self._states[failed] = state
        return state

    def _unit_solution(self, state: TopologyState):
        key = state.pack()
        try:
            return self._units[key]
        except KeyError:
            pass
        case = self.case
        part = connected_components(case, state)
        n_isl = len(part.islands)
        bus_island = np.zeros(case.n_buses, dtype=int)
        for i, isl in enumerate(part.islands):
            for b in isl:
                bus_island[case.bus_pos[b]] = i

        gen_on = np.asarray(state.generator_status, dtype=float)
        cap = np.zeros(n_isl)
        np.add.at(cap, bus_island[case.gen_bus_idx], case.gen_pmax * gen_on)
        peak = np.zeros(n_isl)
        np.add.at(peak, bus_island[case.load_bus_idx], case.load_peak)

        # Injection for a served target of 1 MW in every active island.
        inj = np.zeros(case.n_buses)
        active = (cap > 0) & (peak > 0)
        gen_share = np.where(
            active[bus_island[case.gen_bus_idx]],
            case.gen_pmax * gen_on / np.maximum(cap[bus_island[case.gen_bus_idx]], 1e-300),
            0.0,
        )
        load_share = np.where(
            active[bus_island[case.load_bus_idx]],
            case.load_peak / np.maximum(peak[bus_island[case.load_bus_idx]], 1e-300),
            0.0,
        )
        np.add.at(inj, case.gen_bus_idx, gen_share)
        np.subtract.at(inj, case.load_bus_idx, load_share)

        sol = solve_dc_flow(case, state, inj)
        f_unit = np.abs(np.asarray(sol.flows))
        theta_unit = np.abs(np.asarray(sol.angles))
        line_island = bus_island[case.line_from_idx]
        unit = (cap, peak, f_unit, theta_unit, line_island, bus_island)
        self._units[key] = unit
        return unit

    def _lp_served(self, state: TopologyState, factor: float) -> float:
        key = state.pack() + (factor,)
        try:
            return self._lp_cache[key]
        except KeyError:
            pass
        served = max_served_value(
            self.case, state, load_factor=factor, angle_bound=self.angle_bound
        )
        self._lp_cache[key] = served
        return served

    def served_batch(self, state: TopologyState, factors: np.ndarray) -> np.ndarray:
        """Optimal served MW for each load factor under one outage state."""
        factors = np.asarray(factors, dtype=float)
        if not self.witness_enabled:
            return np.array([self._lp_served(state, float(f)) for f in factors])

        cap, peak, f_unit, theta_unit, line_island, bus_island = self._unit_solution(state)
        targets = np.minimum(np.outer(factors, peak), cap)  # (H, islands)
        served = targets.sum(axis=1)

        line_ok = (
            targets[:, line_island] * f_unit
            <= self.case.line_rating + _WITNESS_TOL
        ).all(axis=1)
        angle_ok = (
            targets[:, bus_island] * theta_unit <= self.angle_bound + _WITNESS_TOL
        ).all(axis=1)
        needs_lp = ~(line_ok & angle_ok)
        for h in np.flatnonzero(needs_lp):
            served[h] = self._lp_served(state, float(factors[h]))
        return served


def evaluate_curtailment(
    case: NetworkCase,
    timeline: YearTimeline,
    profile: Sequence[float] | None = None,
    base_state: TopologyState | None = None,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
    evaluator: CurtailmentEvaluator | None = None,
) -> list[DisruptionRecord]:
    """Hourly shortfall scan of one sampled year.

    For every hour inside an outage event the maximum-served dispatch runs
    with failed lines open and failed generators unavailable at that hour's
    load level; contiguous shortfall hours merge into one disruption with
    their summed energy.  Hours with all components up are skipped after a
    one-time check that the intact grid serves the year's peak without
    shedding (when it does not, every hour is evaluated instead).
    """
    if evaluator is None:
        evaluator = CurtailmentEvaluator(case, base_state, angle_bound)
    if profile is not None and len(profile) != timeline.n_hours:
        raise ValueError(
            f"profile has {len(profile)} entries, timeline {timeline.n_hours} hours"
        )
    factors_all = (
        np.ones(timeline.n_hours) if profile is None else np.asarray(profile, dtype=float)
    )
    total_peak = case.total_peak_mw

    # Connected-case assumption: the intact grid serves the peak hour.
    base = evaluator.state_for(frozenset())
    peak_factor = float(factors_all.max())
    base_served = float(evaluator.served_batch(base, np.array([peak_factor]))[0])
    skip_intact = base_served >= total_peak * peak_factor - SHORTFALL_TOL_MW

    segments: list[tuple[int, int, frozenset[Component]]] = [
        (ev.start_hour, ev.end_hour, ev.components) for ev in timeline.events
    ]
    if not skip_intact:
        # Degenerate case: fill the gaps so intact hours are evaluated too.
        filled: list[tuple[int, int, frozenset[Component]]] = []
        cursor = 0
        for start, end, comps in segments:
            if start > cursor:
                filled.append((cursor, start, frozenset()))
            filled.append((start, end, comps))
            cursor = end
        if cursor < timeline.n_hours:
            filled.append((cursor, timeline.n_hours, frozenset()))
        segments = filled

    records: list[DisruptionRecord] = []
    run_start: int | None = None
    run_end = -1
    run_ens = 0.0

    def flush() -> None:
        nonlocal run_start, run_ens
        if run_start is not None:
            records.append(
                DisruptionRecord(
                    duration_hours=float(run_end - run_start + 1),
                    energy_not_supplied_mwh=run_ens,
                )
            )
        run_start = None
        run_ens = 0.0

    for start, end, comps in segments:
        state = evaluator.state_for(comps)
        factors = factors_all[start:end]
        served = evaluator.served_batch(state, factors)
        shortfall = total_peak * factors - served
        for offset in np.flatnonzero(shortfall > SHORTFALL_TOL_MW):
            hour = start + int(offset)
            if run_start is not None and hour != run_end + 1:
                flush()
            if run_start is None:
                run_start = hour
            run_end = hour
            run_ens += float(shortfall[offset])
    flush()
    return records


# ---------------------------------------------------------------------------
# Indicators
# ---------------------------------------------------------------------------

def _cov_of_mean(samples: np.ndarray) -> float:
    mean = samples.mean()
    if mean == 0.0:
        return 0.0
    if len(samples) < 2:
        return math.inf
    return float(samples.std(ddof=1) / math.sqrt(len(samples)) / mean)


def compute_indicators(
    records_per_year: Sequence[Sequence[DisruptionRecord]],
    n_years: int | None = None,
) -> ReliabilityIndicators:
    """Sample means of the six indicators over the simulated years."""
    if n_years is None:
        n_years = len(records_per_year)
    if n_years < 1 or n_years != len(records_per_year):
        raise ValueError(
            f"n_years={n_years} does not match {len(records_per_year)} record lists"
        )
    yearly_ens = np.array(
        [sum(r.energy_not_supplied_mwh for r in recs) for recs in records_per_year]
    )
    total_duration = sum(r.duration_hours for recs in records_per_year for r in recs)
    total_count = sum(len(recs) for recs in records_per_year)

    eens = float(yearly_ens.sum() / n_years)
    eflc = total_count / n_years
    lole = total_duration / n_years
    adlc_undefined = eflc == 0.0
    return ReliabilityIndicators(
        eens=eens,
        edns=eens / HOURS_PER_YEAR,
        eflc=eflc,
        lole=lole,
        lolp=lole / HOURS_PER_YEAR,
        adlc=0.0 if adlc_undefined else lole / eflc,
        n_years=n_years,
        cov_eens=_cov_of_mean(yearly_ens),
        adlc_undefined=adlc_undefined,
    )


# ---------------------------------------------------------------------------
# Monte Carlo driver
# ---------------------------------------------------------------------------

_WORKER_CTX: dict | None = None


def _worker_init(case: NetworkCase, base_state: TopologyState, angle_bound: float) -> None:
    global _WORKER_CTX
    _WORKER_CTX = {
        "case": case,
        "base_state": base_state,
        "evaluator": CurtailmentEvaluator(case, base_state, angle_bound),
    }


def _worker_year(args: tuple[int, int]) -> tuple[int, tuple[DisruptionRecord, ...]]:
    seed, year = args
    ctx = _WORKER_CTX
    case = ctx["case"]
    rng = np.random.default_rng([seed, year])
    timeline = simulate_year(case, ctx["base_state"], rng)
    records = evaluate_curtailment(
        case,
        timeline,
        profile=case.load_profile,
        evaluator=ctx["evaluator"],
    )
    return year, tuple(records)


def run_monte_carlo(
    case: NetworkCase,
    config: MonteCarloConfig,
    base_state: TopologyState | None = None,
) -> MonteCarloResult:
    """Run sequential Monte Carlo until the EENS coefficient of variation
    drops below ``config.cov_threshold`` or ``config.max_years`` is reached.

    Year ``y`` always uses the RNG stream ``(seed, y)`` and convergence is
    decided on the ordered year prefix, so the result depends only on the
    seed, never on the worker count or scheduling.
    """
    if config.max_years < 1:
        raise ValueError("max_years must be >= 1")
    if base_state is None:
        base_state = case.all_closed_state()

    per_year: list[tuple[DisruptionRecord, ...]] = []
    converged = False

    def consume(results: Iterable[tuple[int, tuple[DisruptionRecord, ...]]]) -> bool:
        nonlocal converged
        for _, records in results:
            per_year.append(records)
            if len(per_year) >= 2:
                ens = np.array(
                    [sum(r.energy_not_supplied_mwh for r in recs) for recs in per_year]
                )
                if _cov_of_mean(ens) < config.cov_threshold:
                    converged = True
                    return True
        return False

    if config.workers <= 1:
        _worker_init(case, base_state, config.angle_bound)
        try:
            for year in range(1, config.max_years + 1):
                if consume([_worker_year((config.seed, year))]):
                    break
        finally:
            global _WORKER_CTX
            _WORKER_CTX = None
    else:
        block = config.workers * 2
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_worker_init,
            initargs=(case, base_state, config.angle_bound),
        ) as pool:
            next_year = 1
            while next_year <= config.max_years and not converged:
                batch = range(
                    next_year, min(next_year + block, config.max_years + 1)
                )
                args = [(config.seed, y) for y in batch]
                if consume(pool.map(_worker_year, args)):
                    break
                next_year += len(args)

    indicators = compute_indicators(per_year)
    indicators = replace(
        indicators,
        converged=converged or indicators.cov_eens < config.cov_threshold,
    )
    yearly = tuple(
        float(sum(r.energy_not_supplied_mwh for r in recs)) for recs in per_year
    )
    return MonteCarloResult(indicators=indicators, yearly_ens=yearly)
