"""Cascading-failure simulation and the deterministic disturbance sweep.

A cascade starts from a deterministic operating point of the intact grid;
every line gets a trip capacity equal to the overload tolerance ``alpha``
times its absolute base flow.  After the initiating disturbance the
simulation alternates flow recomputation, simultaneous tripping of every
line strictly above its capacity, island detection, and per-island energy
balancing, until no line is overloaded.  The satisfied-demand index SD
(served fraction of total demand) is recorded at every disintegration
stage; it can only decrease, because splitting an island never increases
``min(generation, demand)``.

Line flows inside an island are computed with generator outputs scaled
proportionally to their capacity and loads scaled proportionally whenever
island demand exceeds island capacity, which realizes the balanced totals
without choosing among units arbitrarily.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    IslandPartition,
    NetworkCase,
    RTS24_EVENT_EXCLUDED_BUSES,
    TopologyState,
    connected_components,
    incident_lines,
)
from .powerflow import (
    DEFAULT_ANGLE_BOUND_RAD,
    DispatchSolution,
    max_served_dispatch,
    solve_dc_flow,
)

OVERLOAD_TOL_MW = 1e-6


@dataclass(frozen=True)
class CascadeConfig:
    """Overload tolerance and optional capacity floors.

    ``capacity_floor_mw`` raises every capacity to an absolute MW value;
    ``rating_floor_fraction`` raises line k's capacity to
    ``alpha * fraction * rating_k``.  Both floors default to off so that
    capacities are exactly ``alpha * |base flow|``, under which a line with
    zero base flow trips on any nonzero flow (degenerate but faithful to
    the proportional-capacity rule).
    """

    alpha: float
    capacity_floor_mw: float | None = None
    rating_floor_fraction: float | None = None

    def __post_init__(self):
        if self.alpha < 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")


@dataclass(frozen=True)
class InitiatingEvent:
    """Disturbance that disconnects one bus by opening its incident lines."""

    bus: int
    line_ids: frozenset[int]

    @property
    def description(self) -> str:
        lines = ",".join(str(i) for i in sorted(self.line_ids))
        return f"bus {self.bus} disconnected (lines {lines})"


@dataclass(frozen=True)
class CascadeStage:
    stage_index: int
    tripped_lines: frozenset[int]
    partition: IslandPartition
    served_per_island: tuple[float, ...]
    sd: float


@dataclass(frozen=True)
class CascadeTrace:
    initiating_event: str
    event: InitiatingEvent
    base_flows: tuple[float, ...]
    capacities: tuple[float, ...]
    stages: tuple[CascadeStage, ...]
    final_sd: float
    final_state: TopologyState


@dataclass(frozen=True)
class ScenarioResult:
    event_bus: int
    alpha: float
    final_sd: float
    trace: CascadeTrace


@dataclass(frozen=True)
class SweepSummary:
    scenarios: tuple[ScenarioResult, ...]
    mean_final_sd: float
    representative: ScenarioResult
    representative_state: TopologyState


def line_capacities(base_flows, config: CascadeConfig, ratings=None) -> np.ndarray:
    """Per-line trip capacities: ``alpha * |base flow|`` with optional floors."""
    caps = config.alpha * np.abs(np.asarray(base_flows, dtype=float))
    if config.capacity_floor_mw is not None:
        caps = np.maximum(caps, config.capacity_floor_mw)
    if config.rating_floor_fraction is not None:
        if ratings is None:
            raise ValueError("rating_floor_fraction requires per-line ratings")
        caps = np.maximum(
            caps,
            config.alpha * config.rating_floor_fraction * np.asarray(ratings, dtype=float),
        )
    return caps


def initiating_events(
    case: NetworkCase, exclude_buses=None
) -> tuple[InitiatingEvent, ...]:
    """One disturbance per eligible bus, opening all its incident lines.

    For the bundled 24-bus system family the reinforcement-candidate buses
    {6, 9, 14, 15, 24} are excluded by default (19 events); pass an explicit
    collection (possibly empty) to override, and for any other grid all
    buses are eligible by default.
    """
    if exclude_buses is None:
        exclude_buses = (
            RTS24_EVENT_EXCLUDED_BUSES if case.is_rts24_family() else frozenset()
        )
    else:
        exclude_buses = frozenset(exclude_buses)
    return tuple(
        InitiatingEvent(bus=b.id, line_ids=incident_lines(case, b.id))
        for b in case.buses
        if b.id not in exclude_buses
    )


def island_balance(island, case: NetworkCase, state: TopologyState) -> float:
    """Served MW of one island: 0 without generators, otherwise
    demand capped by the available generation capacity."""
    case.check_state(state)
    cap = sum(
        g.pmax_mw
        for g, on in zip(case.generators, state.generator_status)
        if on and g.bus in island
    )
    if cap <= 0.0:
        return 0.0
    demand = sum(ld.peak_mw for ld in case.loads if ld.bus in island)
    return min(cap, demand)


def _balanced_flows(
    case: NetworkCase,
    state: TopologyState,
    partition: IslandPartition,
    served_per_island,
) -> np.ndarray:
    """Flows under proportional gen/load scaling realizing the island totals."""
    inj = np.zeros(case.n_buses)
    gen_on = np.asarray(state.generator_status, dtype=bool)
    for island, served in zip(partition.islands, served_per_island):
        if served <= 0.0:
            continue
        bus_set = island
        cap = 0.0
        demand = 0.0
        for g, on in zip(case.generators, gen_on):
            if on and g.bus in bus_set:
                cap += g.pmax_mw
        for ld in case.loads:
            if ld.bus in bus_set:
                demand += ld.peak_mw
        gen_scale = served / cap
        load_scale = served / demand
        for g, on in zip(case.generators, gen_on):
            if on and g.bus in bus_set:
                inj[case.bus_pos[g.bus]] += g.pmax_mw * gen_scale
        for ld in case.loads:
            if ld.bus in bus_set:
                inj[case.bus_pos[ld.bus]] -= ld.peak_mw * load_scale
    return np.asarray(solve_dc_flow(case, state, inj).flows)


def run_cascade(
    case: NetworkCase,
    event: InitiatingEvent,
    config: CascadeConfig,
    base_dispatch: DispatchSolution | None = None,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
) -> CascadeTrace:
    """Simulate one cascade from the given initiating disturbance.

    ``base_dispatch`` (the intact-grid operating point, at peak load and
    thermal line limits) may be precomputed once and shared across the
    scenarios of a sweep; it determines base flows and hence capacities.
    """
    if base_dispatch is None:
        base_dispatch = max_served_dispatch(
            case, case.all_closed_state(), angle_bound=angle_bound
        )
    base_flows = np.asarray(base_dispatch.flows)
    caps = line_capacities(base_flows, config, ratings=case.line_rating)

    total_demand = case.total_peak_mw
    state = case.state_with(open_lines=event.line_ids)
    tripped = frozenset(event.line_ids)
    stages: list[CascadeStage] = []
    stage_idx = 1

    while True:
        partition = connected_components(case, state)
        served = tuple(
            island_balance(island, case, state) for island in partition.islands
        )
        sd = sum(served) / total_demand if total_demand > 0 else 1.0
        stages.append(
            CascadeStage(
                stage_index=stage_idx,
                tripped_lines=tripped,
                partition=partition,
                served_per_island=served,
                sd=sd,
            )
        )
        flows = _balanced_flows(case, state, partition, served)
        status = np.asarray(state.line_status, dtype=bool)
        overloaded = status & (np.abs(flows) > caps + OVERLOAD_TOL_MW)
        if not overloaded.any():
            break
        tripped = frozenset(case.lines[i].id for i in np.flatnonzero(overloaded))
        state = case.state_with(base=state, open_lines=tripped)
        stage_idx += 1

    return CascadeTrace(
        initiating_event=event.description,
        event=event,
        base_flows=tuple(base_flows),
        capacities=tuple(caps),
        stages=tuple(stages),
        final_sd=stages[-1].sd,
        final_state=state,
    )


# ---------------------------------------------------------------------------
# Deterministic scenario sweep
# ---------------------------------------------------------------------------

_SWEEP_CTX: dict | None = None


def _sweep_init(case, config_kwargs, base_dispatch):
    global _SWEEP_CTX
    _SWEEP_CTX = {
        "case": case,
        "config_kwargs": config_kwargs,
        "base_dispatch": base_dispatch,
    }


def _sweep_scenario(args: tuple[InitiatingEvent, float]) -> ScenarioResult:
    event, alpha = args
    ctx = _SWEEP_CTX
    config = CascadeConfig(alpha=alpha, **ctx["config_kwargs"])
    trace = run_cascade(ctx["case"], event, config, ctx["base_dispatch"])
    return ScenarioResult(
        event_bus=event.bus, alpha=alpha, final_sd=trace.final_sd, trace=trace
    )


def run_sweep(
    case: NetworkCase,
    alphas,
    events=None,
    capacity_floor_mw: float | None = None,
    rating_floor_fraction: float | None = None,
    workers: int = 1,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
) -> SweepSummary:
    """Run every (event, alpha) scenario and summarize.

    The representative scenario is the one whose final SD is nearest the
    mean (ties: lowest event bus, then lowest alpha); its final topology
    feeds the restoration study.  Scenario order and the reduction are
    fixed, so the summary is identical for any worker count.
    """
    alphas = sorted(float(a) for a in alphas)
    if not alphas:
        raise ValueError("alphas must be non-empty")
    if events is None:
        events = initiating_events(case)
    events = sorted(events, key=lambda e: e.bus)
    if not events:
        raise ValueError("events must be non-empty")

    base_dispatch = max_served_dispatch(
        case, case.all_closed_state(), angle_bound=angle_bound
    )
    config_kwargs = {
        "capacity_floor_mw": capacity_floor_mw,
        "rating_floor_fraction": rating_floor_fraction,
    }
    tasks = [(event, alpha) for event in events for alpha in alphas]

    if workers <= 1:
        _sweep_init(case, config_kwargs, base_dispatch)
        try:
            scenarios = [_sweep_scenario(t) for t in tasks]
        finally:
            global _SWEEP_CTX
            _SWEEP_CTX = None
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_sweep_init,
            initargs=(case, config_kwargs, base_dispatch),
        ) as pool:
            scenarios = list(pool.map(_sweep_scenario, tasks, chunksize=4))

    mean_sd = float(np.mean([s.final_sd for s in scenarios]))
    representative = min(
        scenarios, key=lambda s: (abs(s.final_sd - mean_sd), s.event_bus, s.alpha)
    )
    return SweepSummary(
        scenarios=tuple(scenarios),
        mean_final_sd=mean_sd,
        representative=representative,
        representative_state=representative.trace.final_state,
    )
