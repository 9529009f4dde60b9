"""Reliability, robustness and resilience (R3) toolkit for DC-modeled grids."""

from .model import (
    Bus,
    CaseError,
    CaseParseError,
    CaseValidationError,
    Generator,
    IslandPartition,
    Line,
    Load,
    NetworkCase,
    TopologyState,
    build_variant,
    connected_components,
    incident_lines,
    load_bundled_rts24,
    load_case,
    load_case_file,
    serialize_case,
)
from .powerflow import (
    BalanceError,
    DispatchError,
    DispatchSolution,
    FlowSolution,
    PowerFlowError,
    SingularSystemError,
    build_susceptance,
    max_served_dispatch,
    max_served_value,
    solve_dc_flow,
)
from .reliability import (
    DisruptionRecord,
    MonteCarloConfig,
    MonteCarloResult,
    OutageEvent,
    ReliabilityIndicators,
    TwoStateParams,
    YearTimeline,
    compute_indicators,
    evaluate_curtailment,
    run_monte_carlo,
    sample_ttf,
    sample_ttr,
    simulate_year,
)
from .cascade import (
    CascadeConfig,
    CascadeStage,
    CascadeTrace,
    InitiatingEvent,
    ScenarioResult,
    SweepSummary,
    initiating_events,
    island_balance,
    line_capacities,
    run_cascade,
    run_sweep,
)
from .recovery import (
    RecoveryConfig,
    RecoveryStepResult,
    RecoveryTrace,
    ens_above_curve,
    recovery_step,
    run_recovery,
)

__version__ = "0.1.0"
