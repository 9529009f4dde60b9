"""DC power flow and the maximum-served-demand dispatch optimization.

Two solvers share one set of conventions:

* :func:`solve_dc_flow` — plain linearized power flow for given nodal
  injections, solved island by island with the minimum-id bus of each
  island as angle reference.
* :func:`max_served_dispatch` — exact linear program that maximizes total
  served load subject to generator limits, line flow limits on closed
  lines, bus-angle bounds and nodal balance.  Open lines carry no flow and
  impose no angle coupling.

Flows are reported in MW with the orientation from ``from_bus`` to
``to_bus``: ``flow_k = b_k * (theta_from - theta_to) * base_mva``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from .model import IslandPartition, NetworkCase, TopologyState, connected_components

BALANCE_TOL_MW = 1e-6
SINGULAR_PIVOT_TOL = 1e-10
DEFAULT_ANGLE_BOUND_RAD = 0.6
LP_RELATIVE_GAP = 1e-9

# When enabled (CLI --verbose), the LP backend prints its iteration log to
# the diagnostics stream.
VERBOSE_SOLVER = False


def set_verbose_solver(enabled: bool) -> None:
    global VERBOSE_SOLVER
    VERBOSE_SOLVER = bool(enabled)


class PowerFlowError(RuntimeError):
    """Base class for flow/dispatch solver failures."""


class BalanceError(PowerFlowError):
    """An island's injections do not sum to zero."""

    def __init__(self, island_buses, residual_mw: float):
        self.island_buses = tuple(sorted(island_buses))
        self.residual_mw = float(residual_mw)
        super().__init__(
            f"island {self.island_buses} injections sum to "
            f"{self.residual_mw:.6g} MW (expected 0 within {BALANCE_TOL_MW:g})"
        )


class SingularSystemError(PowerFlowError):
    """The reduced susceptance system could not be factorized."""


class DispatchError(PowerFlowError):
    """The dispatch LP failed; carries the solver status message."""


@dataclass(frozen=True)
class FlowSolution:
    """Bus angles (rad), per-line MW flows and the island partition used."""

    angles: tuple[float, ...]
    flows: tuple[float, ...]
    islands: IslandPartition


@dataclass(frozen=True)
class DispatchSolution:
    gen_output: tuple[float, ...]
    served_load: tuple[float, ...]
    flows: tuple[float, ...]
    angles: tuple[float, ...]
    total_served: float


def build_susceptance(case: NetworkCase, state: TopologyState) -> np.ndarray:
    """Nodal susceptance matrix (per unit) over closed lines.

    Entry (n, m), n != m, is minus the summed susceptance of closed lines
    joining the buses; the diagonal makes every row sum to zero.
    """
    case.check_state(state)
    n = case.n_buses
    mat = np.zeros((n, n))
    status = np.asarray(state.line_status, dtype=bool)
    for f, t, b in zip(
        case.line_from_idx[status], case.line_to_idx[status], case.line_b[status]
    ):
        mat[f, t] -= b
        mat[t, f] -= b
        mat[f, f] += b
        mat[t, t] += b
    return mat


def solve_dc_flow(
    case: NetworkCase,
    state: TopologyState,
    injections_mw,
) -> FlowSolution:
    """Solve angles and flows for the given per-bus net MW injections.

    Every island's injections must sum to zero within ``BALANCE_TOL_MW``;
    the minimum-id bus of each island is the angle reference (0 rad).
    """
    inj = np.asarray(injections_mw, dtype=float)
    if inj.shape != (case.n_buses,):
        raise ValueError(
            f"injections must have length {case.n_buses}, got {inj.shape}"
        )
    part = connected_components(case, state)
    angles = np.zeros(case.n_buses)
    bmat = build_susceptance(case, state)
    p_pu = inj / case.base_mva

    for island in part.islands:
        idx = sorted(case.bus_pos[b] for b in island)
        residual = float(inj[idx].sum())
        if abs(residual) > BALANCE_TOL_MW:
            raise BalanceError(island, residual)
        if len(idx) == 1:
            continue
        keep = idx[1:]  # reference bus = minimum id in the island
        reduced = bmat[np.ix_(keep, keep)]
        try:
            lu, piv = scipy.linalg.lu_factor(reduced)
        except scipy.linalg.LinAlgError as exc:
            raise SingularSystemError(str(exc)) from None
        if np.min(np.abs(np.diag(lu))) < SINGULAR_PIVOT_TOL:
            raise SingularSystemError(
                f"reduced system pivot below {SINGULAR_PIVOT_TOL:g} "
                f"for island {tuple(sorted(island))}"
            )
        angles[keep] = scipy.linalg.lu_solve((lu, piv), p_pu[keep])

    status = np.asarray(state.line_status, dtype=bool)
    flows = np.where(
        status,
        case.line_b
        * (angles[case.line_from_idx] - angles[case.line_to_idx])
        * case.base_mva,
        0.0,
    )
    return FlowSolution(
        angles=tuple(angles), flows=tuple(flows), islands=part
    )


# ---------------------------------------------------------------------------
# Maximum served demand dispatch (LP)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DispatchLP:
    """Assembled LP: maximize served load.

    Variable layout: [gen outputs | served loads | bus angles | closed-line
    flows], all equality-constrained by nodal balance and flow-angle
    coupling.  Exposed so tests can enumerate the polytope independently.
    """

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    bounds: list[tuple[float, float]]
    n_gen: int
    n_load: int
    n_bus: int
    closed_line_idx: np.ndarray


def assemble_dispatch_lp(
    case: NetworkCase,
    state: TopologyState,
    load_factor: float = 1.0,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
    line_limits=None,
) -> DispatchLP:
    case.check_state(state)
    if line_limits is None:
        limits = case.line_rating
    else:
        limits = np.asarray(line_limits, dtype=float)
        if limits.shape != (len(case.lines),):
            raise ValueError(
                f"line_limits must have length {len(case.lines)}"
            )
    closed = np.flatnonzero(np.asarray(state.line_status, dtype=bool))
    if np.any(limits[closed] < 0):
        raise ValueError("line limits must be non-negative on closed lines")
    gen_on = np.asarray(state.generator_status, dtype=bool)

    n_g = len(case.generators)
    n_d = len(case.loads)
    n_b = case.n_buses
    n_k = len(closed)
    n_var = n_g + n_d + n_b + n_k
    off_d = n_g
    off_theta = n_g + n_d
    off_flow = n_g + n_d + n_b

    bounds: list[tuple[float, float]] = []
    for i in range(n_g):
        if gen_on[i]:
            bounds.append((case.gen_pmin[i], case.gen_pmax[i]))
        else:
            bounds.append((0.0, 0.0))
    for i in range(n_d):
        bounds.append((0.0, case.load_peak[i] * load_factor))
    part = connected_components(case, state)
    ref_positions = {min(case.bus_pos[b] for b in isl) for isl in part.islands}
    for i in range(n_b):
        if i in ref_positions:
            bounds.append((0.0, 0.0))
        else:
            bounds.append((-angle_bound, angle_bound))
    for k in closed:
        bounds.append((-limits[k], limits[k]))

    # Nodal balance rows, then flow-angle coupling rows.
    a_eq = np.zeros((n_b + n_k, n_var))
    b_eq = np.zeros(n_b + n_k)
    for i in range(n_g):
        a_eq[case.gen_bus_idx[i], i] += 1.0
    for i in range(n_d):
        a_eq[case.load_bus_idx[i], off_d + i] -= 1.0
    for j, k in enumerate(closed):
        f, t = case.line_from_idx[k], case.line_to_idx[k]
        a_eq[f, off_flow + j] -= 1.0  # flow leaves the from bus
        a_eq[t, off_flow + j] += 1.0
        coeff = case.line_b[k] * case.base_mva
        a_eq[n_b + j, off_flow + j] = 1.0
        a_eq[n_b + j, off_theta + f] = -coeff
        a_eq[n_b + j, off_theta + t] = coeff

    c = np.zeros(n_var)
    c[off_d : off_d + n_d] = -1.0  # maximize served load

    return DispatchLP(
        c=c,
        a_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        n_gen=n_g,
        n_load=n_d,
        n_bus=n_b,
        closed_line_idx=closed,
    )


def _solve_lp(c, a_eq, b_eq, bounds, a_ub=None, b_ub=None):
    res = linprog(
        c,
        A_eq=a_eq,
        b_eq=b_eq,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=bounds,
        method="highs",
        options={"disp": True} if VERBOSE_SOLVER else None,
    )
    if res.status != 0:
        raise DispatchError(
            f"dispatch LP failed (status {res.status}): {res.message}"
        )
    return res


def max_served_value(
    case: NetworkCase,
    state: TopologyState,
    load_factor: float = 1.0,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
    line_limits=None,
) -> float:
    """Optimal total served MW only (single LP, no tie-break refinement)."""
    lp = assemble_dispatch_lp(case, state, load_factor, angle_bound, line_limits)
    res = _solve_lp(lp.c, lp.a_eq, lp.b_eq, lp.bounds)
    return float(-res.fun)


def max_served_dispatch(
    case: NetworkCase,
    state: TopologyState,
    load_factor: float = 1.0,
    angle_bound: float = DEFAULT_ANGLE_BOUND_RAD,
    line_limits=None,
    lexicographic: bool = True,
) -> DispatchSolution:
    """Exact maximum-served-load dispatch for the given switching state.

    With ``lexicographic`` (the default), alternate optima are resolved by
    minimizing generator outputs in ascending id order, one at a time, so
    repeated runs and different machines report the same dispatch vector.
    The optimum value itself never depends on the flag.
    """
    lp = assemble_dispatch_lp(case, state, load_factor, angle_bound, line_limits)
    res = _solve_lp(lp.c, lp.a_eq, lp.b_eq, lp.bounds)
    total = float(-res.fun)
    x = res.x

    if lexicographic and lp.n_gen:
        # Pin total served, then minimize each generator in id order.
        pin_row = np.zeros((1, len(lp.c)))
        pin_row[0, lp.n_gen : lp.n_gen + lp.n_load] = 1.0
        a_eq = np.vstack([lp.a_eq, pin_row])
        b_eq = np.append(lp.b_eq, total)
        bounds = list(lp.bounds)
        c = np.zeros(len(lp.c))
        for g in range(lp.n_gen):
            lo, hi = bounds[g]
            if hi <= lo:  # unavailable or fixed unit, nothing to minimize
                continue
            c[:] = 0.0
            c[g] = 1.0
            try:
                res = _solve_lp(c, a_eq, b_eq, bounds)
            except DispatchError:
                # Exact pin can be marginally infeasible under float round-off;
                # retry once with a hair of slack on the pinned total.
                b_eq[-1] = total - 1e-9 * max(1.0, abs(total))
                res = _solve_lp(c, a_eq, b_eq, bounds)
            x = res.x
            pinned = float(res.x[g])
            bounds[g] = (lo, min(hi, pinned + 1e-9 * max(1.0, abs(pinned))))
        total = float(np.sum(x[lp.n_gen : lp.n_gen + lp.n_load]))

    n_g, n_d, n_b = lp.n_gen, lp.n_load, lp.n_bus
    flows = np.zeros(len(case.lines))
    flows[lp.closed_line_idx] = x[n_g + n_d + n_b :]
    return DispatchSolution(
        gen_output=tuple(x[:n_g]),
        served_load=tuple(x[n_g : n_g + n_d]),
        flows=tuple(flows),
        angles=tuple(x[n_g + n_d : n_g + n_d + n_b]),
        total_served=total,
    )
