"""Independent reference implementations used to cross-check the solvers.

Everything here deliberately avoids the production code paths: reachability
by boolean transitive closure instead of DFS, LP optima by basic-feasible-
solution enumeration instead of simplex, and restoration subsets by a plain
nested loop.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from gridr3 import Bus, Generator, Line, Load, NetworkCase, TopologyState
from gridr3.powerflow import DispatchLP, max_served_value


def reachability_partition(case: NetworkCase, state: TopologyState):
    """Connected components via boolean transitive closure (matrix powers)."""
    n = case.n_buses
    adj = np.eye(n, dtype=bool)
    for ln, closed in zip(case.lines, state.line_status):
        if closed:
            f, t = case.bus_pos[ln.from_bus], case.bus_pos[ln.to_bus]
            adj[f, t] = adj[t, f] = True
    reach = adj.copy()
    while True:
        nxt = reach @ reach
        if (nxt == reach).all():
            break
        reach = nxt
    groups = set()
    ids = [b.id for b in case.buses]
    for i in range(n):
        groups.add(frozenset(ids[j] for j in np.flatnonzero(reach[i])))
    return groups


def lp_vertex_maximum(lp: DispatchLP) -> float:
    """Maximum of the dispatch objective over all polytope vertices.

    Enumerates basic solutions: every choice of ``n - rank(A_eq)`` variables
    fixed at one of their bounds, with the rest solved from the equalities.
    Exponential, so only for tiny fixtures.
    """
    a_eq = np.asarray(lp.a_eq, dtype=float)
    b_eq = np.asarray(lp.b_eq, dtype=float)
    lo = np.array([b[0] for b in lp.bounds])
    hi = np.array([b[1] for b in lp.bounds])
    n = a_eq.shape[1]
    m = int(np.linalg.matrix_rank(a_eq))
    free = n - m
    obj = -np.asarray(lp.c)  # maximize served load

    best = -np.inf
    for fixed_vars in combinations(range(n), free):
        basis = [i for i in range(n) if i not in fixed_vars]
        a_basis = a_eq[:, basis]
        for bound_pick in product((0, 1), repeat=free):
            x = np.zeros(n)
            for var, pick in zip(fixed_vars, bound_pick):
                x[var] = hi[var] if pick else lo[var]
            rhs = b_eq - a_eq[:, fixed_vars] @ x[list(fixed_vars)]
            sol, residual, rank, _ = np.linalg.lstsq(a_basis, rhs, rcond=None)
            x[basis] = sol
            if np.max(np.abs(a_eq @ x - b_eq)) > 1e-7:
                continue
            if np.any(x < lo - 1e-7) or np.any(x > hi + 1e-7):
                continue
            value = float(obj @ x)
            if value > best:
                best = value
    return best


def best_closure_by_enumeration(
    case: NetworkCase,
    state: TopologyState,
    n_c: int,
    line_limits=None,
    angle_bound: float = 0.6,
    tie_tol: float = 1e-6,
):
    """Best restoration subset by plain nested enumeration.

    Rule: maximize served demand; ties within ``tie_tol`` favor more lines,
    then the smallest sorted id tuple.
    """
    open_ids = sorted(
        ln.id for ln, closed in zip(case.lines, state.line_status) if not closed
    )
    state = TopologyState(state.line_status, (True,) * len(case.generators))
    best_val = -np.inf
    best_subset = None
    for size in range(1, min(n_c, len(open_ids)) + 1):
        for subset in combinations(open_ids, size):
            candidate = case.state_with(base=state, closed_lines=subset)
            val = max_served_value(
                case, candidate, angle_bound=angle_bound, line_limits=line_limits
            )
            take = False
            if best_subset is None or val > best_val + tie_tol:
                take = True
            elif val >= best_val - tie_tol:
                if len(subset) > len(best_subset):
                    take = True
                elif len(subset) == len(best_subset) and subset < best_subset:
                    take = True
            if take:
                best_val, best_subset = val, subset
    return best_subset, best_val


def random_connected_case(
    rng: np.random.Generator,
    min_buses: int = 2,
    max_buses: int = 8,
    extra_line_prob: float = 0.5,
    failure_rates: bool = False,
) -> NetworkCase:
    """Small random connected grid: random spanning tree plus chords."""
    n = int(rng.integers(min_buses, max_buses + 1))
    buses = tuple(Bus(i) for i in range(1, n + 1))

    lines = []
    lid = 1
    for child in range(2, n + 1):
        parent = int(rng.integers(1, child))
        lines.append(
            Line(
                lid,
                parent,
                child,
                b_pu=float(rng.uniform(0.5, 20.0)),
                rating_mw=float(rng.uniform(40.0, 400.0)),
                failure_rate=float(rng.uniform(0.5, 5.0)) if failure_rates else 0.0,
                repair_rate=200.0 if failure_rates else 0.0,
            )
        )
        lid += 1
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if rng.random() < extra_line_prob / n:
                lines.append(
                    Line(
                        lid,
                        a,
                        b,
                        b_pu=float(rng.uniform(0.5, 20.0)),
                        rating_mw=float(rng.uniform(40.0, 400.0)),
                        failure_rate=float(rng.uniform(0.5, 5.0)) if failure_rates else 0.0,
                        repair_rate=200.0 if failure_rates else 0.0,
                    )
                )
                lid += 1

    n_gen = int(rng.integers(1, max(2, n // 2) + 1))
    generators = tuple(
        Generator(
            g + 1,
            int(rng.integers(1, n + 1)),
            0.0,
            float(rng.uniform(20.0, 300.0)),
            failure_rate=float(rng.uniform(1.0, 10.0)) if failure_rates else 0.0,
            repair_rate=100.0 if failure_rates else 0.0,
        )
        for g in range(n_gen)
    )
    n_load = int(rng.integers(1, n + 1))
    load_buses = rng.choice(np.arange(1, n + 1), size=n_load, replace=False)
    loads = tuple(
        Load(int(b), float(rng.uniform(10.0, 150.0))) for b in sorted(load_buses)
    )
    return NetworkCase(buses=buses, lines=tuple(lines), generators=generators, loads=loads)


class ForcedRng:
    """Stand-in RNG whose ``random()`` returns scripted values."""

    def __init__(self, values):
        self._values = list(values)

    def random(self) -> float:
        if not self._values:
            # Past the script: near-1 draw -> u near 0 -> effectively
            # infinite next time-to-failure, ending the component's year.
            return 1.0 - 1e-12
        return self._values.pop(0)
