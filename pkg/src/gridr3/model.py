"""Network data model, case-file I/O, topology variants and island detection.

A case is an immutable snapshot of a DC-modeled transmission grid: buses,
lines (transformers are modeled as lines), dispatchable generators, peak
loads and an optional 8760-point per-unit load profile.  All operations in
this package take a :class:`NetworkCase` plus a :class:`TopologyState`
(which lines are closed, which generators are available) and never mutate
either, so cases can be shared freely across worker processes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

HOURS_PER_YEAR = 8760

# Buses excluded as disturbance origins in the bundled RTS-24 scenario sweep
# (the buses that receive reinforcement candidates).
RTS24_EVENT_EXCLUDED_BUSES = frozenset({6, 9, 14, 15, 24})


class CaseError(ValueError):
    """Base class for case-file problems."""


class CaseParseError(CaseError):
    """The document does not match the case schema."""


class CaseValidationError(CaseError):
    """The document parsed but violates a model invariant."""


@dataclass(frozen=True)
class Bus:
    id: int
    name: str = ""


@dataclass(frozen=True)
class Line:
    """Transmission line or transformer branch.

    ``b_pu`` is the series susceptance magnitude on the system MVA base;
    MW flow on a closed line is ``b_pu * (theta_from - theta_to) * base_mva``.
    ``failure_rate``/``repair_rate`` are occurrences per year.
    """

    id: int
    from_bus: int
    to_bus: int
    b_pu: float
    rating_mw: float
    failure_rate: float = 0.0
    repair_rate: float = 0.0


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    pmin_mw: float
    pmax_mw: float
    failure_rate: float = 0.0
    repair_rate: float = 0.0


@dataclass(frozen=True)
class Load:
    bus: int
    peak_mw: float


@dataclass(frozen=True)
class TopologyState:
    """Binary switching state: per-line closed flags and per-generator
    availability flags, positionally aligned with the case's line and
    generator tuples."""

    line_status: tuple[bool, ...]
    generator_status: tuple[bool, ...]

    def pack(self) -> tuple[int, int]:
        """Compact hashable key (bit-packed statuses) for caching."""
        lines = 0
        for i, up in enumerate(self.line_status):
            if up:
                lines |= 1 << i
        gens = 0
        for i, up in enumerate(self.generator_status):
            if up:
                gens |= 1 << i
        return lines, gens


@dataclass(frozen=True)
class IslandPartition:
    """Connected components of the closed-line graph.

    ``islands`` lists every component (singletons included) ordered by
    ascending minimum bus id; ``isolated_elements`` is the subset of buses
    with no closed incident line at all.
    """

    islands: tuple[frozenset[int], ...]
    isolated_elements: frozenset[int]


@dataclass(frozen=True)
class NetworkCase:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    base_mva: float = 100.0
    load_profile: tuple[float, ...] | None = None
    variant_label: str = "Case 1"

    # -- bookkeeping -------------------------------------------------------

    @cached_property
    def n_buses(self) -> int:
        return len(self.buses)

    @cached_property
    def bus_pos(self) -> Mapping[int, int]:
        """Bus id -> position in ``buses`` (ids are 1..N after loading)."""
        return {b.id: i for i, b in enumerate(self.buses)}

    @cached_property
    def line_pos(self) -> Mapping[int, int]:
        return {ln.id: i for i, ln in enumerate(self.lines)}

    @cached_property
    def generator_pos(self) -> Mapping[int, int]:
        return {g.id: i for i, g in enumerate(self.generators)}

    @cached_property
    def total_peak_mw(self) -> float:
        return float(sum(ld.peak_mw for ld in self.loads))

    # -- numpy views (read-only, shared by the solvers) --------------------

    @cached_property
    def line_from_idx(self) -> np.ndarray:
        a = np.array([self.bus_pos[ln.from_bus] for ln in self.lines], dtype=int)
        a.flags.writeable = False
        return a

    @cached_property
    def line_to_idx(self) -> np.ndarray:
        a = np.array([self.bus_pos[ln.to_bus] for ln in self.lines], dtype=int)
        a.flags.writeable = False
        return a

    @cached_property
    def line_b(self) -> np.ndarray:
        a = np.array([ln.b_pu for ln in self.lines], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def line_rating(self) -> np.ndarray:
        a = np.array([ln.rating_mw for ln in self.lines], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def gen_bus_idx(self) -> np.ndarray:
        a = np.array([self.bus_pos[g.bus] for g in self.generators], dtype=int)
        a.flags.writeable = False
        return a

    @cached_property
    def gen_pmax(self) -> np.ndarray:
        a = np.array([g.pmax_mw for g in self.generators], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def gen_pmin(self) -> np.ndarray:
        a = np.array([g.pmin_mw for g in self.generators], dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def load_bus_idx(self) -> np.ndarray:
        a = np.array([self.bus_pos[ld.bus] for ld in self.loads], dtype=int)
        a.flags.writeable = False
        return a

    @cached_property
    def load_peak(self) -> np.ndarray:
        a = np.array([ld.peak_mw for ld in self.loads], dtype=float)
        a.flags.writeable = False
        return a

    # -- state constructors ------------------------------------------------

    def all_closed_state(self) -> TopologyState:
        return TopologyState(
            line_status=(True,) * len(self.lines),
            generator_status=(True,) * len(self.generators),
        )

    def state_with(
        self,
        base: TopologyState | None = None,
        open_lines: Iterable[int] = (),
        closed_lines: Iterable[int] = (),
        off_generators: Iterable[int] = (),
        on_generators: Iterable[int] = (),
    ) -> TopologyState:
        """Return ``base`` (default all-closed) with the given line ids
        opened/closed and generator ids turned off/on."""
        state = base if base is not None else self.all_closed_state()
        lines = list(state.line_status)
        gens = list(state.generator_status)
        for lid in open_lines:
            lines[self._line_index(lid)] = False
        for lid in closed_lines:
            lines[self._line_index(lid)] = True
        for gid in off_generators:
            gens[self._gen_index(gid)] = False
        for gid in on_generators:
            gens[self._gen_index(gid)] = True
        return TopologyState(tuple(lines), tuple(gens))

    def _line_index(self, line_id: int) -> int:
        try:
            return self.line_pos[line_id]
        except KeyError:
            raise CaseValidationError(f"unknown line id {line_id}") from None

    def _gen_index(self, gen_id: int) -> int:
        try:
            return self.generator_pos[gen_id]
        except KeyError:
            raise CaseValidationError(f"unknown generator id {gen_id}") from None

    def check_state(self, state: TopologyState) -> None:
        if len(state.line_status) != len(self.lines):
            raise CaseValidationError(
                f"state has {len(state.line_status)} line flags, "
                f"case has {len(self.lines)} lines"
            )
        if len(state.generator_status) != len(self.generators):
            raise CaseValidationError(
                f"state has {len(state.generator_status)} generator flags, "
                f"case has {len(self.generators)} generators"
            )

    def is_rts24_family(self) -> bool:
        """Heuristic for the bundled 24-bus test system and its variants."""
        return self.n_buses == 24 and abs(self.total_peak_mw - 2850.0) < 1e-6


# ---------------------------------------------------------------------------
# Parsing / serialization
# ---------------------------------------------------------------------------

def _require(record: Mapping, field: str, kind, where: str):
    if field not in record:
        raise CaseParseError(f"{where}: missing field '{field}'")
    value = record[field]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise CaseParseError(
            f"{where}.{field}: cannot interpret {value!r} as {kind.__name__}"
        ) from None


def load_case(text: str) -> NetworkCase:
    """Parse and validate a case document (UTF-8 JSON).

    Bus ids are normalized to the contiguous range 1..N (ascending original
    order); all references are remapped accordingly.  Raises
    :class:`CaseParseError` for schema problems and
    :class:`CaseValidationError` for semantic ones, naming the offending
    field and record.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseParseError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CaseParseError("top level must be an object")

    base_mva = float(doc.get("base_mva", 100.0))
    if base_mva <= 0:
        raise CaseParseError("base_mva: must be positive")

    raw_buses = doc.get("buses")
    if not isinstance(raw_buses, list) or not raw_buses:
        raise CaseParseError("buses: required non-empty array")

    buses = []
    seen_ids: set[int] = set()
    for i, rec in enumerate(raw_buses):
        where = f"buses[{i}]"
        bid = _require(rec, "id", int, where)
        if bid in seen_ids:
            raise CaseValidationError(f"{where}.id: duplicate bus id {bid}")
        seen_ids.add(bid)
        buses.append(Bus(id=bid, name=str(rec.get("name", ""))))
    buses.sort(key=lambda b: b.id)
    # normalize ids to 1..N
    remap = {b.id: i + 1 for i, b in enumerate(buses)}
    buses = [replace(b, id=remap[b.id]) for b in buses]

    def mapped_bus(raw_id: int, where: str) -> int:
        if raw_id not in remap:
            raise CaseValidationError(
                f"{where}: references bus {raw_id}, which does not exist"
            )
        return remap[raw_id]

    lines = []
    line_ids: set[int] = set()
    for i, rec in enumerate(doc.get("lines", [])):
        where = f"lines[{i}]"
        lid = _require(rec, "id", int, where)
        if lid in line_ids:
            raise CaseValidationError(f"{where}.id: duplicate line id {lid}")
        line_ids.add(lid)
        ln = Line(
            id=lid,
            from_bus=mapped_bus(_require(rec, "from", int, where), where + ".from"),
            to_bus=mapped_bus(_require(rec, "to", int, where), where + ".to"),
            b_pu=_require(rec, "b_pu", float, where),
            rating_mw=_require(rec, "rating_mw", float, where),
            failure_rate=float(rec.get("lambda_per_yr", 0.0)),
            repair_rate=float(rec.get("mu_per_yr", 0.0)),
        )
        if ln.from_bus == ln.to_bus:
            raise CaseValidationError(f"{where}: from and to are the same bus")
        if ln.b_pu <= 0:
            raise CaseValidationError(f"{where}.b_pu: must be > 0 (line id {lid})")
        if ln.rating_mw <= 0:
            raise CaseValidationError(f"{where}.rating_mw: must be > 0 (line id {lid})")
        if ln.failure_rate < 0:
            raise CaseValidationError(f"{where}.lambda_per_yr: must be >= 0")
        if ln.failure_rate > 0 and ln.repair_rate <= 0:
            raise CaseValidationError(
                f"{where}.mu_per_yr: must be > 0 when lambda_per_yr > 0"
            )
        lines.append(ln)

    generators = []
    gen_ids: set[int] = set()
    for i, rec in enumerate(doc.get("generators", [])):
        where = f"generators[{i}]"
        gid = _require(rec, "id", int, where)
        if gid in gen_ids:
            raise CaseValidationError(f"{where}.id: duplicate generator id {gid}")
        gen_ids.add(gid)
        g = Generator(
            id=gid,
            bus=mapped_bus(_require(rec, "bus", int, where), where + ".bus"),
            pmin_mw=float(rec.get("pmin_mw", 0.0)),
            pmax_mw=_require(rec, "pmax_mw", float, where),
            failure_rate=float(rec.get("lambda_per_yr", 0.0)),
            repair_rate=float(rec.get("mu_per_yr", 0.0)),
        )
        if not 0.0 <= g.pmin_mw <= g.pmax_mw:
            raise CaseValidationError(
                f"{where}: requires 0 <= pmin_mw <= pmax_mw (generator id {gid})"
            )
        if g.failure_rate < 0:
            raise CaseValidationError(f"{where}.lambda_per_yr: must be >= 0")
        if g.failure_rate > 0 and g.repair_rate <= 0:
            raise CaseValidationError(
                f"{where}.mu_per_yr: must be > 0 when lambda_per_yr > 0"
            )
        generators.append(g)

    loads = []
    for i, rec in enumerate(doc.get("loads", [])):
        where = f"loads[{i}]"
        ld = Load(
            bus=mapped_bus(_require(rec, "bus", int, where), where + ".bus"),
            peak_mw=_require(rec, "peak_mw", float, where),
        )
        if ld.peak_mw < 0:
            raise CaseValidationError(f"{where}.peak_mw: must be >= 0")
        loads.append(ld)

    profile = None
    if doc.get("profile_8760") is not None:
        raw = doc["profile_8760"]
        if not isinstance(raw, list) or len(raw) != HOURS_PER_YEAR:
            raise CaseParseError(
                f"profile_8760: must be an array of exactly {HOURS_PER_YEAR} factors"
            )
        profile = tuple(float(v) for v in raw)
        for h, v in enumerate(profile):
            if not np.isfinite(v) or v < 0:
                raise CaseValidationError(
                    f"profile_8760[{h}]: factor must be finite and >= 0"
                )

    case = NetworkCase(
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        base_mva=base_mva,
        load_profile=profile,
        variant_label=str(doc.get("variant_label", "Case 1")),
    )

    # The intact grid must be a single island.
    part = connected_components(case, case.all_closed_state())
    if len(part.islands) != 1:
        raise CaseValidationError(
            f"case is not connected with all lines closed "
            f"({len(part.islands)} islands)"
        )
    return case


def load_case_file(path: str | Path) -> NetworkCase:
    return load_case(Path(path).read_text(encoding="utf-8"))


def serialize_case(case: NetworkCase) -> str:
    """Canonical JSON form; ``load_case(serialize_case(c)) == c``."""
    doc: dict = {
        "base_mva": case.base_mva,
        "variant_label": case.variant_label,
        "buses": [{"id": b.id, "name": b.name} for b in case.buses],
        "lines": [
            {
                "id": ln.id,
                "from": ln.from_bus,
                "to": ln.to_bus,
                "b_pu": ln.b_pu,
                "rating_mw": ln.rating_mw,
                "lambda_per_yr": ln.failure_rate,
                "mu_per_yr": ln.repair_rate,
            }
            for ln in case.lines
        ],
        "generators": [
            {
                "id": g.id,
                "bus": g.bus,
                "pmin_mw": g.pmin_mw,
                "pmax_mw": g.pmax_mw,
                "lambda_per_yr": g.failure_rate,
                "mu_per_yr": g.repair_rate,
            }
            for g in case.generators
        ],
        "loads": [{"bus": ld.bus, "peak_mw": ld.peak_mw} for ld in case.loads],
    }
    if case.load_profile is not None:
        doc["profile_8760"] = list(case.load_profile)
    return json.dumps(doc, indent=1) + "\n"


def bundled_case_path() -> Path:
    """Path of the shipped RTS-24 case file."""
    return Path(str(resources.files("gridr3").joinpath("data/rts24.json")))


def load_bundled_rts24() -> NetworkCase:
    return load_case_file(bundled_case_path())


# ---------------------------------------------------------------------------
# Topology variants
# ---------------------------------------------------------------------------

def _variant_manifest() -> dict:
    path = resources.files("gridr3").joinpath("data/rts24_variants.json")
    return json.loads(path.read_text(encoding="utf-8"))


def build_variant(base: NetworkCase, variant: int) -> NetworkCase:
    """Return the RTS-24 reinforcement variant ``variant`` (1..8).

    Variant 1 is the base grid itself; the others add one to three candidate
    lines (14-15, 14-24, 6-9).  Electrical and outage parameters of each
    added line are copied from a documented donor line of the same voltage
    level; the exact values ship in the variant manifest so every variant is
    reproducible from the repository alone.
    """
    if not isinstance(variant, int) or not 1 <= variant <= 8:
        raise CaseValidationError(f"variant must be in 1..8, got {variant!r}")
    if len(base.buses) != 24 or len(base.lines) != 38:
        raise CaseValidationError(
            "variants are defined for the 24-bus/38-line base grid only"
        )
    if variant == 1:
        return base

    manifest = _variant_manifest()
    keys = manifest["variants"][str(variant)]
    candidates = {c["key"]: c for c in manifest["candidate_lines"]}
    next_id = max(ln.id for ln in base.lines) + 1
    new_lines = list(base.lines)
    for key in keys:
        cand = candidates[key]
        new_lines.append(
            Line(
                id=next_id,
                from_bus=cand["from"],
                to_bus=cand["to"],
                b_pu=float(cand["b_pu"]),
                rating_mw=float(cand["rating_mw"]),
                failure_rate=float(cand["lambda_per_yr"]),
                repair_rate=float(cand["mu_per_yr"]),
            )
        )
        next_id += 1
    return replace(
        base, lines=tuple(new_lines), variant_label=f"Case {variant}"
    )


# ---------------------------------------------------------------------------
# Topology queries
# ---------------------------------------------------------------------------

def incident_lines(case: NetworkCase, bus: int) -> frozenset[int]:
    """Ids of all lines touching ``bus`` (regardless of switching state)."""
    if bus not in case.bus_pos:
        raise CaseValidationError(f"unknown bus id {bus}")
    return frozenset(
        ln.id for ln in case.lines if bus in (ln.from_bus, ln.to_bus)
    )


def connected_components(case: NetworkCase, state: TopologyState) -> IslandPartition:
    """Partition buses by reachability over closed lines (iterative DFS).

    Islands are ordered by ascending minimum bus id so traces and tests are
    deterministic; singleton components count as islands and additionally
    appear in ``isolated_elements``.
    """
    case.check_state(state)
    adjacency: dict[int, list[int]] = {b.id: [] for b in case.buses}
    for ln, closed in zip(case.lines, state.line_status):
        if closed:
            adjacency[ln.from_bus].append(ln.to_bus)
            adjacency[ln.to_bus].append(ln.from_bus)

    unvisited = set(adjacency)
    islands: list[frozenset[int]] = []
    for start in sorted(adjacency):
        if start not in unvisited:
            continue
        stack = [start]
        unvisited.discard(start)
        component = {start}
        while stack:
            node = stack.pop()
            for nbr in adjacency[node]:
                if nbr in unvisited:
                    unvisited.discard(nbr)
                    component.add(nbr)
                    stack.append(nbr)
        islands.append(frozenset(component))

    islands.sort(key=min)
    isolated = frozenset(b for b, nbrs in adjacency.items() if not nbrs)
    return IslandPartition(islands=tuple(islands), isolated_elements=isolated)
