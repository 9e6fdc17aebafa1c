"""Distribution network data model, validation and cycle enumeration."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Tuple

PHASES = ("A", "B", "C")
TRANSFORMER_IMBALANCE = 0.15
LINE_IMBALANCE = 1.0
DEFAULT_CRITICAL_FRACTION = 0.98
DEFAULT_TOTAL_FRACTION = 0.5
DEFAULT_MAX_CYCLES = 10_000


class CycleBudgetExceeded(RuntimeError):
    """More simple cycles than the configured budget."""


def _phase_map(value, phases) -> Dict[str, float]:
    if isinstance(value, Mapping):
        return {k: float(v) for k, v in value.items()}
    return {k: float(value) for k in phases}


@dataclass(frozen=True)
class LoadBlock:
    """An all-or-nothing load at a bus, demand in power units per phase."""

    demand_per_phase: Mapping[str, float]

    def demand(self, phase: str) -> float:
        return self.demand_per_phase.get(phase, 0.0)

    @property
    def total(self) -> float:
        return sum(self.demand_per_phase.values())


@dataclass(frozen=True)
class GenerationSite:
    existing_capacity_per_phase: Mapping[str, float] = field(default_factory=dict)
    max_new_capacity_per_phase: Mapping[str, float] = field(default_factory=dict)
    facility_cost: float = 0.0
    capacity_cost_per_phase: Mapping[str, float] = field(default_factory=dict)

    def existing(self, phase: str) -> float:
        return self.existing_capacity_per_phase.get(phase, 0.0)

    def max_new(self, phase: str) -> float:
        return self.max_new_capacity_per_phase.get(phase, 0.0)

    def capacity_cost(self, phase: str) -> float:
        return self.capacity_cost_per_phase.get(phase, 0.0)

    @property
    def expandable(self) -> bool:
        return any(v > 0 for v in self.max_new_capacity_per_phase.values())


@dataclass(frozen=True)
class Bus:
    id: Hashable
    phases: Tuple[str, ...] = PHASES
    load_blocks: Tuple[LoadBlock, ...] = ()
    generation: Optional[GenerationSite] = None
    is_critical: bool = False

    def demand(self, phase: str) -> float:
        return sum(b.demand(phase) for b in self.load_blocks)

    @property
    def total_demand(self) -> float:
        return sum(b.total for b in self.load_blocks)


@dataclass(frozen=True)
class Edge:
    id: Hashable
    source: Hashable
    target: Hashable
    phases: Tuple[str, ...] = PHASES
    capacity_per_phase: Mapping[str, float] = field(default_factory=dict)
    length_miles: float = 1.0
    is_transformer: bool = False
    phase_imbalance_limit: Optional[float] = None
    exists: bool = True
    has_existing_switch: bool = False
    hardenable: bool = False
    switchable: bool = True
    build_cost: float = 0.0
    switch_cost: float = 0.0
    harden_cost: float = 0.0

    def __post_init__(self):
        if not isinstance(self.capacity_per_phase, Mapping):
            object.__setattr__(self, "capacity_per_phase",
                               _phase_map(self.capacity_per_phase, self.phases))

    @property
    def endpoints(self) -> Tuple[Hashable, Hashable]:
        return self.source, self.target

    @property
    def beta(self) -> float:
        if self.phase_imbalance_limit is not None:
            return self.phase_imbalance_limit
        return TRANSFORMER_IMBALANCE if self.is_transformer else LINE_IMBALANCE

    def capacity(self, phase: str) -> float:
        return self.capacity_per_phase.get(phase, 0.0)


@dataclass(frozen=True)
class NetworkInstance:
    buses: Tuple[Bus, ...]
    edges: Tuple[Edge, ...]
    critical_fraction: float = DEFAULT_CRITICAL_FRACTION
    total_fraction: float = DEFAULT_TOTAL_FRACTION
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "_bus_pos", {b.id: k for k, b in enumerate(self.buses)})
        object.__setattr__(self, "_edge_pos", {e.id: k for k, e in enumerate(self.edges)})

    def bus(self, bus_id) -> Bus:
        return self.buses[self._bus_pos[bus_id]]

    def edge(self, edge_id) -> Edge:
        return self.edges[self._edge_pos[edge_id]]

    def bus_position(self, bus_id) -> int:
        return self._bus_pos[bus_id]

    def edge_position(self, edge_id) -> int:
        return self._edge_pos[edge_id]

    def has_bus(self, bus_id) -> bool:
        return bus_id in self._bus_pos

    def critical_demand(self) -> float:
        return sum(b.total_demand for b in self.buses if b.is_critical)

    def noncritical_demand(self) -> float:
        return sum(b.total_demand for b in self.buses if not b.is_critical)

    def with_fractions(self, critical=None, total=None) -> "NetworkInstance":
        return NetworkInstance(
            self.buses, self.edges,
            self.critical_fraction if critical is None else critical,
            self.total_fraction if total is None else total,
            self.name,
        )


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.message}"


class ValidationReport(List[Violation]):
    @property
    def ok(self) -> bool:
        return not self

    def __str__(self) -> str:
        return "valid" if self.ok else "\n".join(map(str, self))


def validate_instance(instance: NetworkInstance) -> ValidationReport:
    """Collect invariant violations; an empty report means the instance is usable."""
    out = ValidationReport()

    def bad(subject, message):
        out.append(Violation(subject, message))

    seen = set()
    for bus in instance.buses:
        subj = f"bus {bus.id}"
        if bus.id in seen:
            bad(subj, "duplicate bus id")
        seen.add(bus.id)
        phases = set(bus.phases)
        if not phases or not phases <= set(PHASES):
            bad(subj, f"phases must be a nonempty subset of {PHASES}")
        for j, block in enumerate(bus.load_blocks):
            vals = block.demand_per_phase
            if any(v < 0 for v in vals.values()):
                bad(subj, f"load block {j} has negative demand")
            if any(v != 0 for k, v in vals.items() if k not in phases):
                bad(subj, f"load block {j} has demand on a phase the bus lacks")
            if not any(v > 0 for v in vals.values()):
                bad(subj, f"load block {j} has no positive demand")
        g = bus.generation
        if g is not None:
            for label, vals in (("existing capacity", g.existing_capacity_per_phase),
                                ("max new capacity", g.max_new_capacity_per_phase),
                                ("capacity cost", g.capacity_cost_per_phase)):
                if any(v < 0 or math.isnan(v) for v in vals.values()):
                    bad(subj, f"{label} must be nonnegative")
            if any(v != 0 for k, v in g.max_new_capacity_per_phase.items() if k not in phases):
                bad(subj, "max new capacity on a phase the bus lacks")
            if any(v != 0 for k, v in g.existing_capacity_per_phase.items() if k not in phases):
                bad(subj, "existing capacity on a phase the bus lacks")
            if not g.facility_cost >= 0:
                bad(subj, "facility cost must be nonnegative")

    bus_phases = {b.id: set(b.phases) for b in instance.buses}
    seen = set()
    for e in instance.edges:
        subj = f"edge {e.id}"
        if e.id in seen:
            bad(subj, "duplicate edge id")
        seen.add(e.id)
        missing = [v for v in e.endpoints if v not in bus_phases]
        if missing:
            bad(subj, f"references missing bus {missing[0]}")
        elif e.source == e.target:
            bad(subj, "self-loop")
        else:
            common = bus_phases[e.source] & bus_phases[e.target]
            if not set(e.phases) <= common:
                bad(subj, "phases must be a subset of both endpoint phase sets")
        if not e.phases:
            bad(subj, "edge has no phases")
        for k in e.phases:
            if not e.capacity(k) > 0:
                bad(subj, f"capacity on phase {k} must be positive")
        if not e.length_miles >= 0:
            bad(subj, "length must be nonnegative")
        if not 0.0 <= e.beta <= 1.0:
            bad(subj, "phase imbalance limit must lie in [0, 1]")
        for label in ("build_cost", "switch_cost", "harden_cost"):
            if not getattr(e, label) >= 0:
                bad(subj, f"{label} must be nonnegative")
        if e.exists and e.build_cost != 0:
            bad(subj, "existing line must have zero build cost")

    for label, v in (("critical_fraction", instance.critical_fraction),
                     ("total_fraction", instance.total_fraction)):
        if not 0.0 <= v <= 1.0:
            bad("instance", f"{label} must lie in [0, 1]")
    return out


# -- cycles ------------------------------------------------------------------

ReducedEdge = Tuple[Hashable, Hashable]


@dataclass(frozen=True)
class Cycle:
    vertices: Tuple[Hashable, ...]
    edges: Tuple[ReducedEdge, ...]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class CycleSet:
    reduced_edges: Tuple[ReducedEdge, ...]
    cycles: Tuple[Cycle, ...]
    parallel_groups: Mapping[ReducedEdge, Tuple[Hashable, ...]]
    edge_to_reduced: Mapping[Hashable, ReducedEdge]

    def cycle_edges(self) -> FrozenSet[ReducedEdge]:
        """Reduced edges that lie on at least one cycle."""
        return frozenset(r for c in self.cycles for r in c.edges)

    def parallel_pairs(self):
        for r in self.reduced_edges:
            group = self.parallel_groups[r]
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    yield group[a], group[b]


def reduce_edge(instance: NetworkInstance, u, v) -> ReducedEdge:
    return (u, v) if instance.bus_position(u) <= instance.bus_position(v) else (v, u)


def enumerate_cycles(instance: NetworkInstance, max_cycles: int = DEFAULT_MAX_CYCLES) -> CycleSet:
    """All simple cycles (length >= 3) of the graph with parallel edges merged.

    Each cycle starts at its lowest-positioned vertex and runs toward the
    lower-positioned of that vertex's two cycle neighbours, so the output
    does not depend on edge insertion order.
    """
    groups: Dict[ReducedEdge, List] = defaultdict(list)
    edge_to_reduced = {}
    for e in instance.edges:
        r = reduce_edge(instance, e.source, e.target)
        groups[r].append(e.id)
        edge_to_reduced[e.id] = r
    pos = instance.bus_position
    reduced = tuple(sorted(groups, key=lambda r: (pos(r[0]), pos(r[1]))))
    adj: Dict[int, List[int]] = defaultdict(list)
    for u, v in reduced:
        adj[pos(u)].append(pos(v))
        adj[pos(v)].append(pos(u))
    for k in adj:
        adj[k].sort()
    ids = [b.id for b in instance.buses]

    found: List[Tuple[int, ...]] = []
    for root in sorted(adj):
        # simple paths from root through vertices above root
        path = [root]
        on_path = {root}
        stack = [iter(adj[root])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == root:
                if len(path) >= 3 and path[1] < path[-1]:
                    found.append(tuple(path))
                    if len(found) > max_cycles:
                        raise CycleBudgetExceeded(
                            f"more than {max_cycles} simple cycles in the reduced graph")
                continue
            if nxt < root or nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(adj[nxt]))

    cycles = []
    for verts in sorted(found):
        names = tuple(ids[k] for k in verts)
        ring = [(names[k], names[(k + 1) % len(names)]) for k in range(len(names))]
        cycles.append(Cycle(names, tuple(reduce_edge(instance, a, b) for a, b in ring)))
    return CycleSet(
        reduced_edges=reduced,
        cycles=tuple(cycles),
        parallel_groups={r: tuple(groups[r]) for r in reduced},
        edge_to_reduced=edge_to_reduced,
    )
