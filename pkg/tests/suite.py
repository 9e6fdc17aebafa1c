"""Seeded small instances shared by the algorithm and acceptance tests.

Every instance is feasible by construction: the existing feeder is a tree
rooted at a source with enough generation, every tree line is hardenable and
hardened-damage only ever hits candidate lines, so hardening the whole tree
serves every load in every scenario.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from gridforge.grid_model import Bus, Edge, GenerationSite, LoadBlock, NetworkInstance
from gridforge.scenario import Scenario, ScenarioSet

SUITE_SIZE = 50
SUITE_SEED = 20240601
MAX_BUSES = 6
MAX_EDGES = 9
MAX_BINARIES = 12
MAX_SCENARIOS = 3

A = ("A",)
ABC = ("A", "B", "C")


@dataclass(frozen=True)
class Case:
    index: int
    instance: NetworkInstance
    scenarios: ScenarioSet


def count_binaries(inst: NetworkInstance) -> int:
    n = 0
    for e in inst.edges:
        n += (not e.exists) + (e.switchable and not e.has_existing_switch) + e.hardenable
    n += sum(1 for b in inst.buses if b.generation is not None and b.generation.expandable)
    return n


def random_case(index: int, seed: int = SUITE_SEED) -> Case:
    rng = np.random.default_rng([seed, index])
    three_phase = index % 4 == 3
    phases = ABC if three_phase else A
    n_bus = int(rng.integers(3, MAX_BUSES + 1))

    buses = []
    total = 0.0
    for i in range(n_bus):
        blocks = ()
        if i > 0:
            nb = int(rng.integers(1, 3))
            # phase demands stay within 10% of their mean so transformers can carry them
            blocks = tuple(LoadBlock({k: round(base * float(rng.uniform(0.9, 1.1)), 3) for k in phases})
                           for base in rng.integers(1, 4, size=nb))
            total += sum(b.total for b in blocks)
        gen = None
        if i == 0:
            gen = GenerationSite({k: 100.0 for k in phases})
        buses.append([i, blocks, gen, bool(i > 0 and rng.random() < 0.35)])
    # one optional microgrid site
    if rng.random() < 0.4:
        host = int(rng.integers(1, n_bus))
        buses[host][2] = GenerationSite({}, {k: 6.0 for k in phases},
                                        float(rng.integers(15, 40)), {k: 1.0 for k in phases})
    if not any(b[3] for b in buses):
        buses[int(rng.integers(1, n_bus))][3] = True
    bus_objs = tuple(Bus(i, phases, blocks, gen, crit) for i, blocks, gen, crit in buses)

    cap = total + 5.0
    edges = []
    for i in range(1, n_bus):
        parent = int(rng.integers(0, i))
        transformer = three_phase and rng.random() < 0.5
        edges.append(Edge(f"t{i}", parent, i, phases, cap, length_miles=float(rng.uniform(0.5, 3)),
                          is_transformer=transformer, hardenable=True,
                          harden_cost=float(rng.integers(5, 20)),
                          switchable=bool(rng.random() < 0.3), switch_cost=float(rng.integers(1, 4)),
                          has_existing_switch=False))
    n_new = int(rng.integers(1, MAX_EDGES - len(edges) + 1))
    for k in range(n_new):
        u, v = sorted(int(x) for x in rng.choice(n_bus, 2, replace=False))
        edges.append(Edge(f"n{k}", u, v, phases, cap, length_miles=float(rng.uniform(0.5, 3)),
                          exists=False, build_cost=float(rng.integers(3, 25)),
                          has_existing_switch=bool(rng.random() < 0.5),
                          switchable=True, switch_cost=float(rng.integers(1, 4)),
                          hardenable=False))
    inst = NetworkInstance(bus_objs, tuple(edges), name=f"suite{index}")
    # trim optional decisions until the binary budget holds
    while count_binaries(inst) > MAX_BINARIES:
        edges = list(inst.edges)
        for pos in range(len(edges) - 1, -1, -1):
            e = edges[pos]
            if e.switchable and not e.has_existing_switch:
                edges[pos] = Edge(**{**e.__dict__, "has_existing_switch": True})
                break
        else:
            edges.pop()
        inst = NetworkInstance(inst.buses, tuple(edges), name=inst.name)

    n_scen = int(rng.integers(1, MAX_SCENARIOS + 1))
    tree = [e.id for e in inst.edges if e.exists]
    new = [e.id for e in inst.edges if not e.exists]
    scen = []
    for s in range(n_scen):
        dmg = {e for e in tree if rng.random() < 0.45}
        dmg_new = {e for e in new if rng.random() < 0.3}
        hd = {e for e in dmg_new if rng.random() < 0.5}
        scen.append(Scenario(s, frozenset(dmg | dmg_new), frozenset(hd)))
    return Case(index, inst, ScenarioSet(tuple(scen)))


def suite(size: int = SUITE_SIZE, seed: int = SUITE_SEED) -> List[Case]:
    return [random_case(k, seed) for k in range(size)]


def tri3(facility_cost: float = 50.0) -> NetworkInstance:
    """Source bus 0, critical bus 1, ordinary bus 2 on a triangle of single-phase lines."""
    buses = (
        Bus(0, A, (), GenerationSite({"A": 10.0})),
        Bus(1, A, (LoadBlock({"A": 1.0}),), GenerationSite({}, {"A": 5.0}, facility_cost, {"A": 1.0}), True),
        Bus(2, A, (LoadBlock({"A": 1.0}),)),
    )
    edges = (
        Edge("e01", 0, 1, A, 5.0, hardenable=True, harden_cost=10.0, switch_cost=1.0),
        Edge("e02", 0, 2, A, 5.0, hardenable=True, harden_cost=10.0, switch_cost=1.0),
        Edge("e12", 1, 2, A, 5.0, has_existing_switch=True),
    )
    return NetworkInstance(buses, edges, name="tri3")


def disjoint_hardening() -> Tuple[NetworkInstance, ScenarioSet]:
    """Each scenario alone can be fixed by a private hardening, both together by a shared one."""
    buses = (
        Bus(0, A, (), GenerationSite({"A": 10.0})),
        Bus(1, A, (LoadBlock({"A": 1.0}),), None, True),
        Bus(2, A, (LoadBlock({"A": 1.0}),)),
    )
    edges = (
        Edge("e02", 0, 2, A, 5.0, hardenable=True, harden_cost=10.0, switchable=False),
        Edge("e12", 1, 2, A, 5.0, hardenable=True, harden_cost=10.0, has_existing_switch=True),
        Edge("e01", 0, 1, A, 5.0, hardenable=True, harden_cost=10.0, switchable=False),
    )
    scen = ScenarioSet.from_edge_sets([({"e01", "e02"}, ()), ({"e01", "e12"}, ())])
    return NetworkInstance(buses, edges, name="disjoint"), scen
