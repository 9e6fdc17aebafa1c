"""Seeded synthetic multi-feeder instances in urban and rural flavours.

Each feeder is a radial tree hanging off a substation bus through a
transformer. Feeders are linked by candidate tie-lines, every existing line
can be hardened and a few buses can host new generation. The profiles only
differ in line lengths, and every cost that depends on a line scales with
its length.
"""
from __future__ import annotations

import numpy as np

from ..grid_model import PHASES, Bus, Edge, GenerationSite, LoadBlock, NetworkInstance

PROFILES = {"urban": (0.1, 0.5), "rural": (1.0, 5.0)}

BUILD_COST_PER_MILE = 100.0
HARDEN_COST_PER_MILE = 40.0
SWITCH_COST = 5.0
FACILITY_COST = 60.0
CAPACITY_COST = 2.0
CRITICAL_SHARE = 0.2
HEADROOM = 1.5


def generate_synthetic(profile: str, n_feeders: int, buses_per_feeder: int, seed: int = 0) -> NetworkInstance:
    """Build ``n_feeders * buses_per_feeder`` buses; deterministic per seed."""
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {sorted(PROFILES)}")
    if n_feeders < 1:
        raise ValueError("n_feeders must be at least 1")
    if buses_per_feeder < 2:
        raise ValueError("buses_per_feeder must be at least 2")
    lo, hi = PROFILES[profile]
    rng = np.random.Generator(np.random.Philox(seed))

    def length() -> float:
        return round(float(rng.uniform(lo, hi)), 3)

    buses, edges = [], []
    feeder_buses = []
    for f in range(n_feeders):
        base = f * buses_per_feeder
        ids = list(range(base, base + buses_per_feeder))
        feeder_buses.append(ids)
        loads = {}
        for b in ids[1:]:
            # balanced three-phase blocks
            loads[b] = tuple(LoadBlock({k: float(d) for k in PHASES})
                             for d in rng.integers(1, 4, size=int(rng.integers(1, 3))))
        # loads are balanced, so phase A stands for every phase
        feeder_demand = sum(blk.demand("A") for blks in loads.values() for blk in blks)
        n_crit = max(1, int(round(CRITICAL_SHARE * (len(ids) - 1))))
        critical = set(int(b) for b in rng.choice(ids[1:], size=n_crit, replace=False))
        site = int(rng.choice(ids[1:]))
        cap = HEADROOM * feeder_demand
        for b in ids:
            gen = None
            if b == base:
                gen = GenerationSite({k: cap for k in PHASES})
            elif b == site:
                gen = GenerationSite({}, {k: round(feeder_demand / 2, 3) for k in PHASES},
                                     FACILITY_COST, {k: CAPACITY_COST for k in PHASES})
            buses.append(Bus(b, PHASES, loads.get(b, ()), gen, b in critical))
        for pos, b in enumerate(ids[1:], start=1):
            parent = ids[int(rng.integers(0, pos))] if pos > 1 else base
            ln = length()
            edges.append(Edge(
                f"f{f}_{parent}_{b}", parent, b, PHASES, {k: cap for k in PHASES}, ln,
                is_transformer=parent == base, hardenable=True,
                harden_cost=round(HARDEN_COST_PER_MILE * ln, 3),
                has_existing_switch=parent == base, switch_cost=SWITCH_COST))

    cap_all = HEADROOM * max(1.0, sum(b.demand("A") for b in buses))
    ties = []
    for f in range(n_feeders - 1):
        for _ in range(int(rng.integers(1, 3))):
            u = int(rng.choice(feeder_buses[f][1:]))
            v = int(rng.choice(feeder_buses[f + 1][1:]))
            ties.append((u, v))
    if n_feeders == 1 or n_feeders > 2:
        # a loop inside the first feeder, and a ring closure for three or more feeders
        ids = feeder_buses[0]
        if n_feeders == 1 and len(ids) >= 3:
            ties.append((ids[1], ids[-1]))
        elif n_feeders == 1:
            ties.append((ids[0], ids[1]))
        else:
            ties.append((int(rng.choice(feeder_buses[-1][1:])), int(rng.choice(ids[1:]))))
    for t, (u, v) in enumerate(ties):
        ln = length()
        edges.append(Edge(
            f"tie{t}_{u}_{v}", u, v, PHASES, {k: cap_all for k in PHASES}, ln,
            exists=False, build_cost=round(BUILD_COST_PER_MILE * ln, 3),
            switchable=True, switch_cost=SWITCH_COST, hardenable=False))
    return NetworkInstance(tuple(buses), tuple(edges), name=f"{profile}-{n_feeders}x{buses_per_feeder}-s{seed}")
