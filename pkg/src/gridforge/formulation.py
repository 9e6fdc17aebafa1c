"""MILP encoding of resilient distribution grid design.

Constraint names describe their role (``balance``, ``cycle``, ``pair`` for
parallel-edge radiality, ``link_*`` for first/second stage coupling) so models
can be audited and MPS exports diffed.

Second-stage line state follows one of two linking modes:

* ``energized`` (default): a built line that is operable in a scenario is in
  service; loops are broken only by opening switches.
* ``optional``: the use variable is merely bounded by the build decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .grid_model import CycleSet, NetworkInstance
from .milp import MipModel
from .scenario import Scenario

ENERGIZED = "energized"
OPTIONAL = "optional"
LINK_MODES = (ENERGIZED, OPTIONAL)


# -- first-stage design --------------------------------------------------------

@dataclass
class Design:
    """First-stage decisions; existing components appear with value 1."""

    line_built: Dict[Hashable, int] = field(default_factory=dict)
    switch_built: Dict[Hashable, int] = field(default_factory=dict)
    hardened: Dict[Hashable, int] = field(default_factory=dict)
    facility_built: Dict[Hashable, int] = field(default_factory=dict)
    new_capacity: Dict[Tuple[Hashable, str], float] = field(default_factory=dict)

    @classmethod
    def baseline(cls, instance: NetworkInstance) -> "Design":
        """Existing grid with no upgrades."""
        d = cls()
        for e in instance.edges:
            d.line_built[e.id] = int(e.exists)
            d.switch_built[e.id] = int(e.has_existing_switch)
            d.hardened[e.id] = 0
        for b in instance.buses:
            if b.generation is not None:
                d.facility_built[b.id] = 0
                for k in b.phases:
                    d.new_capacity[(b.id, k)] = 0.0
        return d

    def cost(self, instance: NetworkInstance) -> float:
        total = 0.0
        for e in instance.edges:
            if not e.exists:
                total += e.build_cost * self.line_built.get(e.id, 0)
            if not e.has_existing_switch:
                total += e.switch_cost * self.switch_built.get(e.id, 0)
            total += e.harden_cost * self.hardened.get(e.id, 0)
        for b in instance.buses:
            g = b.generation
            if g is None:
                continue
            total += g.facility_cost * self.facility_built.get(b.id, 0)
            for k in b.phases:
                total += g.capacity_cost(k) * self.new_capacity.get((b.id, k), 0.0)
        return total

    def merge_max(self, other: "Design") -> "Design":
        out = Design()
        for name in ("line_built", "switch_built", "hardened", "facility_built", "new_capacity"):
            a, b = getattr(self, name), getattr(other, name)
            getattr(out, name).update({k: max(a.get(k, 0), b.get(k, 0)) for k in set(a) | set(b)})
        return out

    def upgrades(self, instance: NetworkInstance) -> Dict[str, list]:
        """Only the purchased items, for reports."""
        return {
            "lines": sorted((e.id for e in instance.edges
                             if not e.exists and self.line_built.get(e.id)), key=str),
            "switches": sorted((e.id for e in instance.edges
                                if not e.has_existing_switch and self.switch_built.get(e.id)), key=str),
            "hardened": sorted((e.id for e in instance.edges if self.hardened.get(e.id)), key=str),
            "facilities": sorted((i for i, v in self.facility_built.items() if v), key=str),
            "capacity": sorted(([i, k, v] for (i, k), v in self.new_capacity.items() if v > 1e-9),
                               key=lambda t: (str(t[0]), t[1])),
        }

    def __eq__(self, other):
        if not isinstance(other, Design):
            return NotImplemented
        for name in ("line_built", "switch_built", "hardened", "facility_built"):
            a, b = getattr(self, name), getattr(other, name)
            if {k: v for k, v in a.items() if v} != {k: v for k, v in b.items() if v}:
                return False
        caps = set(self.new_capacity) | set(other.new_capacity)
        return all(abs(self.new_capacity.get(k, 0.0) - other.new_capacity.get(k, 0.0)) <= 1e-7
                   for k in caps)


def _key(*parts) -> str:
    return ",".join(str(p) for p in parts)


# -- variable handles -----------------------------------------------------------

@dataclass
class FirstStageVars:
    build: Dict[Hashable, int] = field(default_factory=dict)
    switch: Dict[Hashable, int] = field(default_factory=dict)
    harden: Dict[Hashable, int] = field(default_factory=dict)
    facility: Dict[Hashable, int] = field(default_factory=dict)
    capacity: Dict[Tuple[Hashable, str], int] = field(default_factory=dict)

    def items(self):
        """``(kind, key, var)`` for every first-stage variable, in a stable order."""
        for kind in ("build", "switch", "harden", "facility", "capacity"):
            for key, j in getattr(self, kind).items():
                yield kind, key, j


@dataclass
class ScenarioVars:
    scenario: Scenario
    line_used: Dict[Hashable, int] = field(default_factory=dict)
    switch_open: Dict[Hashable, int] = field(default_factory=dict)
    harden_used: Dict[Hashable, int] = field(default_factory=dict)
    dir_neg: Dict[Hashable, int] = field(default_factory=dict)
    dir_pos: Dict[Hashable, int] = field(default_factory=dict)
    flow: Dict[Tuple[Hashable, str], int] = field(default_factory=dict)
    generation: Dict[Tuple[Hashable, str], int] = field(default_factory=dict)
    served: Dict[Tuple[Hashable, str], int] = field(default_factory=dict)
    block_served: Dict[Tuple[Hashable, int], int] = field(default_factory=dict)
    facility_used: Dict[Hashable, int] = field(default_factory=dict)
    capacity_used: Dict[Tuple[Hashable, str], int] = field(default_factory=dict)
    cycle_line: Dict[Tuple, int] = field(default_factory=dict)
    cycle_switch: Dict[Tuple, int] = field(default_factory=dict)
    critical_row: Optional[int] = None
    total_row: Optional[int] = None
    chance: Optional[int] = None


@dataclass
class ScenarioOperation:
    """Second-stage values of one scenario, read back from a solution."""

    scenario_id: int
    line_used: Dict[Hashable, int]
    switch_open: Dict[Hashable, int]
    harden_used: Dict[Hashable, int]
    facility_used: Dict[Hashable, int]
    dir_neg: Dict[Hashable, int]
    dir_pos: Dict[Hashable, int]
    flow: Dict[Tuple[Hashable, str], float]
    generation: Dict[Tuple[Hashable, str], float]
    served_load: Dict[Tuple[Hashable, str], float]
    block_served: Dict[Tuple[Hashable, int], int]
    cycle_line: Dict[Tuple, int]
    cycle_switch: Dict[Tuple, int]
    chance_violated: int = 0

    def closed_edges(self) -> List[Hashable]:
        return [e for e, v in self.line_used.items() if v and not self.switch_open.get(e, 0)]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "closed_edges": sorted((str(e) for e in self.closed_edges())),
            "open_switches": sorted(str(e) for e, v in self.switch_open.items() if v),
            "blocks_served": sorted(f"{i}#{j}" for (i, j), v in self.block_served.items() if v),
            "flow": {_key(e, k): round(v, 9) for (e, k), v in sorted(
                self.flow.items(), key=lambda t: (str(t[0][0]), t[0][1])) if abs(v) > 1e-9},
            "chance_violated": self.chance_violated,
        }


class GridModel(MipModel):
    """A MipModel plus the variable handles of the design problem it encodes."""

    def __init__(self, name="grid_design"):
        super().__init__(name)
        self.first = FirstStageVars()
        self.blocks: List[ScenarioVars] = []
        self.link_mode = ENERGIZED
        self.epsilon: Optional[float] = None
        self.shortfall: Optional[Tuple[int, int]] = None

    def copy(self) -> "GridModel":
        other = GridModel(self.name)
        base = MipModel.copy(self)
        other.__dict__.update(base.__dict__)
        other.first = self.first
        other.blocks = list(self.blocks)
        other.link_mode = self.link_mode
        other.epsilon = self.epsilon
        other.shortfall = self.shortfall
        return other

    def add_term(self, row: int, var: int, coef: float) -> None:
        """Add ``coef * var`` to an existing constraint."""
        con = self.constraints[row]
        terms = dict(con.coeffs)
        terms[var] = terms.get(var, 0.0) + coef
        self.constraints[row] = type(con)(con.name, tuple(sorted((j, a) for j, a in terms.items() if a)),
                                          con.sense, con.rhs)

    def set_rhs(self, row: int, rhs: float) -> None:
        con = self.constraints[row]
        self.constraints[row] = type(con)(con.name, con.coeffs, con.sense, float(rhs))

    # -- readers ------------------------------------------------------------------
    def design_from(self, x, instance: NetworkInstance) -> Design:
        d = Design.baseline(instance)
        for e, j in self.first.build.items():
            d.line_built[e] = int(round(x[j]))
        for e, j in self.first.switch.items():
            d.switch_built[e] = int(round(x[j]))
        for e, j in self.first.harden.items():
            d.hardened[e] = int(round(x[j]))
        for i, j in self.first.facility.items():
            d.facility_built[i] = int(round(x[j]))
        for key, j in self.first.capacity.items():
            v = float(x[j])
            d.new_capacity[key] = 0.0 if abs(v) < 1e-9 else v
        return d

    def operation_from(self, x, sv: ScenarioVars) -> ScenarioOperation:
        def ints(m):
            return {k: int(round(x[j])) for k, j in m.items()}

        def reals(m):
            return {k: float(x[j]) for k, j in m.items()}

        return ScenarioOperation(
            scenario_id=sv.scenario.id,
            line_used=ints(sv.line_used), switch_open=ints(sv.switch_open),
            harden_used=ints(sv.harden_used), facility_used=ints(sv.facility_used),
            dir_neg=ints(sv.dir_neg), dir_pos=ints(sv.dir_pos),
            flow=reals(sv.flow), generation=reals(sv.generation), served_load=reals(sv.served),
            block_served=ints(sv.block_served),
            cycle_line=ints(sv.cycle_line), cycle_switch=ints(sv.cycle_switch),
            chance_violated=int(round(x[sv.chance])) if sv.chance is not None else 0,
        )

    def first_stage_fixes(self, design: Design, kinds=None) -> Dict[int, float]:
        """Variable index -> value fixing first-stage variables to ``design``."""
        src = {
            "build": design.line_built, "switch": design.switch_built, "harden": design.hardened,
            "facility": design.facility_built, "capacity": design.new_capacity,
        }
        out = {}
        for kind, key, j in self.first.items():
            if kinds is not None and kind not in kinds:
                continue
            v = self.variables[j]
            val = float(src[kind].get(key, 0.0))
            out[j] = min(max(val, v.lb), v.ub)
        return out


# -- builders -------------------------------------------------------------------------

def _first_stage(model: GridModel, instance: NetworkInstance) -> None:
    fs = model.first
    obj = {}
    for e in instance.edges:
        if e.exists:
            j = model.add_var(f"build[{e.id}]", 1, 1, binary=True)
        else:
            j = model.add_var(f"build[{e.id}]", binary=True)
            obj[j] = e.build_cost
        fs.build[e.id] = j
        if e.has_existing_switch:
            j = model.add_var(f"switch[{e.id}]", 1, 1, binary=True)
        elif e.switchable:
            j = model.add_var(f"switch[{e.id}]", binary=True)
            obj[j] = e.switch_cost
        else:
            j = model.add_var(f"switch[{e.id}]", 0, 0, binary=True)
        fs.switch[e.id] = j
        if e.hardenable:
            j = model.add_var(f"harden[{e.id}]", binary=True)
            obj[j] = e.harden_cost
        else:
            j = model.add_var(f"harden[{e.id}]", 0, 0, binary=True)
        fs.harden[e.id] = j
    for b in instance.buses:
        g = b.generation
        if g is None:
            continue
        can = g.expandable
        j = model.add_var(f"facility[{b.id}]", 0, 1 if can else 0, binary=True)
        fs.facility[b.id] = j
        if can:
            obj[j] = g.facility_cost
        for k in b.phases:
            cap = model.add_var(f"capacity[{_key(b.id, k)}]", 0.0, g.max_new(k))
            fs.capacity[(b.id, k)] = cap
            if g.max_new(k) > 0:
                obj[cap] = g.capacity_cost(k)
                # facility gates new capacity
                model.add_constr(f"new_cap_site[{_key(b.id, k)}]", {cap: 1.0, j: -g.max_new(k)}, "<=", 0.0)
    model.set_objective(obj, "min")
    # settle design decisions before operating ones
    for _, _, j in fs.items():
        if model.variables[j].binary:
            model.branch_priority[j] = 1


def _block(model: GridModel, instance: NetworkInstance, scenario: Scenario, cycles: CycleSet,
           resilience: bool = True) -> ScenarioVars:
    s = scenario.id
    p = f"s{s}."
    sv = ScenarioVars(scenario)
    add_var, add = model.add_var, model.add_constr
    damaged = scenario.damaged_edges
    hdamaged = scenario.hardened_damaged_edges
    in_cycle = cycles.cycle_edges()

    out_terms: Dict[Tuple[Hashable, str], Dict[int, float]] = {}
    for b in instance.buses:
        for k in b.phases:
            out_terms[(b.id, k)] = {}

    for e in instance.edges:
        lu = sv.line_used[e.id] = add_var(f"{p}line_used[{e.id}]", binary=True)
        so = sv.switch_open[e.id] = add_var(f"{p}switch_open[{e.id}]", binary=True)
        dn = sv.dir_neg[e.id] = add_var(f"{p}dir_neg[{e.id}]", binary=True)
        dp = sv.dir_pos[e.id] = add_var(f"{p}dir_pos[{e.id}]", binary=True)
        flows = {}
        for k in e.phases:
            u = e.capacity(k)
            f = sv.flow[(e.id, k)] = add_var(f"{p}flow[{_key(e.id, k)}]", -u, u)
            flows[k] = f
            tag = _key(e.id, k)
            add(f"{p}flow_dir_lo[{tag}]", {f: 1.0, dn: u}, ">=", 0.0)
            add(f"{p}flow_dir_hi[{tag}]", {f: 1.0, dp: -u}, "<=", 0.0)
            add(f"{p}flow_switch_lo[{tag}]", {f: 1.0, so: -u}, ">=", -u)
            add(f"{p}flow_switch_hi[{tag}]", {f: 1.0, so: u}, "<=", u)
            out_terms[(e.source, k)][f] = out_terms[(e.source, k)].get(f, 0.0) + 1.0
            out_terms[(e.target, k)][f] = out_terms[(e.target, k)].get(f, 0.0) - 1.0
        add(f"{p}one_direction[{e.id}]", {dn: 1.0, dp: 1.0, lu: -1.0}, "<=", 0.0)
        if len(e.phases) >= 2:
            _imbalance(model, p, e, flows, dn, dp)
        if e.id in damaged:
            hu = sv.harden_used[e.id] = add_var(f"{p}harden_used[{e.id}]", binary=True)
            add(f"{p}harden_link[{e.id}]", {lu: 1.0, hu: -1.0}, "==", 0.0)
            if e.id in hdamaged:
                add(f"{p}harden_damaged[{e.id}]", {hu: 1.0}, "<=", 0.0)
        add(f"{p}switch_on_used[{e.id}]", {so: 1.0, lu: -1.0}, "<=", 0.0)

    # cycle elimination on the reduced graph
    for r in cycles.reduced_edges:
        if r not in in_cycle:
            continue
        tag = _key(*r)
        cl = sv.cycle_line[r] = add_var(f"{p}cycle_line[{tag}]", binary=True)
        cs = sv.cycle_switch[r] = add_var(f"{p}cycle_switch[{tag}]", binary=True)
        for eid in cycles.parallel_groups[r]:
            lu, so = sv.line_used[eid], sv.switch_open[eid]
            add(f"{p}parallel[{eid}]", {lu: 1.0, cl: -1.0}, "<=", 0.0)
            add(f"{p}parallel_switch_hi[{eid}]", {so: 1.0, lu: 1.0, cs: 1.0}, "<=", 3.0)
            add(f"{p}parallel_switch_lo[{eid}]", {so: 1.0, lu: -1.0, cs: -1.0}, ">=", -1.0)
    for n, cyc in enumerate(cycles.cycles):
        terms = {}
        for r in cyc.edges:
            terms[sv.cycle_line[r]] = 1.0
            terms[sv.cycle_switch[r]] = -1.0
        add(f"{p}cycle[{n}]", terms, "<=", len(cyc.vertices) - 1)
    for e1, e2 in cycles.parallel_pairs():
        add(f"{p}pair[{_key(e1, e2)}]", {sv.line_used[e1]: 1.0, sv.line_used[e2]: 1.0,
                                          sv.switch_open[e1]: -1.0, sv.switch_open[e2]: -1.0},
            "<=", 1.0)

    crit_terms, crit_demand = {}, 0.0
    other_terms, other_demand = {}, 0.0
    for b in instance.buses:
        g = b.generation
        if g is not None:
            fu = None
            if g.expandable:
                fu = sv.facility_used[b.id] = add_var(f"{p}facility_used[{b.id}]", binary=True)
        for jb in range(len(b.load_blocks)):
            sv.block_served[(b.id, jb)] = add_var(f"{p}block_served[{_key(b.id, jb)}]", binary=True)
        for k in b.phases:
            tag = _key(b.id, k)
            balance = {}
            if g is not None:
                gen = sv.generation[(b.id, k)] = add_var(f"{p}gen[{tag}]", 0.0, math.inf)
                gen_terms = {gen: 1.0}
                if fu is not None and g.max_new(k) > 0:
                    cu = sv.capacity_used[(b.id, k)] = add_var(f"{p}capacity_used[{tag}]", 0.0, g.max_new(k))
                    gen_terms[cu] = -1.0
                    add(f"{p}cap_site[{tag}]", {cu: 1.0, fu: -g.max_new(k)}, "<=", 0.0)
                add(f"{p}gen_cap[{tag}]", gen_terms, "<=", g.existing(k))
                balance[gen] = 1.0
            demand_k = b.demand(k)
            if demand_k > 0:
                sl = sv.served[(b.id, k)] = add_var(f"{p}served[{tag}]", 0.0, demand_k)
                terms = {sl: 1.0}
                for jb, blk in enumerate(b.load_blocks):
                    if blk.demand(k) > 0:
                        terms[sv.block_served[(b.id, jb)]] = -blk.demand(k)
                add(f"{p}block_link[{tag}]", terms, "==", 0.0)
                balance[sl] = -1.0
                if b.is_critical:
                    crit_terms[sl] = 1.0
                    crit_demand += demand_k
                else:
                    other_terms[sl] = 1.0
                    other_demand += demand_k
            for f, sign in out_terms[(b.id, k)].items():
                balance[f] = balance.get(f, 0.0) - sign
            add(f"{p}balance[{tag}]", balance, "==", 0.0)

    if resilience:
        lam, gam = instance.critical_fraction, instance.total_fraction
        if crit_demand > 0:
            sv.critical_row = add(f"{p}critical_service", crit_terms, ">=", lam * crit_demand)
        if other_demand > 0:
            sv.total_row = add(f"{p}total_service", other_terms, ">=", gam * other_demand)
    sv._crit = (crit_terms, crit_demand)
    sv._other = (other_terms, other_demand)
    return sv


def _imbalance(model, p, e, flows, dn, dp):
    """Phase imbalance band, applied to f when flowing i->j and to -f when j->i."""
    beta = e.beta
    n = len(e.phases)
    umax = max(e.capacity(k) for k in e.phases)
    for k2 in e.phases:
        big = e.capacity(k2) + 2.0 * umax
        lo_band = {f: -(1.0 - beta) / n for f in flows.values()}
        hi_band = {f: -(1.0 + beta) / n for f in flows.values()}
        lo_band[flows[k2]] += 1.0
        hi_band[flows[k2]] += 1.0
        tag = _key(e.id, k2)
        # direction i->j: (1-b)avg <= f_k <= (1+b)avg
        model.add_constr(f"{p}imbalance_pos_lo[{tag}]", {**lo_band, dp: -big}, ">=", -big)
        model.add_constr(f"{p}imbalance_pos_hi[{tag}]", {**hi_band, dp: big}, "<=", big)
        # direction j->i: (1+b)avg <= f_k <= (1-b)avg
        model.add_constr(f"{p}imbalance_neg_hi[{tag}]", {**lo_band, dn: big}, "<=", big)
        model.add_constr(f"{p}imbalance_neg_lo[{tag}]", {**hi_band, dn: -big}, ">=", -big)


def _link(model: GridModel, instance: NetworkInstance, sv: ScenarioVars) -> None:
    fs = model.first
    p = f"s{sv.scenario.id}."
    energized = model.link_mode == ENERGIZED
    damaged = sv.scenario.damaged_edges
    hdamaged = sv.scenario.hardened_damaged_edges
    add = model.add_constr
    for e in instance.edges:
        lu = sv.line_used[e.id]
        rel = "==" if energized and e.id not in damaged else "<="
        add(f"{p}link_build[{e.id}]", {lu: 1.0, fs.build[e.id]: -1.0}, rel, 0.0)
        add(f"{p}link_switch[{e.id}]", {sv.switch_open[e.id]: 1.0, fs.switch[e.id]: -1.0}, "<=", 0.0)
        if e.id in sv.harden_used:
            rel = "==" if energized and e.id not in hdamaged else "<="
            add(f"{p}link_harden[{e.id}]", {sv.harden_used[e.id]: 1.0, fs.harden[e.id]: -1.0}, rel, 0.0)
    for key, cu in sv.capacity_used.items():
        add(f"{p}link_capacity[{_key(*key)}]", {cu: 1.0, fs.capacity[key]: -1.0}, "<=", 0.0)
    for i, fu in sv.facility_used.items():
        add(f"{p}link_facility[{i}]", {fu: 1.0, fs.facility[i]: -1.0}, "<=", 0.0)


def build_scenario_block(instance: NetworkInstance, scenario: Scenario, cycles: CycleSet,
                         model: Optional[GridModel] = None) -> ScenarioVars:
    """Emit one scenario's feasible-network constraints over fresh variables.

    With no ``model`` the block goes into a new standalone GridModel,
    available as ``block.model``.
    """
    model = model if model is not None else GridModel(f"block{scenario.id}")
    sv = _block(model, instance, scenario, cycles)
    sv.model = model
    return sv


def build_master(instance: NetworkInstance, scenarios: Sequence[Scenario], cycles: CycleSet,
                 link_mode: str = ENERGIZED, resilience: bool = True) -> GridModel:
    """Full design model: cost objective, linking rows and one block per scenario."""
    if link_mode not in LINK_MODES:
        raise ValueError(f"link_mode must be one of {LINK_MODES}")
    model = GridModel()
    model.link_mode = link_mode
    _first_stage(model, instance)
    for sc in scenarios:
        sv = _block(model, instance, sc, cycles, resilience=resilience)
        _link(model, instance, sv)
        model.blocks.append(sv)
    return model


def apply_chance_relaxation(model: GridModel, epsilon: float,
                            total_scenarios: Optional[int] = None) -> GridModel:
    """Let the resilience rows fail in at most ``epsilon * |S|`` scenarios.

    ``total_scenarios`` sets ``|S|`` when the model holds only a subset of
    the scenarios (decomposition masters); it defaults to the block count.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    out = model.copy()
    out.blocks = []
    budget = {}
    for sv in model.blocks:
        s = sv.scenario.id
        nsv = ScenarioVars(**{k: v for k, v in sv.__dict__.items() if k in ScenarioVars.__dataclass_fields__})
        nsv._crit, nsv._other = sv._crit, sv._other
        z = out.add_var(f"s{s}.z", binary=True)
        nsv.chance = z
        for row in (sv.critical_row, sv.total_row):
            if row is not None:
                out.add_term(row, z, out.constraints[row].rhs)
        budget[z] = 1.0
        out.blocks.append(nsv)
    if budget:
        total = len(model.blocks) if total_scenarios is None else total_scenarios
        out.add_constr("chance_budget", budget, "<=", math.floor(epsilon * total + 1e-9))
    out.epsilon = epsilon
    return out


def build_pricing_model(instance: NetworkInstance, scenario: Scenario, design: Design,
                        cycles: CycleSet, link_mode: str = ENERGIZED,
                        weights: Tuple[float, float] = (1.0, 1.0)) -> GridModel:
    """Scenario operation with the design fixed, minimizing the resilience shortfall.

    Shortfall variables measure how far the served critical and non-critical
    fractions fall below their thresholds; the optimum is the infeasibility
    measure (0 exactly when the scenario can meet both thresholds).
    """
    model = build_master(instance, [scenario], cycles, link_mode=link_mode, resilience=False)
    for j, val in model.first_stage_fixes(design).items():
        model.set_bounds(j, val, val)
    sv = model.blocks[0]
    obj = {}
    shortfall = []
    for label, (terms, demand), target, w in (
            ("critical", sv._crit, instance.critical_fraction, weights[0]),
            ("total", sv._other, instance.total_fraction, weights[1])):
        if demand <= 0:
            shortfall.append(None)
            continue
        short = model.add_var(f"s{scenario.id}.shortfall_{label}", 0.0, target)
        row = {j: c / demand for j, c in terms.items()}
        row[short] = 1.0
        model.add_constr(f"s{scenario.id}.price_{label}", row, ">=", target)
        obj[short] = w
        shortfall.append(short)
    model.set_objective(obj, "min")
    model.shortfall = tuple(shortfall)
    return model
