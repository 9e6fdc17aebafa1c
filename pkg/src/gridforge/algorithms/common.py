"""Shared pieces: reports, master solves, pricing and design evaluation."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..formulation import (
    ENERGIZED, Design, GridModel, ScenarioOperation, apply_chance_relaxation,
    build_master, build_pricing_model,
)
from ..grid_model import CycleSet, NetworkInstance, enumerate_cycles
from ..milp import MipSession, SolveParams, Status, solve_mip
from ..scenario import Scenario, ScenarioSet

L_TOL = 1e-7

OPTIMAL = "Optimal"
FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
TIME_LIMIT = "TimeLimit"


@dataclass
class PricingResult:
    scenario_id: int
    l_value: float
    served_critical_fraction: float
    served_total_fraction: float
    operation: Optional[ScenarioOperation] = None

    @property
    def feasible(self) -> bool:
        return self.l_value == 0.0

    def to_dict(self, with_operation: bool = False) -> dict:
        out = {
            "scenario": self.scenario_id,
            "l": self.l_value,
            "served_critical_fraction": self.served_critical_fraction,
            "served_total_fraction": self.served_total_fraction,
        }
        if with_operation and self.operation is not None:
            out["operation"] = self.operation.to_dict()
        return out


@dataclass
class SolveReport:
    algorithm: str
    design: Optional[Design]
    objective: float
    status: str
    per_scenario: List[PricingResult] = field(default_factory=list)
    trace: List[dict] = field(default_factory=list)
    wall_time: float = 0.0
    scenarios_in_master: List[int] = field(default_factory=list)
    operations: List[ScenarioOperation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.design is not None and all(p.l_value == 0.0 for p in self.per_scenario)

    def trace_lines(self) -> str:
        """One JSON object per trace event."""
        return "".join(json.dumps(ev, sort_keys=True, default=str) + "\n" for ev in self.trace)


class Context:
    """Instance, scenarios and settings shared by one algorithm run."""

    def __init__(self, instance: NetworkInstance, scenarios, params: Optional[SolveParams] = None,
                 cycles: Optional[CycleSet] = None, link_mode: str = ENERGIZED,
                 epsilon: Optional[float] = None):
        self.instance = instance
        self.scenarios = tuple(scenarios.scenarios if isinstance(scenarios, ScenarioSet) else scenarios)
        self.params = params or SolveParams()
        self.cycles = cycles if cycles is not None else enumerate_cycles(instance)
        self.link_mode = link_mode
        self.epsilon = epsilon or None
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def remaining(self) -> float:
        return self.params.time_limit_seconds - self.elapsed

    def sub_params(self, time_limit=None, cutoff=None) -> SolveParams:
        limit = self.remaining() if time_limit is None else min(time_limit, self.remaining())
        p = self.params
        return SolveParams(
            time_limit_seconds=max(limit, 1e-3), mip_gap=p.mip_gap,
            feasibility_tolerance=p.feasibility_tolerance,
            integrality_tolerance=p.integrality_tolerance, node_limit=p.node_limit,
            lp_engine=p.lp_engine, objective_cutoff=cutoff,
        )

    def master(self, scenarios: Sequence[Scenario]) -> GridModel:
        model = build_master(self.instance, scenarios, self.cycles, link_mode=self.link_mode)
        if self.epsilon is not None:
            model = apply_chance_relaxation(model, self.epsilon, total_scenarios=len(self.scenarios))
        return model


@dataclass
class MasterResult:
    status: str
    design: Optional[Design]
    objective: float
    model: GridModel
    x: Optional[object] = None
    bound: float = math.nan

    def chance_used(self) -> int:
        if self.x is None:
            return 0
        return sum(int(round(self.x[sv.chance])) for sv in self.model.blocks if sv.chance is not None)

    def operations(self) -> List[ScenarioOperation]:
        if self.x is None:
            return []
        return [self.model.operation_from(self.x, sv) for sv in self.model.blocks]


def solve_master(ctx: Context, scenarios: Sequence[Scenario], fixes: Optional[Dict[int, float]] = None,
                 cutoff: Optional[float] = None, time_limit: Optional[float] = None,
                 model: Optional[GridModel] = None, session: Optional[MipSession] = None) -> MasterResult:
    """Solve the design model over ``scenarios`` with optional first-stage fixes.

    A ``session`` built on ``model`` warm starts from its previous solve.
    """
    model = model if model is not None else ctx.master(scenarios)
    if session is not None:
        p = ctx.sub_params(time_limit, cutoff)
        sol = session.solve(fixes, p.objective_cutoff, p.time_limit_seconds)
    else:
        target = model
        if fixes:
            target = model.copy()
            for j, v in fixes.items():
                target.set_bounds(j, v, v)
        sol = solve_mip(target, ctx.sub_params(time_limit, cutoff))
    if sol.status == Status.INFEASIBLE:
        return MasterResult(INFEASIBLE, None, math.inf, model)
    if not sol.has_solution:
        return MasterResult(TIME_LIMIT, None, math.inf, model, bound=sol.bound)
    design = model.design_from(sol.assignment, ctx.instance)
    status = OPTIMAL if sol.status == Status.OPTIMAL else TIME_LIMIT
    return MasterResult(status, design, design.cost(ctx.instance), model, sol.assignment, sol.bound)


def price(ctx: Context, scenario: Scenario, design: Design) -> PricingResult:
    """Infeasibility measure of ``design`` in ``scenario``: 0 iff both thresholds can be met."""
    inst = ctx.instance
    model = build_pricing_model(inst, scenario, design, ctx.cycles, link_mode=ctx.link_mode)
    sol = solve_mip(model, ctx.sub_params())
    if not sol.has_solution:
        # a fixed design the topology rules reject serves nothing
        crit = 0.0 if inst.critical_demand() > 0 else 1.0
        tot = 0.0 if inst.noncritical_demand() > 0 else 1.0
        return PricingResult(scenario.id, _gap(inst, crit, tot), crit, tot, None)
    x = sol.assignment
    op = model.operation_from(x, model.blocks[0])
    crit, tot = served_fractions(inst, op)
    l_value = sum(float(x[j]) for j in model.shortfall if j is not None)
    l_value = 0.0 if l_value <= L_TOL else l_value
    return PricingResult(scenario.id, l_value, crit, tot, op)


def _gap(inst, crit, tot):
    return max(0.0, inst.critical_fraction - crit) + max(0.0, inst.total_fraction - tot)


def served_fractions(inst: NetworkInstance, op: ScenarioOperation):
    crit_d, other_d = inst.critical_demand(), inst.noncritical_demand()
    crit = other = 0.0
    for b in inst.buses:
        for jb, blk in enumerate(b.load_blocks):
            if op.block_served.get((b.id, jb)):
                if b.is_critical:
                    crit += blk.total
                else:
                    other += blk.total
    return (crit / crit_d if crit_d > 0 else 1.0, other / other_d if other_d > 0 else 1.0)


def evaluate_design(instance: NetworkInstance, scenarios, design: Design,
                    params: Optional[SolveParams] = None, cycles: Optional[CycleSet] = None,
                    link_mode: str = ENERGIZED) -> List[PricingResult]:
    """Price ``design`` on every scenario, in scenario order."""
    ctx = Context(instance, scenarios, params, cycles, link_mode)
    return [price(ctx, s, design) for s in ctx.scenarios]


def finish(ctx: Context, name: str, design: Optional[Design], status: str, trace,
           master_ids=(), operations=()) -> SolveReport:
    if design is None:
        return SolveReport(name, None, math.inf, status, [], list(trace), ctx.elapsed,
                           sorted(master_ids), list(operations))
    per = [price(ctx, s, design) for s in ctx.scenarios]
    return SolveReport(name, design, design.cost(ctx.instance), status, per, list(trace),
                       ctx.elapsed, sorted(master_ids), list(operations))
