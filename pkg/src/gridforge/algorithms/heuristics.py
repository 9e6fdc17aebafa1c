"""Greedy union design, switch repair, variable neighborhood search and the hybrid."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..formulation import Design
from ..milp import MipSession, SolveParams, Status, solve_mip
from .common import (
    FEASIBLE, INFEASIBLE, OPTIMAL, TIME_LIMIT, Context, MasterResult, SolveReport, finish,
    solve_master,
)
from .exact import solve_sbd

DIST_TOL = 1e-6
IMPROVE_TOL = 1e-9


@dataclass(frozen=True)
class VnsParams:
    max_restarts: int = 10
    max_iterations: int = 4
    max_time_seconds: float = 48 * 3600.0
    d: float = 2
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.max_restarts < 1 or self.max_iterations < 1:
            raise ValueError("max_restarts and max_iterations must be positive")
        if not self.max_time_seconds > 0:
            raise ValueError("max_time_seconds must be positive")
        if self.d < 1:
            raise ValueError("d must be at least 1")


class InfeasibleScenario(RuntimeError):
    def __init__(self, scenario_id):
        super().__init__(f"scenario {scenario_id} has no feasible design")
        self.scenario_id = scenario_id


# -- greedy ---------------------------------------------------------------------

def _scenario_designs(ctx: Context, scenarios, cache: Optional[dict] = None) -> List[Design]:
    out = []
    for s in scenarios:
        if cache is not None and s.id in cache:
            out.append(cache[s.id])
            continue
        res = solve_master(ctx, [s])
        if res.design is None:
            raise InfeasibleScenario(s.id)
        if cache is not None:
            cache[s.id] = res.design
        out.append(res.design)
    return out


def _union(instance, designs) -> Design:
    merged = Design.baseline(instance)
    for d in designs:
        merged = merged.merge_max(d)
    return merged


def _repair(ctx: Context, design: Design, scenarios, own: Optional[Dict[int, Design]] = None) -> Design:
    out = design
    for s in scenarios:
        if own is not None and own.get(s.id) == out:
            # the scenario's own optimum already operates this design
            continue
        model = ctx.master([s])
        fixes = model.first_stage_fixes(out, kinds=("build", "harden", "facility", "capacity"))
        target = model.copy()
        for j, v in fixes.items():
            target.set_bounds(j, v, v)
        free = []
        for e, j in model.first.switch.items():
            var = target.variables[j]
            if var.lb < var.ub:
                if out.switch_built.get(e):
                    target.set_bounds(j, 1.0, 1.0)
                else:
                    free.append(j)
        sol = solve_mip(target, ctx.sub_params())
        if not sol.has_solution:
            raise InfeasibleScenario(s.id)
        if any(sol.assignment[j] > 0.5 for j in free):
            # among cheapest switch sets prefer the lowest edge ids
            best = target.objective_value(sol.assignment)
            target.add_constr("repair_cost", dict(target.objective), "<=", best - target.objective_constant + 1e-7)
            target.set_objective({j: float(pos + 1) for pos, j in enumerate(free)}, "min")
            tie = solve_mip(target, ctx.sub_params())
            if tie.has_solution:
                sol = tie
        out = out.merge_max(model.design_from(sol.assignment, ctx.instance))
    return out


def repair_switches(instance, design: Design, scenarios, params: Optional[SolveParams] = None, *,
                    cycles=None, link_mode="energized") -> Design:
    """Buy the switches each scenario needs to operate ``design`` radially.

    Scenarios are visited in id order; switches bought for earlier scenarios
    stay bought.
    """
    ctx = Context(instance, scenarios, params, cycles, link_mode)
    return _repair(ctx, design, ctx.scenarios)


def _greedy(ctx: Context, scenarios, cache=None) -> Design:
    designs = _scenario_designs(ctx, scenarios, cache)
    own = {s.id: d for s, d in zip(scenarios, designs)}
    return _repair(ctx, _union(ctx.instance, designs), scenarios, own)


def solve_greedy(instance, scenarios, params: Optional[SolveParams] = None, *,
                 cycles=None, link_mode="energized") -> SolveReport:
    """Componentwise max of the single-scenario optima, then switch repair.

    The chance budget does not apply: every scenario is served.
    """
    ctx = Context(instance, scenarios, params, cycles, link_mode)
    if not ctx.scenarios:
        return finish(ctx, "greedy", Design.baseline(instance), OPTIMAL, [])
    try:
        designs = _scenario_designs(ctx, ctx.scenarios)
    except InfeasibleScenario as exc:
        return finish(ctx, "greedy", None, INFEASIBLE, [{"event": "infeasible", "scenario": exc.scenario_id}])
    trace = [{"event": "scenario_design", "scenario": s.id, "objective": d.cost(instance)}
             for s, d in zip(ctx.scenarios, designs)]
    merged = _union(instance, designs)
    trace.append({"event": "union", "objective": merged.cost(instance)})
    try:
        repaired = _repair(ctx, merged, ctx.scenarios, {s.id: d for s, d in zip(ctx.scenarios, designs)})
    except InfeasibleScenario as exc:
        return finish(ctx, "greedy", None, INFEASIBLE, trace + [{"event": "repair_failed",
                                                                    "scenario": exc.scenario_id}])
    trace.append({"event": "repair", "objective": repaired.cost(instance)})
    return finish(ctx, "greedy", repaired, FEASIBLE, trace)


# -- variable neighborhood search ----------------------------------------------------

def _vns(ctx: Context, scenarios, initial: Design, vp: VnsParams, trace: list,
         lower_bound: float = -math.inf) -> MasterResult:
    model = ctx.master(scenarios)
    fs = list(model.first.items())
    free = [(kind, j) for kind, _, j in fs if model.variables[j].lb < model.variables[j].ub]
    idx = np.array([j for _, j in free], dtype=int)
    scale = np.array([model.variables[j].ub if kind == "capacity" else 1.0 for kind, j in free])
    start = model.first_stage_fixes(initial)
    sigma = np.array([start[j] for j in idx], dtype=float)
    best = MasterResult(FEASIBLE, initial, initial.cost(ctx.instance), model)
    if len(idx) == 0:
        return best
    if best.objective <= lower_bound + IMPROVE_TOL:
        trace.append({"event": "vns_stop", "reason": "lower_bound", "objective": best.objective})
        best.status = OPTIMAL
        return best
    limit = min(vp.max_time_seconds, ctx.remaining())
    t0 = ctx.elapsed
    session = MipSession(model, ctx.sub_params())
    lp = session.relax()
    if lp.status == Status.INFEASIBLE:
        return best
    lp_x = np.asarray(lp.assignment)[idx] if lp.has_solution else sigma.copy()
    lp_bound = float(lp.bound) if lp.status == Status.OPTIMAL else -math.inf
    lp_bound = max(lp_bound, lower_bound)
    slice_ = vp.max_time_seconds / (vp.max_restarts * vp.max_iterations)
    rng = np.random.Generator(np.random.Philox(vp.shuffle_seed))
    size = len(idx)
    i, restart = 0, False
    # neighborhoods already searched around the current sigma give nothing new
    searched = set()
    full_searched = False

    def time_left():
        return ctx.elapsed - t0 < limit and ctx.remaining() > 0

    while time_left() and i < vp.max_restarts:
        if best.objective <= lp_bound + IMPROVE_TOL:
            trace.append({"event": "vns_stop", "reason": "lp_bound", "objective": best.objective})
            best.status = OPTIMAL
            break
        dist = np.abs(sigma - lp_x) / scale
        n = int(np.sum(dist > DIST_TOL))
        order = np.lexsort((np.arange(size), dist))
        if restart:
            i += 1
            if i >= vp.max_restarts:
                break
            step = 4 * n / vp.d
            rng.shuffle(order)
        else:
            step = n / vp.d
        # step and k stay real-valued and are floored where used
        k_real = size - step
        k = min(max(math.floor(k_real), 0), size)
        j = 0
        improved = False
        while time_left() and j <= vp.max_iterations:
            hood = frozenset(int(p) for p in order[:k])
            if k < size and hood not in searched:
                searched.add(hood)
                fixes = {int(idx[p]): float(sigma[p]) for p in order[:k]}
                res = solve_master(ctx, scenarios, fixes=fixes, cutoff=best.objective - 1e-7,
                                   time_limit=slice_, model=model, session=session)
                found = res.design is not None and res.objective < best.objective - IMPROVE_TOL
                if k == 0 and res.status != TIME_LIMIT:
                    full_searched = True
            else:
                res, found = None, False
            trace.append({"event": "vns", "restart": i, "k": k, "step": math.floor(step), "n": n,
                          "improved": found,
                          "objective": res.objective if found else best.objective})
            if found:
                best = MasterResult(FEASIBLE, res.design, res.objective, model, res.x, res.bound)
                sigma = np.asarray(res.x, dtype=float)[idx]
                searched.clear()
                full_searched = False
                i, restart, improved = 0, False, True
                break
            if k == 0:
                break
            j += 1
            k_real -= step / 2
            k = min(max(math.floor(k_real), 0), size)
            if j > vp.max_iterations:
                restart = True
        if not improved and full_searched:
            # the whole space was searched: sigma is optimal for this master
            trace.append({"event": "vns_stop", "reason": "exhausted", "objective": best.objective})
            best.status = OPTIMAL
            break
        if not improved:
            restart = True
    if best.status != OPTIMAL and not time_left():
        best.status = TIME_LIMIT
    return best


def solve_vns(instance, scenarios, initial_design: Optional[Design] = None,
              params: Optional[SolveParams] = None, vns: Optional[VnsParams] = None, *,
              epsilon: Optional[float] = None, cycles=None, link_mode="energized") -> SolveReport:
    """Improve a feasible design by re-optimizing neighborhoods around it.

    Variables whose values disagree most with the LP relaxation are freed
    first; the rest stay fixed. The greedy design seeds the search when no
    initial design is given.
    """
    vp = vns or VnsParams()
    ctx = Context(instance, scenarios, params, cycles, link_mode, epsilon)
    trace: list = []
    if not ctx.scenarios:
        return finish(ctx, "vns", Design.baseline(instance), OPTIMAL, [])
    if initial_design is None:
        try:
            initial_design = _greedy(ctx, ctx.scenarios)
        except InfeasibleScenario as exc:
            return finish(ctx, "vns", None, INFEASIBLE, [{"event": "infeasible", "scenario": exc.scenario_id}])
    trace.append({"event": "vns_start", "objective": initial_design.cost(instance)})
    res = _vns(ctx, ctx.scenarios, initial_design, vp, trace)
    return finish(ctx, "vns", res.design, res.status, trace, [s.id for s in ctx.scenarios],
                  res.operations())


def solve_sbvnds(instance, scenarios, initial=(0,), params: Optional[SolveParams] = None,
                 vns: Optional[VnsParams] = None, *, epsilon: Optional[float] = None,
                 cycles=None, link_mode="energized") -> SolveReport:
    """Scenario decomposition whose master problems are solved by VNS seeded with greedy."""
    vp = vns or VnsParams()
    cache: Dict[int, Design] = {}
    # a subset master VNS proved optimal bounds every larger subset from below
    floor = [-math.inf]

    def master(ctx, subset, trace):
        # greedy runs without the chance budget, on the subset only
        plain = Context(ctx.instance, ctx.scenarios, ctx.params, ctx.cycles, ctx.link_mode)
        plain.start = ctx.start
        try:
            seed = _greedy(plain, subset, cache)
        except InfeasibleScenario:
            return MasterResult(INFEASIBLE, None, math.inf, None)
        # each single-scenario optimum bounds the subset master from below,
        # unless the chance budget lets that scenario go unserved
        bound = -math.inf
        if not ctx.epsilon or math.floor(ctx.epsilon * len(ctx.scenarios) + 1e-9) == 0:
            bound = max(cache[s.id].cost(ctx.instance) for s in subset)
        res = _vns(ctx, subset, seed, vp, trace, max(bound, floor[0]))
        if res.status == OPTIMAL:
            floor[0] = max(floor[0], res.objective)
        return res

    return solve_sbd(instance, scenarios, initial, params, epsilon=epsilon, cycles=cycles,
                     link_mode=link_mode, master_solver=master, name="sbvnds")
