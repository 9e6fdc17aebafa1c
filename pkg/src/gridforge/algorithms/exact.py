"""Exact methods: extensive form, scenario-based decomposition, brute-force oracle."""
from __future__ import annotations

import itertools
import math
from typing import Iterable, Optional, Tuple

import numpy as np

from ..formulation import Design
from ..milp import SolveParams, Status, solve_mip
from .common import (
    OPTIMAL, TIME_LIMIT, Context, SolveReport, finish, price, solve_master,
)

ORACLE_BINARY_BUDGET = 16


class TooLarge(ValueError):
    pass


def solve_extensive(instance, scenarios, params: Optional[SolveParams] = None, *,
                    epsilon: Optional[float] = None, cycles=None, link_mode="energized") -> SolveReport:
    """One monolithic model holding every scenario block."""
    ctx = Context(instance, scenarios, params, cycles, link_mode, epsilon)
    res = solve_master(ctx, ctx.scenarios)
    trace = [{"event": "extensive", "status": res.status, "objective": res.objective,
              "bound": res.bound}]
    ids = [s.id for s in ctx.scenarios]
    if res.design is None:
        return finish(ctx, "extensive", None, res.status, trace, ids)
    return finish(ctx, "extensive", res.design, res.status, trace, ids, res.operations())


def solve_sbd(instance, scenarios, initial: Iterable[int] = (0,), params: Optional[SolveParams] = None,
              *, epsilon: Optional[float] = None, cycles=None, link_mode="energized",
              master_solver=None, name="sbd") -> SolveReport:
    """Grow the scenario subset with the worst-priced scenario until the design prices to zero.

    The master over the subset relaxes the full problem, so a master optimum
    that is feasible everywhere is optimal. Under a chance budget the design
    is accepted once violations in the subset plus violations among the
    remaining scenarios fit the budget.

    ``master_solver(ctx, subset, trace)`` replaces the exact master solve and
    returns a MasterResult; the hybrid uses it to plug in VNS.
    """
    ctx = Context(instance, scenarios, params, cycles, link_mode, epsilon)
    if not ctx.scenarios:
        return finish(ctx, name, Design.baseline(instance), OPTIMAL, [])
    chosen = sorted(set(initial))
    if not chosen:
        raise ValueError("initial scenario subset must be nonempty")
    by_id = {s.id: s for s in ctx.scenarios}
    budget = math.floor(epsilon * len(ctx.scenarios) + 1e-9) if epsilon else 0
    trace = []
    solve = master_solver or (lambda c, subset, tr: solve_master(c, subset))
    heuristic = master_solver is not None
    while True:
        res = solve(ctx, [by_id[k] for k in chosen], trace)
        trace.append({"event": "master", "subset": list(chosen), "status": res.status,
                      "objective": res.objective})
        if res.design is None:
            return finish(ctx, name, None, res.status, trace, chosen)
        rest = [s for s in ctx.scenarios if s.id not in set(chosen)]
        if not rest:
            status = res.status if not heuristic else _heuristic_status(res.status)
            return finish(ctx, name, res.design, status, trace, chosen, res.operations())
        prices = [price(ctx, s, res.design) for s in rest]
        ranked = sorted(prices, key=lambda p: (-p.l_value, p.scenario_id))
        worst = ranked[0]
        violations = sum(1 for p in prices if p.l_value > 0)
        trace.append({"event": "pricing", "max_l": worst.l_value, "argmax": worst.scenario_id,
                      "violations": violations})
        if violations + res.chance_used() <= budget:
            status = res.status if not heuristic else _heuristic_status(res.status)
            return finish(ctx, name, res.design, status, trace, chosen, res.operations())
        if ctx.remaining() <= 0:
            return finish(ctx, name, res.design, TIME_LIMIT, trace, chosen, res.operations())
        chosen = sorted(chosen + [worst.scenario_id])
        trace.append({"event": "add_scenario", "scenario": worst.scenario_id,
                      "subset_size": len(chosen)})


def _heuristic_status(status):
    return "Feasible" if status == OPTIMAL else status


def brute_force_oracle(instance, scenarios, params: Optional[SolveParams] = None, *,
                       cycles=None, link_mode="energized",
                       max_binaries: int = ORACLE_BINARY_BUDGET) -> Tuple[float, Optional[Design]]:
    """Cheapest design found by enumerating every first-stage binary assignment.

    Assignments are visited in order of binary cost, so the search stops once
    no remaining assignment can beat the incumbent. Continuous capacities are
    optimized by a joint solve when a built facility can add capacity.
    Returns ``(math.inf, None)`` when no assignment is feasible.
    """
    ctx = Context(instance, scenarios, params, cycles, link_mode)
    model = ctx.master(ctx.scenarios)
    free = [(kind, key, j) for kind, key, j in model.first.items()
            if model.variables[j].binary and model.variables[j].lb < model.variables[j].ub]
    if len(free) > max_binaries:
        raise TooLarge(f"{len(free)} first-stage binaries exceed the oracle budget of {max_binaries}")
    costs = np.array([model.objective.get(j, 0.0) for _, _, j in free])
    assignments = np.array(list(itertools.product((0, 1), repeat=len(free))), dtype=float).reshape(-1, len(free))
    order = np.lexsort((np.arange(len(assignments)), assignments @ costs))
    caps = [(key, j) for key, j in model.first.capacity.items() if model.variables[j].ub > 0]
    single = [ctx.master([s]) for s in ctx.scenarios]
    best, best_design = math.inf, None
    fail_first = 0
    for row in order:
        bits = assignments[row]
        base = float(bits @ costs)
        if base >= best - 1e-9:
            break
        fixes = {j: float(b) for (_, _, j), b in zip(free, bits)}
        design_bits = model.design_from(_full(model, fixes), instance)
        expandable = [key for key, j in caps if design_bits.facility_built.get(key[0])]
        if expandable:
            res = solve_master(ctx, ctx.scenarios, fixes=fixes, model=model)
            if res.design is not None and res.objective < best - 1e-9:
                best, best_design = res.objective, res.design
            continue
        # no continuous first-stage freedom: scenarios decouple
        ok = True
        order_s = [fail_first] + [k for k in range(len(single)) if k != fail_first]
        for k in order_s:
            sub = single[k].copy()
            for j, v in sub.first_stage_fixes(design_bits).items():
                sub.set_bounds(j, v, v)
            sub.set_objective({}, "min")
            if solve_mip(sub, ctx.sub_params()).status != Status.OPTIMAL:
                ok = False
                fail_first = k
                break
        if ok:
            best, best_design = base, design_bits
    return best, best_design


def _full(model, fixes):
    x = np.array([v.lb for v in model.variables])
    for j, v in fixes.items():
        x[j] = v
    return x
