"""Branch-and-bound over binary variables.

Most-fractional branching (ties to the lowest index), best-bound node
selection with depth-first plunging into the child nearest the LP value.
Until the first incumbent exists, open nodes are taken last-in first-out so
the search reaches a leaf quickly.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import replace

import numpy as np

from .lp import make_engine, presolve
from .model import MipModel, MipSolution, SolveParams, Status
from .simplex import LPStatus


def solve_mip(model: MipModel, params: SolveParams | None = None) -> MipSolution:
    return MipSession(model, params).solve()


class MipSession:
    """Repeated solves of one model under different variable fixings.

    The presolved model and the simplex state persist between calls, so each
    solve after the first warm starts from the last basis instead of
    rebuilding the tableau. Fixings only tighten bounds, so presolve
    reductions stay valid for every call.
    """

    def __init__(self, model: MipModel, params: SolveParams | None = None):
        self.model = model
        self.params = params or SolveParams()
        self.red = presolve(model, integer=True, int_tol=self.params.integrality_tolerance)
        self.engine = None if self.red.infeasible else make_engine(self.red, self.params)
        self._where = {int(c): k for k, c in enumerate(self.red.cols)}
        self._cold = True

    def _root_bounds(self, fixes):
        lb, ub = self.red.lb.copy(), self.red.ub.copy()
        for j, v in (fixes or {}).items():
            k = self._where.get(int(j))
            if k is None:
                if abs(self.red.fixed_x[int(j)] - v) > 1e-9:
                    return None
                continue
            if v < lb[k] - 1e-9 or v > ub[k] + 1e-9:
                return None
            lb[k] = ub[k] = v
        return lb, ub

    def relax(self) -> MipSolution:
        """Continuous relaxation of the presolved model; it warms the engine for later solves."""
        if self.red.infeasible:
            return MipSolution(Status.INFEASIBLE, node_count=0)
        engine = self.engine
        for j in range(self.red.lb.size):
            engine.set_bounds(j, self.red.lb[j], self.red.ub[j])
        status = engine.solve() if self._cold else engine.resolve()
        self._cold = False
        if status == LPStatus.INFEASIBLE:
            return MipSolution(Status.INFEASIBLE, node_count=1)
        if status == LPStatus.UNBOUNDED:
            return MipSolution(Status.UNBOUNDED, node_count=1)
        if status != LPStatus.OPTIMAL:
            return MipSolution(Status.NUMERICAL, node_count=1)
        sign = -1.0 if self.model.sense == "max" else 1.0
        x = self.red.expand(engine.primal())
        bound = sign * (engine.objective + self.red.constant) + self.model.objective_constant
        return MipSolution(Status.OPTIMAL, x, float(self.model.objective_value(x)), bound, node_count=1)

    def solve(self, fixes=None, cutoff: float | None = None,
              time_limit: float | None = None) -> MipSolution:
        """Solve with ``fixes`` (model column -> value) held fixed."""
        params = self.params
        if cutoff is not None or time_limit is not None:
            params = replace(params,
                             objective_cutoff=params.objective_cutoff if cutoff is None else cutoff,
                             time_limit_seconds=params.time_limit_seconds if time_limit is None else time_limit)
        if self.red.infeasible:
            return MipSolution(Status.INFEASIBLE, node_count=0)
        bounds = self._root_bounds(fixes)
        if bounds is None:
            return MipSolution(Status.INFEASIBLE, node_count=0)
        return _branch_and_bound(self, params, *bounds)


def _branch_and_bound(session: MipSession, params: SolveParams, root_lb, root_ub) -> MipSolution:
    model, red, engine = session.model, session.red, session.engine
    start = time.perf_counter()
    sign = -1.0 if model.sense == "max" else 1.0

    # everything below is in minimization form on the reduced problem
    offset = red.constant + sign * model.objective_constant

    def external(v):
        return sign * (v + offset)

    cutoff = math.inf
    if params.objective_cutoff is not None:
        cutoff = sign * params.objective_cutoff - offset

    bins = np.nonzero(red.is_bin)[0]
    prio = np.array([model.branch_priority.get(int(red.cols[j]), 0) for j in bins], dtype=float)

    def apply(changes):
        lb, ub = root_lb.copy(), root_ub.copy()
        for j, (lo, hi) in changes.items():
            lb[j], ub[j] = lo, hi
        n = lb.size
        diff = np.nonzero((lb != engine.lb[:n]) | (ub != engine.ub[:n]))[0]
        for j in diff:
            engine.set_bounds(int(j), lb[j], ub[j])

    def reoptimize():
        st = engine.resolve()
        if st == LPStatus.ITERATION_LIMIT:
            st = engine.solve()
        return st

    if session._cold:
        for j in range(root_lb.size):
            engine.set_bounds(j, root_lb[j], root_ub[j])
        status = engine.solve()
        session._cold = False
    else:
        apply({})
        status = reoptimize()
    nodes = 1
    trace = []
    if status == LPStatus.INFEASIBLE:
        return MipSolution(Status.INFEASIBLE, node_count=nodes)
    if status == LPStatus.UNBOUNDED:
        return MipSolution(Status.UNBOUNDED, node_count=nodes)
    if status != LPStatus.OPTIMAL:
        return MipSolution(Status.NUMERICAL, node_count=nodes)

    incumbent = cutoff
    best_x = None
    heap = []
    counter = itertools.count()
    int_tol = params.integrality_tolerance

    def gap_closed(bound):
        if not math.isfinite(incumbent):
            return False
        return incumbent - bound <= max(1e-9, params.mip_gap * max(1.0, abs(incumbent)))

    def apply(changes):
        lb, ub = root_lb.copy(), root_ub.copy()
        for j, (lo, hi) in changes.items():
            lb[j], ub[j] = lo, hi
        n = lb.size
        diff = np.nonzero((lb != engine.lb[:n]) | (ub != engine.ub[:n]))[0]
        for j in diff:
            engine.set_bounds(int(j), lb[j], ub[j])

    def reoptimize():
        st = engine.resolve()
        if st == LPStatus.ITERATION_LIMIT:
            st = engine.solve()
        return st

    changes: dict = {}
    pruned_min = math.inf
    node_bound = engine.objective
    lp_status = status
    limit_hit = None
    while True:
        if time.perf_counter() - start > params.time_limit_seconds:
            limit_hit = Status.TIME_LIMIT
            break
        if nodes > params.node_limit:
            limit_hit = Status.NODE_LIMIT
            break
        dive = None
        if lp_status == LPStatus.OPTIMAL:
            node_bound = engine.objective
            trace.append((nodes, external(node_bound), external(incumbent)))
            if not gap_closed(node_bound) and node_bound < incumbent:
                xr = engine.primal()
                frac = np.abs(xr[bins] - np.round(xr[bins]))
                if frac.size and frac.max() > int_tol:
                    # highest priority class first, then most fractional;
                    # argmax returns the first maximum so ties go to the lowest index
                    live = frac > int_tol
                    top = prio[live].max()
                    score = np.where(live & (prio == top), frac, -1.0)
                    j = int(bins[int(np.argmax(score))])
                    v = xr[j]
                    down = dict(changes)
                    down[j] = (root_lb[j], math.floor(v))
                    up = dict(changes)
                    up[j] = (math.ceil(v), root_ub[j])
                    first, second = (up, down) if v - math.floor(v) >= 0.5 else (down, up)
                    heapq.heappush(heap, (node_bound, next(counter), second))
                    dive = first
                else:
                    incumbent = node_bound
                    xr[bins] = np.round(xr[bins])
                    best_x = xr
        elif lp_status in (LPStatus.ITERATION_LIMIT,):
            limit_hit = Status.NUMERICAL
            break
        elif lp_status == LPStatus.UNBOUNDED and best_x is None:
            return MipSolution(Status.UNBOUNDED, node_count=nodes)

        if dive is not None:
            changes = dive
            apply(changes)
            lp_status = reoptimize()
            nodes += 1
            continue
        # pop the best open node, or the newest one while no incumbent exists
        picked = None
        while heap:
            if best_x is None:
                newest = max(range(len(heap)), key=lambda k: heap[k][1])
                heap[newest], heap[-1] = heap[-1], heap[newest]
                bound, _, ch = heap.pop()
                heapq.heapify(heap)
            else:
                bound, _, ch = heapq.heappop(heap)
            if bound < incumbent and not gap_closed(bound):
                picked = ch
                break
            pruned_min = min(pruned_min, bound)
        if picked is None:
            heap.clear()
            break
        # the current basis stays optimal-dual for any bounds, so warm start from it
        changes = picked
        apply(changes)
        lp_status = reoptimize()
        nodes += 1

    open_bounds = [h[0] for h in heap]
    if limit_hit is None:
        bound = min(incumbent, pruned_min)
    else:
        bound = min(open_bounds + [node_bound if lp_status == LPStatus.OPTIMAL else math.inf, incumbent])
    if best_x is None:
        if limit_hit is not None:
            return MipSolution(limit_hit, bound=external(bound), node_count=nodes, trace=trace)
        return MipSolution(Status.INFEASIBLE, node_count=nodes, trace=trace)
    x = red.expand(best_x)
    obj = float(model.objective_value(x))
    status = Status.OPTIMAL if limit_hit is None else limit_hit
    if status == Status.OPTIMAL:
        bound = min(bound, incumbent)
    return MipSolution(status, x, obj, external(bound), nodes, trace)

