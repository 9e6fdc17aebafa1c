"""Presolve and LP relaxation solves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .model import MipModel, MipSolution, SolveParams, Status
from .simplex import LPStatus, SimplexEngine


@dataclass
class Reduced:
    """A model after fixed-column substitution and singleton-row removal."""

    c: np.ndarray
    A: np.ndarray  # dense, reduced rows x reduced cols
    senses: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_bin: np.ndarray
    cols: np.ndarray  # reduced column -> model column
    fixed_x: np.ndarray  # full-length values of eliminated columns
    constant: float
    infeasible: bool = False

    def expand(self, xr) -> np.ndarray:
        x = self.fixed_x.copy()
        x[self.cols] = xr
        return x


def presolve(model: MipModel, integer: bool, tol: float = 1e-9, int_tol: float = 1e-6) -> Reduced:
    c, A, senses, b, lb, ub, is_bin = model.arrays()
    n = model.num_vars
    lb, ub = lb.copy(), ub.copy()
    A = A.tocsr()
    row_alive = np.ones(A.shape[0], dtype=bool)
    bad = False

    def tighten(j, lo, hi):
        nonlocal bad
        if integer and is_bin[j]:
            lo = math.ceil(lo - int_tol) if math.isfinite(lo) else lo
            hi = math.floor(hi + int_tol) if math.isfinite(hi) else hi
        if lo > lb[j]:
            lb[j] = lo
        if hi < ub[j]:
            ub[j] = hi
        if lb[j] > ub[j] + 1e-9 * max(1.0, abs(ub[j])):
            bad = True
        elif lb[j] > ub[j]:
            lb[j] = ub[j]

    for j in np.nonzero(is_bin)[0] if integer else ():
        tighten(j, lb[j], ub[j])

    indptr, indices, data = A.indptr, A.indices, A.data
    changed = True
    while changed and not bad:
        changed = False
        fixed = lb == ub
        for i in np.nonzero(row_alive)[0]:
            lo_, hi_ = indptr[i], indptr[i + 1]
            cols_i = indices[lo_:hi_]
            vals_i = data[lo_:hi_]
            free = ~fixed[cols_i]
            nfree = int(free.sum())
            if nfree > 1:
                continue
            rhs = b[i] - float(vals_i[~free] @ lb[cols_i[~free]]) if (~free).any() else b[i]
            s = senses[i]
            row_alive[i] = False
            changed = True
            if nfree == 0:
                scale = 1e-7 * max(1.0, abs(b[i]))
                if (s == "<=" and rhs < -scale) or (s == ">=" and rhs > scale) or \
                        (s == "==" and abs(rhs) > scale):
                    bad = True
                continue
            j = int(cols_i[free][0])
            a = float(vals_i[free][0])
            val = rhs / a
            if s == "==":
                tighten(j, val, val)
            elif (s == "<=") == (a > 0):
                tighten(j, -math.inf, val)
            else:
                tighten(j, val, math.inf)
            fixed[j] = lb[j] == ub[j]
            if bad:
                break

    fixed = lb == ub
    keep = np.nonzero(~fixed)[0]
    fixed_x = np.where(fixed, lb, 0.0)
    rows = np.nonzero(row_alive)[0]
    dense = A[rows].toarray() if rows.size else np.zeros((0, n))
    b_red = b[rows] - dense[:, fixed] @ lb[fixed] if rows.size else np.zeros(0)
    constant = float(c[fixed] @ lb[fixed])
    return Reduced(
        c=c[keep], A=dense[:, keep], senses=senses[rows], b=b_red,
        lb=lb[keep], ub=ub[keep], is_bin=is_bin[keep], cols=keep,
        fixed_x=fixed_x, constant=constant, infeasible=bad,
    )


class HighsEngine:
    """Cold-start LP engine backed by HiGHS with the SimplexEngine interface."""

    def __init__(self, c, A, senses, b, lb, ub, feas_tol=1e-7):
        self.c = np.asarray(c, float)
        self.n = self.c.size
        self.lb = np.asarray(lb, float).copy()
        self.ub = np.asarray(ub, float).copy()
        le = [i for i, s in enumerate(senses) if s == "<="]
        ge = [i for i, s in enumerate(senses) if s == ">="]
        eq = [i for i, s in enumerate(senses) if s == "=="]
        A = np.asarray(A, float)
        self.A_ub = np.vstack([A[le], -A[ge]]) if le or ge else None
        self.b_ub = np.concatenate([np.asarray(b)[le], -np.asarray(b)[ge]]) if le or ge else None
        self.A_eq = A[eq] if eq else None
        self.b_eq = np.asarray(b)[eq] if eq else None
        self.feas_tol = feas_tol
        self._x = None
        self._obj = math.nan

    def solve(self):
        if self.n == 0:
            self._x, self._obj = np.zeros(0), 0.0
            return LPStatus.OPTIMAL
        res = linprog(
            self.c, A_ub=self.A_ub, b_ub=self.b_ub, A_eq=self.A_eq, b_eq=self.b_eq,
            bounds=np.column_stack([
                np.where(np.isfinite(self.lb), self.lb, -np.inf),
                np.where(np.isfinite(self.ub), self.ub, np.inf)]),
            method="highs",
            options={"primal_feasibility_tolerance": self.feas_tol},
        )
        if res.status == 0:
            self._x = res.x
            self._obj = float(res.fun)
            return LPStatus.OPTIMAL
        if res.status == 2:
            return LPStatus.INFEASIBLE
        if res.status == 3:
            return LPStatus.UNBOUNDED
        return LPStatus.ITERATION_LIMIT

    resolve = solve

    def set_bounds(self, j, lo, hi):
        self.lb[j], self.ub[j] = lo, hi

    def save_basis(self):
        return None, []

    def load_basis(self, basis, at_upper):
        return True

    @property
    def objective(self):
        return self._obj

    def primal(self):
        return self._x.copy()


def make_engine(red: Reduced, params: SolveParams):
    cls = SimplexEngine if params.lp_engine == "simplex" else HighsEngine
    return cls(red.c, red.A, red.senses, red.b, red.lb, red.ub, feas_tol=params.feasibility_tolerance)


def solve_lp(model: MipModel, params: SolveParams | None = None) -> MipSolution:
    """Solve the continuous relaxation of ``model``."""
    params = params or SolveParams()
    red = presolve(model, integer=False)
    sign = -1.0 if model.sense == "max" else 1.0
    if red.infeasible:
        return MipSolution(Status.INFEASIBLE)
    engine = make_engine(red, params)
    status = engine.solve()
    if status == LPStatus.INFEASIBLE:
        return MipSolution(Status.INFEASIBLE, node_count=1)
    if status == LPStatus.UNBOUNDED:
        return MipSolution(Status.UNBOUNDED, node_count=1)
    if status != LPStatus.OPTIMAL:
        return MipSolution(Status.NUMERICAL, node_count=1)
    x = red.expand(engine.primal())
    obj = float(model.objective_value(x))
    bound = sign * (engine.objective + red.constant) + model.objective_constant
    return MipSolution(Status.OPTIMAL, x, obj, bound, node_count=1)
