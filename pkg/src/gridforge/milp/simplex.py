"""Dense bounded-variable simplex.

Rows are ``A x + s = b`` with one logical (slack) column per row whose bounds
encode the relation. Phase 1 uses artificial columns; the tableau is then
reused by a dual simplex for warm starts after bound changes, which is what
branch-and-bound needs.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import sparse

# smaller pivots let round-off blow up the basis on big-M rows
PIVOT_TOL = 1e-7
OPT_TOL = 1e-9
DEGENERATE_SWITCH = 50
REFACTOR_EVERY = 100
DUAL_RATIO_TOL = 1e-9


class LPStatus:
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class SimplexEngine:
    """Simplex state for ``min c x`` over ``A x {<=,==,>=} b``, ``lb <= x <= ub``.

    ``A`` is a dense ``(m, n)`` array. Structural columns keep their indices
    ``0..n-1``; logicals follow.
    """

    def __init__(self, c, A, senses, b, lb, ub, feas_tol=1e-7, max_iter=None):
        A = np.asarray(A, dtype=float)
        m, n = A.shape
        self.m, self.n = m, n
        self.feas_tol = feas_tol
        self.max_iter = max_iter or 50 * (m + n) + 1000
        slo = np.zeros(m)
        sup = np.zeros(m)
        for i, s in enumerate(senses):
            if s == "<=":
                sup[i] = math.inf
            elif s == ">=":
                slo[i] = -math.inf
        self.b = np.asarray(b, dtype=float).copy()
        self.cols = np.hstack([A, np.eye(m)])
        self.lb = np.concatenate([np.asarray(lb, float), slo])
        self.ub = np.concatenate([np.asarray(ub, float), sup])
        self.cost = np.concatenate([np.asarray(c, float), np.zeros(m)])
        self.basis = None
        self.T = None
        self.x = None
        self.d = None
        self.iterations = 0
        self._active_cost = self.cost
        self._pivots = 0

    # -- helpers --------------------------------------------------------
    @property
    def ncols(self) -> int:
        return self.cols.shape[1]

    def _nonbasic_start(self, j):
        lo, hi = self.lb[j], self.ub[j]
        if math.isfinite(lo):
            return lo
        if math.isfinite(hi):
            return hi
        return 0.0

    def _pivot(self, r, q):
        T = self.T
        piv = T[r, q]
        T[r] /= piv
        col = T[:, q].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        cz = np.nonzero(T[r])[0]
        row = T[r, cz]
        if nz.size:
            # tableaus are sparse enough that the nz x cz block is far cheaper
            T[np.ix_(nz, cz)] -= np.outer(col[nz], row)
        self.d[cz] -= self.d[q] * row
        self.d[q] = 0.0
        self.basis[r] = q
        self._pivots += 1
        if self._pivots >= REFACTOR_EVERY:
            self._refactor()

    def _refactor(self):
        """Rebuild the tableau from the basis to shed accumulated round-off."""
        self._pivots = 0
        B = self.cols[:, self.basis]
        try:
            T = self._tableau(self.basis)
        except np.linalg.LinAlgError:
            return
        nb = np.ones(self.ncols, dtype=bool)
        nb[self.basis] = False
        xb = np.linalg.solve(B, self.b - self.cols[:, nb] @ self.x[nb])
        self.T = T
        self.x[self.basis] = xb
        self._reduced_costs(self._active_cost)

    def _tableau(self, basis):
        """``B^-1 [A | I]``; the columns are sparse, so invert B once and multiply."""
        inv = np.linalg.inv(self.cols[:, basis])
        return np.ascontiguousarray((sparse.csr_matrix(self.cols).T @ inv.T).T)

    def _consistent(self, tol=1e-6) -> bool:
        """Whether the tracked basic values still match a fresh solve with the basis.

        Checked before trusting an infeasibility verdict, which round-off can fake.
        """
        B = self.cols[:, self.basis]
        nb = ~self._is_basic_mask()
        try:
            xb = np.linalg.solve(B, self.b - self.cols[:, nb] @ self.x[nb])
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(xb)):
            return False
        return bool(np.all(np.abs(xb - self.x[self.basis]) <= tol * (1.0 + np.abs(xb))))

    def _reduced_costs(self, cost):
        self.d = cost - cost[self.basis] @ self.T

    def _is_basic_mask(self):
        mask = np.zeros(self.ncols, dtype=bool)
        mask[self.basis] = True
        return mask

    # -- primal simplex ---------------------------------------------------
    def _primal(self, cost):
        """Primal simplex from a primal feasible basis. Returns a status."""
        self._active_cost = cost
        bland = False
        stall = 0
        last_obj = math.inf
        eps = self.feas_tol
        while True:
            if self.iterations >= self.max_iter:
                return LPStatus.ITERATION_LIMIT
            self.iterations += 1
            basic = self._is_basic_mask()
            d = self.d
            x = self.x
            inc = (d < -OPT_TOL) & (x < self.ub - eps) & ~basic
            dec = (d > OPT_TOL) & (x > self.lb + eps) & ~basic
            cand = inc | dec
            if not cand.any():
                return LPStatus.OPTIMAL
            if bland:
                q = int(np.argmax(cand))
            else:
                score = np.where(cand, np.abs(d), 0.0)
                q = int(np.argmax(score))
            direction = 1.0 if inc[q] else -1.0
            alpha = self.T[:, q] * direction
            xb = x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]
            limits = np.full(self.m, math.inf)
            pos = alpha > PIVOT_TOL
            neg = alpha < -PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                limits[pos] = (xb[pos] - lbb[pos]) / alpha[pos]
                limits[neg] = (ubb[neg] - xb[neg]) / (-alpha[neg])
            limits = np.where(np.isnan(limits), math.inf, limits)
            np.maximum(limits, 0.0, out=limits)
            t_flip = self.ub[q] - self.lb[q]
            t_row = limits.min() if self.m else math.inf
            if not math.isfinite(t_row) and not math.isfinite(t_flip):
                return LPStatus.UNBOUNDED
            if t_flip <= t_row:
                t = t_flip
                x[self.basis] = xb - t * alpha
                x[q] = self.ub[q] if direction > 0 else self.lb[q]
            else:
                t = t_row
                ties = np.nonzero(limits <= t_row + 1e-12)[0]
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                leaving = self.basis[r]
                x[self.basis] = xb - t * alpha
                x[q] = x[q] + direction * t
                x[leaving] = self.lb[leaving] if alpha[r] > 0 else self.ub[leaving]
                self._pivot(r, q)
            obj = float(cost @ x)
            if obj < last_obj - 1e-12:
                last_obj = obj
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > DEGENERATE_SWITCH:
                    bland = True

    # -- dual simplex -------------------------------------------------------
    def _dual(self):
        """Dual simplex from a dual feasible basis. Returns a status."""
        self._active_cost = self.cost
        eps = self.feas_tol
        stall = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return LPStatus.ITERATION_LIMIT
            self.iterations += 1
            x = self.x
            xb = x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]
            below = lbb - xb
            above = xb - ubb
            infeas = np.maximum(below, above)
            if not self.m or infeas.max() <= eps:
                return LPStatus.OPTIMAL
            if bland:
                rows = np.nonzero(infeas > eps)[0]
                r = int(rows[np.argmin(self.basis[rows])])
            else:
                r = int(np.argmax(infeas))
            increase = below[r] > 0
            target = lbb[r] if increase else ubb[r]
            row = self.T[r]
            basic = self._is_basic_mask()
            can_up = (x < self.ub - eps) & ~basic
            can_down = (x > self.lb + eps) & ~basic
            if increase:
                elig = ((row < -PIVOT_TOL) & can_up) | ((row > PIVOT_TOL) & can_down)
            else:
                elig = ((row > PIVOT_TOL) & can_up) | ((row < -PIVOT_TOL) & can_down)
            if not elig.any():
                return LPStatus.INFEASIBLE
            idx = np.nonzero(elig)[0]
            ratios = np.abs(self.d[idx]) / np.abs(row[idx])
            best = ratios.min()
            # widest pivot among near-ties keeps the tableau well conditioned
            ties = idx[ratios <= best + DUAL_RATIO_TOL]
            if bland:
                q = int(ties.min())
            else:
                q = int(ties[np.argmax(np.abs(row[ties]))])
            delta = (xb[r] - target) / row[q]
            leaving = self.basis[r]
            x[self.basis] = xb - self.T[:, q] * delta
            x[q] += delta
            x[leaving] = target
            self._pivot(r, q)
            stall += 1
            if stall > DEGENERATE_SWITCH * 4:
                bland = True

    # -- drivers --------------------------------------------------------------
    def solve(self):
        """Cold start.

        When every structural column can rest at a bound matching the sign
        of its cost, the slack basis is dual feasible and the dual simplex
        solves directly; otherwise phase 1 with artificials runs first.
        """
        status = self._dual_start()
        if status is not None and (status != LPStatus.INFEASIBLE or self._consistent()):
            return status
        return self._two_phase()

    def _dual_start(self):
        n, m = self.n, self.m
        c = self.cost[:n]
        lo, hi = self.lb[:n], self.ub[:n]
        rest = np.where(c < 0, hi, lo)
        if not np.all(np.isfinite(rest)):
            return None
        x = np.zeros(self.ncols)
        x[:n] = rest
        x[n:n + m] = self.b - self.cols[:, :n] @ x[:n]
        self.iterations = 0
        self.x = x
        self.basis = np.arange(n, n + m)
        self.T = self.cols.copy()
        self._reduced_costs(self.cost)
        status = self._dual()
        if status == LPStatus.ITERATION_LIMIT:
            return None
        if status != LPStatus.OPTIMAL:
            return status
        return self._primal(self.cost)

    def _two_phase(self):
        m = self.m
        self.iterations = 0
        n_all = self.ncols
        x = np.array([self._nonbasic_start(j) for j in range(n_all)])
        # logical columns start basic; their value absorbs the residual
        resid = self.b - self.cols[:, :self.n] @ x[:self.n]
        slack = np.arange(self.n, self.n + m)
        slo, sup = self.lb[slack], self.ub[slack]
        clipped = np.minimum(np.maximum(resid, slo), sup)
        gap = resid - clipped
        needs_art = np.abs(gap) > self.feas_tol
        art_rows = np.nonzero(needs_art)[0]
        k = art_rows.size
        if k:
            art = np.zeros((m, k))
            art[art_rows, np.arange(k)] = np.sign(gap[art_rows])
            self.cols = np.hstack([self.cols, art])
            self.lb = np.concatenate([self.lb, np.zeros(k)])
            self.ub = np.concatenate([self.ub, np.full(k, math.inf)])
            self.cost = np.concatenate([self.cost, np.zeros(k)])
        self.basis = slack.copy()
        self.basis[art_rows] = n_all + np.arange(k)
        x = np.concatenate([x, np.zeros(k)])
        x[slack] = np.where(needs_art, clipped, resid)
        x[n_all:] = np.abs(gap[art_rows])
        self.x = x
        self.T = self._tableau(self.basis) if k else self.cols.copy()
        if k:
            phase1 = np.zeros(self.ncols)
            phase1[n_all:] = 1.0
            self._reduced_costs(phase1)
            status = self._primal(phase1)
            if status != LPStatus.OPTIMAL:
                return status
            if x[n_all:].sum() > self.feas_tol * max(1.0, np.abs(self.b).max(initial=0.0)):
                return LPStatus.INFEASIBLE
            self._drop_artificials(n_all)
        self._reduced_costs(self.cost)
        return self._primal(self.cost)

    def _drop_artificials(self, n_all):
        x = self.x
        for r in range(self.m):
            if self.basis[r] < n_all:
                continue
            row = self.T[r, :n_all].copy()
            row[self.basis[self.basis < n_all]] = 0.0
            cand = np.nonzero(np.abs(row) > 1e-7)[0]
            if cand.size:
                q = int(cand[np.argmax(np.abs(row[cand]))])
                leaving = self.basis[r]
                self.d = np.zeros(self.ncols)
                self._pivot(r, q)
                x[leaving] = 0.0
        keep = np.ones(self.ncols, dtype=bool)
        basic = self._is_basic_mask()
        keep[n_all:] = basic[n_all:]
        remap = -np.ones(self.ncols, dtype=int)
        remap[keep] = np.arange(int(keep.sum()))
        self.cols = self.cols[:, keep]
        self.T = self.T[:, keep]
        self.lb = self.lb[keep]
        self.ub = np.where(np.arange(keep.sum()) >= n_all, 0.0, self.ub[keep])
        self.cost = self.cost[keep]
        self.x = x[keep]
        self.x[n_all:] = 0.0
        self.basis = remap[self.basis]

    def resolve(self):
        """Warm start after bound changes via :meth:`set_bounds`.

        Boxed nonbasic columns are first moved to the bound their reduced
        cost prefers, which restores dual feasibility; if some column would
        need an infinite bound the engine falls back to a cold start.
        """
        self.iterations = 0
        if not self._flip_to_dual_feasible():
            return self.solve()
        status = self._dual()
        if status == LPStatus.INFEASIBLE and not self._consistent():
            return self.solve()
        if status != LPStatus.OPTIMAL:
            return status
        return self._primal(self.cost)

    def _flip_to_dual_feasible(self) -> bool:
        nb = ~self._is_basic_mask()
        d = self.d
        fixed = self.lb == self.ub
        want_hi = nb & (d < -OPT_TOL) & ~fixed
        want_lo = nb & (d > OPT_TOL) & ~fixed
        if np.any(~np.isfinite(self.ub[want_hi])) or np.any(~np.isfinite(self.lb[want_lo])):
            return False
        target = self.x.copy()
        target[want_hi] = self.ub[want_hi]
        target[want_lo] = self.lb[want_lo]
        moved = np.nonzero(nb & (target != self.x))[0]
        if moved.size:
            delta = target[moved] - self.x[moved]
            self.x[self.basis] -= self.T[:, moved] @ delta
            self.x[moved] = target[moved]
        return True

    def set_bounds(self, j, lo, hi):
        """Change bounds of column ``j`` keeping the basis; nonbasics move to a bound."""
        self.lb[j], self.ub[j] = lo, hi
        if self.basis is None or j in self._basic_set():
            return
        old = self.x[j]
        new = min(max(old, lo), hi)
        if not (math.isfinite(new)):
            new = self._nonbasic_start(j)
        if new != old:
            self.x[self.basis] -= self.T[:, j] * (new - old)
            self.x[j] = new

    def _basic_set(self):
        return set(self.basis.tolist())

    def load_basis(self, basis, at_upper) -> bool:
        """Refactor the tableau for ``basis``; nonbasic columns sit at lb unless in ``at_upper``.

        Returns False, leaving the engine untouched, when the basis matrix is singular.
        """
        try:
            T = self._tableau(np.asarray(basis, dtype=int))
        except np.linalg.LinAlgError:
            return False
        self.basis = np.array(basis, dtype=int)
        self.T = T
        self._pivots = 0
        x = np.array([self._nonbasic_start(j) for j in range(self.ncols)])
        for j in at_upper:
            if math.isfinite(self.ub[j]):
                x[j] = self.ub[j]
        x[self.basis] = 0.0
        nb = np.ones(self.ncols, dtype=bool)
        nb[self.basis] = False
        rhs = self.b - self.cols[:, nb] @ x[nb]
        x[self.basis] = np.linalg.solve(self.cols[:, self.basis], rhs)
        self.x = x
        self._reduced_costs(self.cost)
        return True

    def save_basis(self):
        basic = self._is_basic_mask()
        at_upper = np.nonzero(~basic & np.isfinite(self.ub) & (self.x >= self.ub - 1e-12)
                              & (self.ub > self.lb))[0]
        return self.basis.copy(), at_upper.tolist()

    @property
    def objective(self) -> float:
        return float(self.cost @ self.x)

    def primal(self) -> np.ndarray:
        return self.x[:self.n].copy()
