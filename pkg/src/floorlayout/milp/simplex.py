"""Bounded-variable primal simplex for small dense LPs.

Two-phase method on ``min c x  s.t.  A x (<=,>=,==) b,  lb <= x <= ub``.
Every row gets a slack column with sign-restricted bounds; rows whose slack
cannot absorb the initial residual get an artificial column for phase 1.

Pricing is Dantzig's rule with a Harris two-pass ratio test. After
``bland_after`` degenerate pivots the solver switches to Bland's rule with a
textbook ratio test, which cannot cycle. The explicit basis inverse is
updated by a product-form pivot and recomputed from scratch every
``refactor_every`` pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL = "numerical"


@dataclass
class LPResult:
    status: str
    value: float
    x: np.ndarray | None
    iterations: int = 0
    degenerate_pivots: int = 0
    used_bland: bool = False


class BoundedSimplex:
    """LP in ``min c x`` form prepared once; :meth:`solve` takes per-call bounds.

    Reusing one instance across many bound changes (branch-and-bound nodes)
    avoids rebuilding the constraint matrix, but every solve starts from the
    slack/artificial basis.
    """

    def __init__(
        self,
        c,
        A,
        senses,
        b,
        *,
        feas_tol: float = 1e-9,
        opt_tol: float = 1e-9,
        pivot_tol: float = 1e-9,
        bland_after: int = 1000,
        refactor_every: int = 100,
        max_iter: int | None = None,
    ):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape if A.size else (len(b), len(c))
        self.A = A.reshape(self.m, self.n)
        self.c = np.asarray(c, dtype=float)
        self.b = np.asarray(b, dtype=float).reshape(self.m)
        self.senses = list(senses)
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.pivot_tol = pivot_tol
        self.bland_after = bland_after
        self.refactor_every = refactor_every
        self.max_iter = max_iter or 50 * (self.m + self.n) + 1000
        m, n = self.m, self.n
        # columns: structurals | slacks | artificials
        self.Afull = np.hstack([self.A, np.eye(m), np.eye(m)])
        slack_lb = np.zeros(m)
        slack_ub = np.zeros(m)
        for i, s in enumerate(self.senses):
            if s == "<=":
                slack_ub[i] = np.inf
            elif s == ">=":
                slack_lb[i] = -np.inf
            elif s != "==":
                raise ValueError(f"bad sense {s!r}")
        self.slack_lb, self.slack_ub = slack_lb, slack_ub

    # ------------------------------------------------------------------
    def solve(self, lb, ub) -> LPResult:
        m, n = self.m, self.n
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + self.feas_tol):
            return LPResult(INFEASIBLE, np.inf, None)
        N = n + 2 * m
        lo = np.concatenate([lb, self.slack_lb, np.zeros(m)])
        hi = np.concatenate([ub, self.slack_ub, np.zeros(m)])
        x = np.zeros(N)
        xs = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        x[:n] = xs
        resid = self.b - self.A @ xs
        basis = np.empty(m, dtype=int)
        art_sign = np.ones(m)
        for i in range(m):
            r = resid[i]
            if self.slack_lb[i] - self.feas_tol <= r <= self.slack_ub[i] + self.feas_tol:
                basis[i] = n + i
                x[n + i] = r
            else:
                basis[i] = n + m + i
                art_sign[i] = 1.0 if r > 0 else -1.0
                hi[n + m + i] = np.inf
                x[n + m + i] = abs(r)
                x[n + i] = 0.0
        Afull = self.Afull.copy()
        Afull[:, n + m:] *= art_sign
        state = _State(Afull, self.b, lo, hi, x, basis)
        state.refactor()

        total_iter = 0
        degenerate = 0
        used_bland = False
        art_cols = np.arange(n + m, N)
        if np.any(hi[art_cols] > 0):
            cost1 = np.zeros(N)
            cost1[art_cols] = 1.0
            cost1[art_cols[hi[art_cols] == 0]] = 0.0
            status, it, deg, bl = self._run(state, cost1, total_iter)
            total_iter += it
            degenerate += deg
            used_bland |= bl
            if status != OPTIMAL:
                return LPResult(status, np.inf, None, total_iter, degenerate, used_bland)
            infeas = float(np.sum(state.x[art_cols]))
            if infeas > 1e-7 * max(1.0, float(np.max(np.abs(self.b), initial=0.0))):
                return LPResult(INFEASIBLE, np.inf, None, total_iter, degenerate, used_bland)
            state.hi[art_cols] = 0.0
            state.x[art_cols] = np.clip(state.x[art_cols], 0.0, 0.0)
            state.refactor()
        cost2 = np.zeros(N)
        cost2[:n] = self.c
        status, it, deg, bl = self._run(state, cost2, total_iter)
        total_iter += it
        degenerate += deg
        used_bland |= bl
        if status != OPTIMAL:
            return LPResult(status, np.inf, None, total_iter, degenerate, used_bland)
        xs = state.x[:n].copy()
        # snap to bounds within tolerance
        xs = np.minimum(np.maximum(xs, lb), ub)
        return LPResult(OPTIMAL, float(self.c @ xs), xs, total_iter, degenerate, used_bland)

    # ------------------------------------------------------------------
    def _run(self, st: "_State", cost, iter_offset):
        n, m = self.n, self.m
        bland = False
        degenerate = 0
        pivots_since_refactor = 0
        it = 0
        is_basic = np.zeros(len(cost), dtype=bool)
        is_basic[st.basis] = True
        movable = st.hi - st.lo > 0
        while True:
            if it + iter_offset >= self.max_iter:
                return NUMERICAL, it, degenerate, bland
            y = cost[st.basis] @ st.Binv
            d = cost - y @ st.Afull
            at_lo = st.x <= st.lo + self.feas_tol
            at_hi = st.x >= st.hi - self.feas_tol
            can_inc = movable & ~is_basic & ~at_hi & (d < -self.opt_tol)
            can_dec = movable & ~is_basic & ~at_lo & (d > self.opt_tol)
            # free nonbasic columns sit strictly between bounds
            eligible = can_inc | can_dec
            if not eligible.any():
                return OPTIMAL, it, degenerate, bland
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if can_inc[j] else -1.0
            alpha = st.Binv @ st.Afull[:, j]
            rate = -direction * alpha
            xb = st.x[st.basis]
            lo_b = st.lo[st.basis]
            hi_b = st.hi[st.basis]
            big = np.abs(alpha) > self.pivot_tol
            dec = big & (rate < 0) & np.isfinite(lo_b)
            inc = big & (rate > 0) & np.isfinite(hi_b)
            with np.errstate(divide="ignore", invalid="ignore"):
                t_exact = np.full(m, np.inf)
                t_exact[dec] = (xb[dec] - lo_b[dec]) / -rate[dec]
                t_exact[inc] = (hi_b[inc] - xb[inc]) / rate[inc]
                t_exact = np.maximum(t_exact, 0.0)
            t_flip = st.hi[j] - st.lo[j]
            limited = dec | inc
            if not limited.any() and not np.isfinite(t_flip):
                return UNBOUNDED, it, degenerate, bland
            r = -1
            if limited.any():
                if bland:
                    t_min = t_exact[limited].min()
                    ties = np.flatnonzero(limited & (t_exact <= t_min + 1e-12))
                    r = int(ties[np.argmin(st.basis[ties])])
                else:
                    t_relax = np.full(m, np.inf)
                    t_relax[dec] = (xb[dec] - lo_b[dec] + self.feas_tol) / -rate[dec]
                    t_relax[inc] = (hi_b[inc] - xb[inc] + self.feas_tol) / rate[inc]
                    t_max = t_relax.min()
                    cand = np.flatnonzero(limited & (t_exact <= t_max))
                    r = int(cand[np.argmax(np.abs(alpha[cand]))])
                t = t_exact[r]
            else:
                t = np.inf
            it += 1
            if t_flip <= t:
                # bound flip, basis unchanged
                t = t_flip
                st.x[st.basis] = xb + rate * t
                st.x[j] = st.hi[j] if direction > 0 else st.lo[j]
                if t <= 1e-12:
                    degenerate += 1
                continue
            if t <= 1e-12:
                degenerate += 1
                if not bland and degenerate >= self.bland_after:
                    bland = True
            st.x[st.basis] = xb + rate * t
            st.x[j] += direction * t
            leave = st.basis[r]
            st.x[leave] = st.lo[leave] if rate[r] < 0 else st.hi[leave]
            is_basic[leave] = False
            is_basic[j] = True
            st.pivot(r, j, alpha)
            pivots_since_refactor += 1
            if pivots_since_refactor >= self.refactor_every:
                if not st.refactor():
                    return NUMERICAL, it, degenerate, bland
                pivots_since_refactor = 0


class _State:
    def __init__(self, Afull, b, lo, hi, x, basis):
        self.Afull = Afull
        self.b = b
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = basis
        self.Binv = None

    def refactor(self) -> bool:
        B = self.Afull[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        xn = self.x.copy()
        xn[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.Afull @ xn)
        return bool(np.all(np.isfinite(self.x)))

    def pivot(self, r: int, j: int, alpha) -> None:
        Binv = self.Binv
        row = Binv[r] / alpha[r]
        Binv -= np.outer(alpha, row)
        Binv[r] = row
        self.basis[r] = j


def solve_lp(model, lb=None, ub=None, **options) -> LPResult:
    """Solve the LP relaxation of a :class:`~floorlayout.milp.model.MilpModel`.

    ``lb``/``ub`` override the variable bounds (arrays in variable order).
    The returned value includes the model's objective constant.
    """
    c, A, senses, b, vlb, vub = model.to_arrays()
    lp = BoundedSimplex(c, A, senses, b, **options)
    res = lp.solve(vlb if lb is None else lb, vub if ub is None else ub)
    if res.status == OPTIMAL:
        res.value += model.objective_const
    return res
