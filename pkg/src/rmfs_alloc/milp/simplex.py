"""Dense bounded-variable dual simplex.

The LP ``min c.x  s.t.  row_lo <= A x <= row_hi,  lo <= x <= hi`` is written
as ``A x - w = 0`` with one logical variable ``w`` per row carrying the row
bounds. With every structural variable boxed, the all-logical basis is dual
feasible once each structural sits at the bound its cost prefers, so the
dual simplex needs no phase one. Branch-and-bound re-optimises after bound
changes from the parent's basis, which also keeps dual feasibility.

Anti-cycling: after a run of iterations without dual objective progress the
pivot rules switch to lowest-index (Bland) choices until progress resumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
STALL_LIMIT = 30


@dataclass
class Basis:
    basic: np.ndarray
    at_upper: np.ndarray

    def copy(self) -> "Basis":
        return Basis(self.basic.copy(), self.at_upper.copy())


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "iteration_limit"
    x: np.ndarray | None
    objective: float
    basis: Basis | None
    iterations: int
    tableau: np.ndarray | None = None


class DenseLP:
    """Fixed constraint matrix and costs; bounds vary per solve."""

    def __init__(self, c: np.ndarray, a: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray) -> None:
        self.m, self.n = a.shape
        self.a_full = np.hstack([np.asarray(a, dtype=float), -np.eye(self.m)])
        self.c_full = np.concatenate([np.asarray(c, dtype=float), np.zeros(self.m)])
        self.row_lo = np.asarray(row_lo, dtype=float)
        self.row_hi = np.asarray(row_hi, dtype=float)

    def full_bounds(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.concatenate([lo, self.row_lo]), np.concatenate([hi, self.row_hi])

    def cold_basis(self) -> Basis:
        basic = np.arange(self.n, self.n + self.m)
        at_upper = np.zeros(self.n + self.m, dtype=bool)
        at_upper[: self.n] = self.c_full[: self.n] < 0
        return Basis(basic, at_upper)

    def factor(self, basis: Basis) -> np.ndarray | None:
        if self.m == 0:
            return np.zeros((0, self.n))
        try:
            return np.linalg.solve(self.a_full[:, basis.basic], self.a_full)
        except np.linalg.LinAlgError:
            return None

    def solve(
        self,
        lo: np.ndarray,
        hi: np.ndarray,
        basis: Basis | None = None,
        tableau: np.ndarray | None = None,
        max_iter: int | None = None,
        keep_tableau: bool = False,
    ) -> LPResult:
        """Optimise for the given structural bounds.

        ``basis`` (with its factored ``tableau`` if already available) warm
        starts the solve; the tableau is modified in place.
        """
        flo, fhi = self.full_bounds(lo, hi)
        if (flo > fhi + FEAS_TOL).any():
            return LPResult("infeasible", None, np.inf, None, 0)
        warm = basis is not None
        if not warm:
            basis = self.cold_basis()
            t = np.hstack([-self.a_full[:, : self.n], np.eye(self.m)])
        else:
            basis = basis.copy()
            t = tableau if tableau is not None else self.factor(basis)
            if t is None:
                return self.solve(lo, hi, None, None, max_iter, keep_tableau)
        res = _dual_simplex(t, basis, self.c_full, flo, fhi, self.a_full, max_iter or 50 * (self.m + self.n) + 1000)
        if res == "dual_infeasible":
            if warm:
                return self.solve(lo, hi, None, None, max_iter, keep_tableau)
            raise RuntimeError("cold basis should always be dual feasible")
        status, x, iters, t = res
        if status != "optimal":
            return LPResult(status, None, np.inf, None, iters)
        obj = float(self.c_full @ x)
        return LPResult("optimal", x[: self.n].copy(), obj, basis, iters, t if keep_tableau else None)


def _nonbasic_values(at_upper, is_basic, flo, fhi) -> np.ndarray:
    x = np.where(at_upper, fhi, flo)
    # a bound chosen on an infinite side falls back to the finite one
    x = np.where(np.isfinite(x), x, np.where(at_upper, flo, fhi))
    x[is_basic] = 0.0
    return x


def _dual_simplex(t, basis, c, flo, fhi, a_full, max_iter):
    m, ntot = t.shape
    basic = basis.basic
    at_upper = basis.at_upper
    is_basic = np.zeros(ntot, dtype=bool)
    is_basic[basic] = True
    at_upper[is_basic] = False
    at_upper &= np.isfinite(fhi)
    at_upper |= ~is_basic & ~np.isfinite(flo)
    movable = flo < fhi

    d = c - c[basic] @ t
    # restore dual feasibility by bound flips where the box allows it
    wrong_lo = ~is_basic & movable & ~at_upper & (d < -DUAL_TOL)
    wrong_hi = ~is_basic & movable & at_upper & (d > DUAL_TOL)
    if (wrong_lo & ~np.isfinite(fhi)).any() or (wrong_hi & ~np.isfinite(flo)).any():
        return "dual_infeasible"
    at_upper[wrong_lo] = True
    at_upper[wrong_hi] = False

    x = _nonbasic_values(at_upper, is_basic, flo, fhi)
    xb = -(t @ x)
    last_obj = -np.inf
    stall = 0
    since_refactor = 0
    for it in range(max_iter):
        lb = flo[basic]
        ub = fhi[basic]
        below = lb - xb
        above = xb - ub
        viol = np.maximum(below, above)
        infeasible_rows = np.flatnonzero(viol > FEAS_TOL)
        if infeasible_rows.size == 0:
            x[basic] = xb
            return "optimal", x, it, t
        bland = stall >= STALL_LIMIT
        if bland:
            r = int(infeasible_rows[np.argmin(basic[infeasible_rows])])
        else:
            r = int(infeasible_rows[np.argmax(viol[infeasible_rows])])
        row = t[r]
        raise_up = below[r] > above[r]
        nb = ~is_basic & movable
        if raise_up:
            cand = nb & ((~at_upper & (row < -PIVOT_TOL)) | (at_upper & (row > PIVOT_TOL)))
            target = lb[r]
        else:
            cand = nb & ((~at_upper & (row > PIVOT_TOL)) | (at_upper & (row < -PIVOT_TOL)))
            target = ub[r]
        idx = np.flatnonzero(cand)
        if idx.size == 0:
            return "infeasible", None, it, t
        ratios = np.abs(d[idx]) / np.abs(row[idx])
        best = ratios.min()
        ties = idx[ratios <= best + DUAL_TOL]
        if bland or ties.size == 1:
            q = int(ties[0])
        else:
            q = int(ties[np.argmax(np.abs(row[ties]))])

        alpha = row[q]
        step = (xb[r] - target) / alpha
        col = t[:, q].copy()
        xb -= step * col
        entering_value = x[q] + step
        t[r] /= alpha
        col[r] = 0.0
        t -= np.outer(col, t[r])
        d -= d[q] * t[r]
        leaving = basic[r]
        basic[r] = q
        is_basic[q] = True
        is_basic[leaving] = False
        at_upper[q] = False
        at_upper[leaving] = not raise_up
        x[q] = 0.0
        x[leaving] = target
        xb[r] = entering_value

        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            since_refactor = 0
            fresh = np.linalg.solve(a_full[:, basic], a_full)
            t[:] = fresh
            d = c - c[basic] @ t
            xb = -(t[:, ~is_basic] @ x[~is_basic])

        obj = float(c[~is_basic] @ x[~is_basic] + c[basic] @ xb)
        if obj > last_obj + 1e-12 * max(1.0, abs(obj)):
            stall = 0
            last_obj = obj
        else:
            stall += 1
    return "iteration_limit", None, max_iter, t
