"""Best-first branch-and-bound over the dense dual simplex.

Nodes are ordered by LP bound (deeper first on ties). The branching variable
is the fractional binary closest to 0.5, lowest id on ties. Children are
solved as soon as they are created, warm-started from a copy of the parent's
factored tableau, so each heap entry already carries its own bound.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from rmfs_alloc.milp.model import Model, VarKind
from rmfs_alloc.milp.outcome import Limits, SolveOutcome, Status
from rmfs_alloc.milp.simplex import Basis, DenseLP


@dataclass
class _Node:
    lo: np.ndarray
    hi: np.ndarray
    basis: Basis
    x: np.ndarray
    depth: int


def branch_and_bound(model: Model, limits: Limits | None = None) -> SolveOutcome:
    limits = limits or Limits()
    model.check()
    start = time.perf_counter()
    deadline = start + limits.time_limit_s
    sign = 1.0 if model.sense == "min" else -1.0

    c = sign * model.objective_vector()
    a, row_lo, row_hi = model.matrix()
    lp = DenseLP(c, a.toarray(), row_lo, row_hi)
    lo, hi = model.bounds()
    binaries = np.array(model.binary_ids(), dtype=np.intp)
    const = sign * model.objective_constant
    tol = limits.int_tol

    # integral objective => node bounds may be rounded up
    cont = [v.id for v in model.variables if v.kind is VarKind.CONTINUOUS]
    integral_obj = bool(np.all(c[cont] == 0)) and bool(np.all(c == np.round(c)))

    def node_bound(obj: float) -> float:
        if integral_obj:
            return math.ceil(obj - 1e-6)
        return obj

    def integral(x: np.ndarray) -> bool:
        if binaries.size == 0:
            return True
        xb = x[binaries]
        return bool(np.all(np.abs(xb - np.round(xb)) <= tol))

    def polish(x: np.ndarray) -> np.ndarray:
        x = x.copy()
        x[binaries] = np.round(x[binaries])
        return np.clip(x, lo, hi)

    def outcome(status, values, obj, bound, nodes):
        val = None if obj is None else sign * (obj + const)
        bnd = None if bound is None else sign * (bound + const)
        return SolveOutcome(status, values, val, bnd, model.sense, time.perf_counter() - start, nodes)

    root = lp.solve(lo, hi)
    nodes = 1
    if root.status == "infeasible":
        return outcome(Status.INFEASIBLE, None, None, None, nodes)
    if root.status != "optimal":
        return outcome(Status.NO_INCUMBENT_AT_LIMIT, None, None, None, nodes)

    best_x: np.ndarray | None = None
    best_obj = math.inf

    def cutoff() -> float:
        if best_x is None:
            return math.inf
        return best_obj - limits.rel_gap * max(1.0, abs(best_obj + const))

    def offer(x: np.ndarray) -> bool:
        nonlocal best_x, best_obj
        if integral(x):
            cand = polish(x)
            val = float(c @ cand)
            if val < best_obj - 1e-12:
                best_x, best_obj = cand, val
            return True
        return False

    heap: list = []
    seq = 0
    if not offer(root.x):
        heap.append((node_bound(root.objective), 0, seq, _Node(lo, hi, root.basis, root.x, 0)))

    hit_limit = False
    while heap:
        bound, _, _, node = heap[0]
        if bound >= cutoff():
            heap.clear()
            break
        if time.perf_counter() >= deadline or (limits.node_limit is not None and nodes >= limits.node_limit):
            hit_limit = True
            break
        heapq.heappop(heap)
        frac = np.abs(node.x[binaries] - 0.5)
        fractional = np.abs(node.x[binaries] - np.round(node.x[binaries])) > tol
        score = np.where(fractional, np.round(frac, 9), np.inf)
        j = int(binaries[int(np.argmin(score))])
        tab = lp.factor(node.basis)
        for val in (0.0, 1.0):
            clo, chi = node.lo.copy(), node.hi.copy()
            clo[j] = chi[j] = val
            res = lp.solve(clo, chi, node.basis, None if tab is None else tab.copy())
            nodes += 1
            if res.status != "optimal":
                continue
            if offer(res.x):
                continue
            b = node_bound(res.objective)
            if b < cutoff():
                seq += 1
                heapq.heappush(heap, (b, -(node.depth + 1), seq, _Node(clo, chi, res.basis, res.x, node.depth + 1)))

    if hit_limit:
        open_bound = min(e[0] for e in heap)
        if best_x is None:
            return outcome(Status.NO_INCUMBENT_AT_LIMIT, None, None, open_bound, nodes)
        return outcome(Status.FEASIBLE_AT_LIMIT, best_x, best_obj, min(open_bound, best_obj), nodes)
    if best_x is None:
        return outcome(Status.INFEASIBLE, None, None, None, nodes)
    return outcome(Status.OPTIMAL, best_x, best_obj, best_obj, nodes)
