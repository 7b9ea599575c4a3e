"""Minimum rack counts per product (gamma) and per order (delta).

Both are min-cardinality covering problems. For a single product the
largest-first greedy prefix is optimal; for an order with several products we
search subsets by increasing size, falling back to the 0-1 model when the
candidate rack set is too large to enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from rmfs_alloc.errors import InfeasibleStockError, RmfsError


def greedy_cover_count(stocks, need: int) -> int | None:
    """Fewest items from ``stocks`` whose sum reaches ``need`` (None if impossible)."""
    if need <= 0:
        return 0
    acc = 0
    for k, s in enumerate(sorted(stocks, reverse=True), start=1):
        acc += s
        if acc >= need:
            return k
    return None


def enumerate_multi_cover(stock: np.ndarray, need: np.ndarray, start: int = 1) -> int | None:
    """Smallest k such that some k columns of ``stock`` cover ``need`` row-wise.

    ``stock`` is (products x racks). Subsets are scanned size by size from
    ``start``; returns None when even all columns fall short.
    """
    stock = np.minimum(stock, need[:, None])
    n = stock.shape[1]
    if (stock.sum(axis=1) < need).any():
        return None
    for k in range(max(start, 1), n + 1):
        for chunk in _combination_chunks(n, k):
            covered = (stock[:, chunk].sum(axis=2) >= need[:, None]).all(axis=0)
            if covered.any():
                return k
    return None


def _combination_chunks(n: int, k: int, chunk: int = 4096):
    it = combinations(range(n), k)
    while True:
        block = []
        for c in it:
            block.append(c)
            if len(block) == chunk:
                break
        if not block:
            return
        yield np.array(block, dtype=np.intp)
        if len(block) < chunk:
            return


@dataclass(frozen=True)
class BoundsSolver:
    """Strategy for computing gamma/delta.

    ``mode="exact_dp_and_enum"`` uses greedy (gamma) and subset enumeration
    (delta) with the MILP engine only for orders whose candidate rack set
    exceeds ``enumeration_cap``; ``mode="milp_backend"`` solves every delta
    with the MILP engine.
    """

    mode: str = "exact_dp_and_enum"
    enumeration_cap: int = 20
    backend: object = None

    def __post_init__(self) -> None:
        if self.enumeration_cap < 1:
            raise ValueError("enumeration_cap must be >= 1")
        if self.mode not in ("exact_dp_and_enum", "milp_backend"):
            raise ValueError(f"unknown bounds mode {self.mode!r}")

    def min_racks_for_product(self, i: int, inst, sets) -> int:
        need = int(inst.demand[i].sum())
        stocks = [int(inst.stock[i, r]) for r in sets.racks_of_product[i]]
        if stocks and max(stocks) >= need:
            return 1
        k = greedy_cover_count(stocks, need)
        if k is None:
            raise InfeasibleStockError([i])
        return k

    def all_gammas(self, inst, sets) -> dict[int, int]:
        gamma, short = {}, []
        for i in sets.active_products:
            try:
                gamma[i] = self.min_racks_for_product(i, inst, sets)
            except InfeasibleStockError:
                short.append(i)
        if short:
            raise InfeasibleStockError(short)
        return gamma

    def min_racks_for_order(self, o: int, inst, sets) -> int:
        prods = list(sets.products_of_order[o])
        need = inst.demand[prods, o]
        if int(need.sum()) == 1:
            return 1
        if sets.full_supply_racks[o]:
            return 1
        racks = list(sets.racks_of_order[o])
        sub = inst.stock[np.ix_(prods, racks)]
        lower = max(greedy_cover_count(sub[j], int(need[j])) or len(racks) + 1 for j in range(len(prods)))
        if self.mode == "exact_dp_and_enum" and len(racks) <= self.enumeration_cap:
            k = enumerate_multi_cover(sub, need, start=max(lower, 2))
        else:
            k = self._milp_order(sub, need)
        if k is None:
            raise RmfsError(f"order {o} cannot be covered by its racks (instance not pruned?)")
        return k

    def _milp_order(self, sub: np.ndarray, need: np.ndarray) -> int | None:
        from rmfs_alloc.milp import Limits, Model, Status, solve

        m = Model("delta")
        u = [m.add_var(f"u{r}") for r in range(sub.shape[1])]
        for j in range(sub.shape[0]):
            m.add_constraint({u[r]: float(sub[j, r]) for r in range(sub.shape[1]) if sub[j, r]}, ">=", float(need[j]))
        m.set_objective({v: 1.0 for v in u}, "min")
        out = solve(m, Limits(time_limit_s=60.0), backend=self.backend)
        if out.status is Status.INFEASIBLE or out.values is None:
            return None
        return int(round(out.objective))
