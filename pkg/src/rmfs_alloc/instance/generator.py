"""Seeded random instance generator.

The generator is parameterised by a :class:`GeneratorProfile`; nothing about
the distributions is hard-wired. Defaults give roughly half single-unit
orders and each product stocked on two racks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from rmfs_alloc.errors import ProfileError
from rmfs_alloc.instance.data import Instance, build_instance


@dataclass(frozen=True)
class GeneratorProfile:
    single_unit_share: float = 0.55
    max_lines: int = 4
    extra_line_prob: float = 0.5
    max_units_per_line: int = 3
    multi_unit_prob: float = 0.25
    scatter: int = 2
    slots_per_rack: int | None = None
    units_per_slot: tuple[int, int] = (1, 6)
    balanced: bool = True
    capacity_range: tuple[int, int] = (1, 10)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneratorProfile":
        doc = dict(doc)
        for key in ("units_per_slot", "capacity_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ProfileError(str(exc)) from exc

    def check(self, n_products: int, n_orders: int, n_racks: int, n_pickers: int) -> None:
        if min(n_products, n_orders, n_racks, n_pickers) < 1:
            raise ProfileError("all counts must be >= 1")
        for name in ("single_unit_share", "extra_line_prob", "multi_unit_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ProfileError(f"{name}={v} is not a probability")
        if self.max_lines < 1 or self.max_units_per_line < 1:
            raise ProfileError("max_lines and max_units_per_line must be >= 1")
        if self.single_unit_share < 1.0 and self.max_lines < 2 and self.max_units_per_line < 2:
            raise ProfileError("profile cannot produce multi-unit orders")
        if not 1 <= self.scatter <= n_racks:
            raise ProfileError(f"scatter={self.scatter} must lie in 1..{n_racks}")
        lo, hi = self.units_per_slot
        if not 1 <= lo <= hi:
            raise ProfileError(f"bad units_per_slot {self.units_per_slot}")
        if self.slots_per_rack is not None and n_products * self.scatter > n_racks * self.slots_per_rack:
            raise ProfileError(
                f"{n_products} products x scatter {self.scatter} exceed "
                f"{n_racks} racks x {self.slots_per_rack} slots"
            )
        if self.balanced and n_orders < n_pickers:
            raise ProfileError("balanced capacities need at least one order per picker")
        clo, chi = self.capacity_range
        if not self.balanced and not 1 <= clo <= chi:
            raise ProfileError(f"bad capacity_range {self.capacity_range}")


def _order_column(rng: np.random.Generator, n_products: int, prof: GeneratorProfile) -> np.ndarray:
    col = np.zeros(n_products, dtype=np.int64)
    if rng.random() < prof.single_unit_share:
        col[rng.integers(n_products)] = 1
        return col
    n_lines = 1
    while n_lines < min(prof.max_lines, n_products) and rng.random() < prof.extra_line_prob:
        n_lines += 1
    products = rng.choice(n_products, size=n_lines, replace=False)
    for i in products:
        qty = 1
        if prof.max_units_per_line > 1 and rng.random() < prof.multi_unit_prob:
            qty = int(rng.integers(2, prof.max_units_per_line + 1))
        col[i] = qty
    if col.sum() == 1:
        # a multi-unit order must not collapse into a single-unit one
        if n_products > 1 and prof.max_lines > 1:
            other = int(rng.choice(np.flatnonzero(col == 0)))
            col[other] = 1
        else:
            col[products[0]] = 2
    return col


def generate_instance(
    n_products: int,
    n_orders: int,
    n_racks: int,
    n_pickers: int,
    seed: int,
    profile: GeneratorProfile | None = None,
    *,
    name: str | None = None,
) -> Instance:
    """Draw a random instance; identical arguments give identical output.

    Every product is placed on ``profile.scatter`` distinct racks and stock is
    topped up so that each product's total stock covers its total demand.
    With ``profile.balanced`` total picker capacity equals the order count.
    """
    prof = profile or GeneratorProfile()
    prof.check(n_products, n_orders, n_racks, n_pickers)
    rng = np.random.default_rng(seed)

    demand = np.column_stack([_order_column(rng, n_products, prof) for _ in range(n_orders)])

    stock = np.zeros((n_products, n_racks), dtype=np.int64)
    load = np.zeros(n_racks, dtype=np.int64)
    lo, hi = prof.units_per_slot
    for i in rng.permutation(n_products):
        # least-loaded racks first keeps rack fill even; random key breaks ties
        order = np.lexsort((rng.random(n_racks), load))
        if prof.slots_per_rack is not None:
            order = order[load[order] < prof.slots_per_rack]
        if order.size < prof.scatter:
            raise ProfileError("ran out of rack slots while scattering products")
        for r in order[: prof.scatter]:
            stock[i, r] = rng.integers(lo, hi + 1)
            load[r] += 1

    shortfall = demand.sum(axis=1) - stock.sum(axis=1)
    for i in np.flatnonzero(shortfall > 0):
        r = int(np.flatnonzero(stock[i])[0])
        stock[i, r] += shortfall[i]

    if prof.balanced:
        base, extra = divmod(n_orders, n_pickers)
        capacity = np.full(n_pickers, base, dtype=np.int64)
        capacity[:extra] += 1
    else:
        clo, chi = prof.capacity_range
        capacity = rng.integers(clo, chi + 1, size=n_pickers)

    return build_instance(
        demand,
        stock,
        capacity,
        name=name or f"N{n_products}_O{n_orders}_R{n_racks}_P{n_pickers}_s{seed}",
        seed=seed,
    )
