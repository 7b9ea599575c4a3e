"""Index sets and rack-count bounds derived from an instance."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from rmfs_alloc.instance.data import Instance


@dataclass(frozen=True)
class DerivedSets:
    """Active products, single-unit orders and rack sets of an instance.

    ``gamma[i]`` / ``delta[o]`` are the minimum rack counts covering product
    ``i``'s total demand / order ``o``'s demand. ``useful_racks`` are racks
    holding at least one unit of an active product; every other rack is
    irrelevant to every order.
    """

    active_products: tuple[int, ...]
    single_unit_orders: frozenset[int]
    racks_of_product: Mapping[int, tuple[int, ...]]
    racks_of_order: tuple[tuple[int, ...], ...]
    full_supply_racks: tuple[tuple[int, ...], ...]
    products_of_order: tuple[tuple[int, ...], ...]
    total_demand: Mapping[int, int]
    useful_racks: tuple[int, ...]
    gamma: Mapping[int, int] = field(default_factory=dict)
    delta: tuple[int, ...] = ()


def base_sets(inst: Instance) -> DerivedSets:
    """Everything except gamma/delta; cheap, no search."""
    q, s = inst.demand, inst.stock
    totals = q.sum(axis=1)
    active = tuple(int(i) for i in np.flatnonzero(totals >= 1))
    order_size = q[list(active)].sum(axis=0) if active else np.zeros(inst.n_orders)
    single = frozenset(int(o) for o in np.flatnonzero(order_size == 1))
    gamma_sets = {i: tuple(int(r) for r in np.flatnonzero(s[i] >= 1)) for i in active}
    prods, deltas, omegas = [], [], []
    for o in range(inst.n_orders):
        po = tuple(int(i) for i in np.flatnonzero(q[:, o] >= 1))
        prods.append(po)
        deltas.append(tuple(sorted({r for i in po for r in gamma_sets[i]})))
        need = q[list(po), o][:, None]
        full = (s[list(po)] >= need).all(axis=0)
        omegas.append(tuple(int(r) for r in np.flatnonzero(full)))
    useful = tuple(sorted({r for rs in gamma_sets.values() for r in rs}))
    return DerivedSets(
        active_products=active,
        single_unit_orders=single,
        racks_of_product=MappingProxyType(gamma_sets),
        racks_of_order=tuple(deltas),
        full_supply_racks=tuple(omegas),
        products_of_order=tuple(prods),
        total_demand=MappingProxyType({i: int(totals[i]) for i in active}),
        useful_racks=useful,
    )


def derive_sets(inst: Instance, bounds=None) -> DerivedSets:
    """Compute all derived sets, delegating gamma/delta to ``bounds``.

    ``bounds`` defaults to an exact :class:`~rmfs_alloc.bounds.BoundsSolver`.
    Raises :class:`~rmfs_alloc.errors.InfeasibleStockError` when some
    product's total stock is below its total demand.
    """
    from rmfs_alloc.bounds import BoundsSolver

    bounds = bounds or BoundsSolver()
    base = base_sets(inst)
    gamma = bounds.all_gammas(inst, base)
    delta = tuple(bounds.min_racks_for_order(o, inst, base) for o in range(inst.n_orders))
    return DerivedSets(**{**base.__dict__, "gamma": MappingProxyType(gamma), "delta": delta})
