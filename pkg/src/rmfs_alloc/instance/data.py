"""The order-and-rack allocation instance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rmfs_alloc.errors import InvariantError


def _frozen(a, dtype=np.int64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """Products, orders, racks and pickers of one allocation wave.

    ``demand[i, o]`` is the number of units of product ``i`` in order ``o``
    and ``stock[i, r]`` the units of product ``i`` held on rack ``r``.
    Pickers are stored in non-increasing capacity order; ``picker_ids[p]``
    gives the position picker ``p`` had in the source data, and
    ``order_ids[o]`` the source id of order ``o`` (differs from ``o`` only
    when unsatisfiable orders were dropped at load time).
    """

    demand: np.ndarray
    stock: np.ndarray
    capacity: np.ndarray
    name: str = "instance"
    picker_ids: tuple[int, ...] = ()
    order_ids: tuple[int, ...] = ()
    seed: int | None = None
    dropped_orders: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        demand = _frozen(self.demand)
        stock = _frozen(self.stock)
        capacity = _frozen(self.capacity)
        if demand.ndim != 2 or stock.ndim != 2 or capacity.ndim != 1:
            raise InvariantError("demand and stock must be 2-d, capacity 1-d")
        if demand.shape[0] != stock.shape[0]:
            raise InvariantError(
                f"demand has {demand.shape[0]} products but stock has {stock.shape[0]}"
            )
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "stock", stock)
        object.__setattr__(self, "capacity", capacity)
        if not self.picker_ids:
            object.__setattr__(self, "picker_ids", tuple(range(capacity.size)))
        if not self.order_ids:
            object.__setattr__(self, "order_ids", tuple(range(demand.shape[1])))
        self.check()

    @property
    def n_products(self) -> int:
        return int(self.demand.shape[0])

    @property
    def n_orders(self) -> int:
        return int(self.demand.shape[1])

    @property
    def n_racks(self) -> int:
        return int(self.stock.shape[1])

    @property
    def n_pickers(self) -> int:
        return int(self.capacity.size)

    def check(self) -> None:
        """Raise :class:`InvariantError` on the first broken invariant."""
        if (self.demand < 0).any():
            i, o = map(int, np.argwhere(self.demand < 0)[0])
            raise InvariantError(f"negative demand q[{i},{o}]", {"product": i, "order": o})
        if (self.stock < 0).any():
            i, r = map(int, np.argwhere(self.stock < 0)[0])
            raise InvariantError(f"negative stock s[{i},{r}]", {"product": i, "rack": r})
        if (self.capacity < 1).any():
            p = int(np.argmax(self.capacity < 1))
            raise InvariantError(f"picker {p} has capacity < 1", {"picker": p})
        if (np.diff(self.capacity) > 0).any():
            raise InvariantError("pickers must be sorted by non-increasing capacity")
        empty = np.flatnonzero(self.demand.sum(axis=0) == 0)
        if empty.size:
            raise InvariantError(f"order {int(empty[0])} is empty", {"order": int(empty[0])})
        bad = unsatisfiable_orders(self.demand, self.stock)
        if bad:
            o, i = bad[0]
            raise InvariantError(
                f"unsatisfiable order {o}: product {i} needs {int(self.demand[i, o])} "
                f"units, warehouse holds {int(self.stock[i].sum())}",
                {"order": o, "product": i},
            )

    def same_data(self, other: "Instance") -> bool:
        return (
            np.array_equal(self.demand, other.demand)
            and np.array_equal(self.stock, other.stock)
            and np.array_equal(self.capacity, other.capacity)
        )


def unsatisfiable_orders(demand: np.ndarray, stock: np.ndarray) -> list[tuple[int, int]]:
    """(order, product) pairs whose demand exceeds the whole warehouse stock."""
    total = stock.sum(axis=1)
    short = demand > total[:, None]
    return [(int(o), int(i)) for i, o in sorted(zip(*np.nonzero(short)), key=lambda t: (t[1], t[0]))]


def build_instance(
    demand,
    stock,
    capacity,
    *,
    name: str = "instance",
    seed: int | None = None,
    drop_unsatisfiable: bool = False,
) -> Instance:
    """Validate raw arrays, sort pickers by capacity and return an Instance.

    With ``drop_unsatisfiable`` empty and unsatisfiable orders are removed
    (their source ids land in ``Instance.dropped_orders``); otherwise they
    raise :class:`InvariantError`.
    """
    demand = np.asarray(demand, dtype=np.int64)
    stock = np.asarray(stock, dtype=np.int64)
    capacity = np.asarray(capacity, dtype=np.int64)
    if demand.ndim != 2 or stock.ndim != 2 or capacity.ndim != 1:
        raise InvariantError("demand and stock must be 2-d, capacity 1-d")
    if demand.shape[0] != stock.shape[0]:
        raise InvariantError("demand and stock disagree on the number of products")
    order_ids = list(range(demand.shape[1]))
    dropped: list[int] = []
    if drop_unsatisfiable and (demand >= 0).all() and (stock >= 0).all():
        bad = {o for o, _ in unsatisfiable_orders(demand, stock)}
        bad |= set(np.flatnonzero(demand.sum(axis=0) == 0).tolist())
        keep = [o for o in order_ids if o not in bad]
        dropped = sorted(bad)
        demand = demand[:, keep]
        order_ids = keep
    # stable sort keeps equal-capacity pickers in source order
    perm = np.argsort(-capacity, kind="stable")
    return Instance(
        demand=demand,
        stock=stock,
        capacity=capacity[perm],
        name=name,
        picker_ids=tuple(int(p) for p in perm),
        order_ids=tuple(order_ids),
        seed=seed,
        dropped_orders=tuple(dropped),
    )
