"""First- and second-stage 0-1 models for order and rack allocation.

Variable naming inside the built models::

    x[o,p]  order o allocated to picker p
    y[r,p]  rack r allocated to picker p
    u[r]    rack r used (stage one)
    v[o]    second-stage order o picked
    z[o,r]  Strategy 3: order o fully supplied by rack r

Racks holding none of the ordered products get no variables at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from rmfs_alloc.errors import CapacityShortfall, EmptyTheta
from rmfs_alloc.instance import DerivedSets, Instance
from rmfs_alloc.milp import Model


class Strategy(str, Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"

    @classmethod
    def parse(cls, text: "str | Strategy") -> "Strategy":
        if isinstance(text, Strategy):
            return text
        key = str(text).strip().upper()
        if not key.startswith("S"):
            key = "S" + key
        return cls(key)


@dataclass(frozen=True)
class FormulationOptions:
    """Which optional constraint blocks to generate.

    ``use_gamma``/``use_delta`` are the per-product and per-order rack-count
    cuts; the other three flags are the valid inequalities linking orders to
    racks, bounding picker load from below, and tying orders to racks that
    uniquely stock one of their products. ``rack_penalty`` is
    ``(kept_racks, weight)``: using any rack outside ``kept_racks`` adds
    ``weight`` to the stage-one objective (``None`` weight means ``M/2``).
    """

    use_gamma: bool = True
    use_delta: bool = True
    use_order_rack_links: bool = True
    use_picker_lb: bool = True
    use_unique_rack_links: bool = True
    rack_penalty: tuple[frozenset[int], float | None] | None = None
    allow_artificial_picker: bool = True

    def without_extras(self) -> "FormulationOptions":
        return replace(
            self,
            use_gamma=False,
            use_delta=False,
            use_order_rack_links=False,
            use_picker_lb=False,
            use_unique_rack_links=False,
        )


@dataclass
class StageModel:
    """A built model plus the maps from allocation variables to ids."""

    model: Model
    stage: str
    strategy: Strategy
    F: tuple[int, ...]
    S: tuple[int, ...]
    capacities: tuple[int, ...]
    n_real_pickers: int
    racks: tuple[int, ...]
    theta: tuple[int, ...] | None = None
    big_m: float = 0.0
    x: dict[tuple[int, int], int] = field(default_factory=dict)
    y: dict[tuple[int, int], int] = field(default_factory=dict)
    u: dict[int, int] = field(default_factory=dict)
    v: dict[int, int] = field(default_factory=dict)
    z: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def n_pickers(self) -> int:
        return len(self.capacities)

    @property
    def orders(self) -> tuple[int, ...]:
        return self.F if self.stage == "first" else tuple(sorted(self.F + self.S))

    def picker_vars(self, p: int) -> list[int]:
        xs = [self.x[o, p] for o in self.orders if (o, p) in self.x]
        ys = [self.y[r, p] for r in self.racks if (r, p) in self.y]
        return xs + ys


def partition_orders(strategy: Strategy | str, sets: DerivedSets, n_orders: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split orders into (F, S) according to the strategy."""
    strategy = Strategy.parse(strategy)
    everything = range(n_orders)
    if strategy is Strategy.S1:
        second: set[int] = set()
    elif strategy is Strategy.S2:
        second = set(sets.single_unit_orders)
    else:
        second = {o for o in everything if sets.delta[o] != 1}
    first = tuple(o for o in everything if o not in second)
    return first, tuple(sorted(second))


def big_m(inst: Instance, sets: DerivedSets) -> float:
    """One above the summed per-product scaled rack stock."""
    total = 0.0
    for i in sets.active_products:
        total += inst.stock[i].sum() / sets.total_demand[i]
    return 1.0 + float(total)


def picker_capacities(inst: Instance, n_first: int, allow_artificial: bool) -> tuple[int, ...]:
    caps = tuple(int(c) for c in inst.capacity)
    short = n_first - sum(caps)
    if short <= 0:
        return caps
    if not allow_artificial:
        raise CapacityShortfall(f"pickers hold {sum(caps)} orders but {n_first} must be allocated")
    return caps + (short,)


def build_first_stage(
    inst: Instance,
    sets: DerivedSets,
    strategy: Strategy | str,
    options: FormulationOptions | None = None,
) -> StageModel:
    strategy = Strategy.parse(strategy)
    opts = options or FormulationOptions()
    F, S = partition_orders(strategy, sets, inst.n_orders)
    caps = picker_capacities(inst, len(F), opts.allow_artificial_picker)
    P = len(caps)
    racks = sets.useful_racks
    q, s = inst.demand, inst.stock
    m = Model(f"{inst.name}-stage1-{strategy.value}")
    sm = StageModel(m, "first", strategy, F, S, caps, inst.n_pickers, racks, big_m=big_m(inst, sets))

    for o in F:
        for p in range(P):
            sm.x[o, p] = m.add_var(f"x_{o}_{p}")
    for r in racks:
        sm.u[r] = m.add_var(f"u_{r}")
    for r in racks:
        for p in range(P):
            sm.y[r, p] = m.add_var(f"y_{r}_{p}")
    multi_f = [o for o in F if o not in sets.single_unit_orders]
    if strategy is Strategy.S3:
        for o in multi_f:
            for r in sets.full_supply_racks[o]:
                sm.z[o, r] = m.add_var(f"z_{o}_{r}")

    # objective: rack count, then (S2/S3) prefer racks carrying more stock
    cost = {}
    for r in racks:
        w = 1.0
        if strategy is not Strategy.S1:
            w = sm.big_m - sum(s[i, r] / sets.total_demand[i] for i in sets.active_products)
        cost[sm.u[r]] = w
    if opts.rack_penalty is not None:
        kept, weight = opts.rack_penalty
        weight = sm.big_m / 2 if weight is None else float(weight)
        for r in racks:
            if r not in kept:
                cost[sm.u[r]] += weight
    m.set_objective(cost, "min")

    for p in range(P):
        if F:
            m.add_constraint({sm.x[o, p]: 1 for o in F}, "<=", caps[p], f"cap_{p}")
    for o in F:
        m.add_constraint({sm.x[o, p]: 1 for p in range(P)}, "=", 1, f"assign_{o}")
    for r in racks:
        coeffs = {sm.y[r, p]: 1 for p in range(P)}
        coeffs[sm.u[r]] = -1
        m.add_constraint(coeffs, "=", 0, f"rack_{r}")
    for i in sets.active_products:
        if q[i, list(F)].sum() < 1:
            continue
        for p in range(P):
            coeffs = {sm.y[r, p]: float(s[i, r]) for r in sets.racks_of_product[i]}
            for o in F:
                if q[i, o]:
                    coeffs[sm.x[o, p]] = -float(q[i, o])
            m.add_constraint(coeffs, ">=", 0, f"supply_{i}_{p}")
    for i in sets.active_products:
        m.add_constraint({sm.u[r]: float(s[i, r]) for r in sets.racks_of_product[i]}, ">=",
                         sets.total_demand[i], f"stock_{i}")
    for p in range(P):
        m.add_constraint({sm.y[r, p]: 1 for r in racks}, ">=", 1, f"picker_rack_{p}")
    if opts.use_gamma:
        for i in sets.active_products:
            m.add_constraint({sm.u[r]: 1 for r in sets.racks_of_product[i]}, ">=", sets.gamma[i], f"gamma_{i}")
    if strategy is Strategy.S3:
        _add_single_rack_blocks(sm, inst, sets, multi_f, racks, stage="first")
    elif opts.use_delta:
        for o in F:
            m.add_constraint({sm.u[r]: 1 for r in sets.racks_of_order[o]}, ">=", sets.delta[o], f"delta_{o}")

    add_extra_constraints(sm, inst, sets, opts)
    return sm


def _add_single_rack_blocks(sm: StageModel, inst: Instance, sets: DerivedSets, orders, racks, stage: str) -> None:
    m, q, s = sm.model, inst.demand, inst.stock
    allowed = set(racks)
    P = sm.n_pickers
    for o in orders:
        m.add_constraint({sm.z[o, r]: 1 for r in sets.full_supply_racks[o] if r in allowed}, "=", 1, f"single_{o}")
    for r in racks:
        users = [o for o in orders if (o, r) in sm.z]
        if not users:
            continue
        for i in sets.active_products:
            coeffs = {sm.z[o, r]: float(q[i, o]) for o in users if q[i, o]}
            if not coeffs:
                continue
            if stage == "first":
                coeffs[sm.u[r]] = -float(s[i, r])
                m.add_constraint(coeffs, "<=", 0, f"zstock_{i}_{r}")
            else:
                m.add_constraint(coeffs, "<=", float(s[i, r]), f"zstock_{i}_{r}")
    for (o, r), zv in sm.z.items():
        for p in range(P):
            # z=1 forces x[o,p] = y[r,p]
            m.add_constraint({sm.x[o, p]: 1, sm.y[r, p]: -1, zv: -1}, ">=", -1, f"zlink_lo_{o}_{r}_{p}")
            m.add_constraint({sm.x[o, p]: 1, sm.y[r, p]: -1, zv: 1}, "<=", 1, f"zlink_hi_{o}_{r}_{p}")
    if stage == "first":
        for o in orders:
            m.add_constraint({sm.u[r]: 1 for r in sets.full_supply_racks[o]}, ">=", 1, f"omega_{o}")


def build_second_stage(
    inst: Instance,
    sets: DerivedSets,
    strategy: Strategy | str,
    F,
    S,
    theta,
    options: FormulationOptions | None = None,
    capacities: tuple[int, ...] | None = None,
) -> StageModel:
    """Maximise picked second-stage orders using only the racks in ``theta``."""
    strategy = Strategy.parse(strategy)
    opts = options or FormulationOptions()
    theta = tuple(sorted(theta))
    if not theta:
        raise EmptyTheta("stage two needs at least one rack from stage one")
    F, S = tuple(F), tuple(S)
    caps = capacities or picker_capacities(inst, len(F), opts.allow_artificial_picker)
    P = len(caps)
    q, s = inst.demand, inst.stock
    orders = tuple(sorted(F + S))
    m = Model(f"{inst.name}-stage2-{strategy.value}")
    sm = StageModel(m, "second", strategy, F, S, caps, inst.n_pickers, theta, theta=theta)

    for o in orders:
        for p in range(P):
            sm.x[o, p] = m.add_var(f"x_{o}_{p}")
    for r in theta:
        for p in range(P):
            sm.y[r, p] = m.add_var(f"y_{r}_{p}")
    for o in S:
        sm.v[o] = m.add_var(f"v_{o}")
    multi_f = [o for o in F if o not in sets.single_unit_orders]
    in_theta = set(theta)
    if strategy is Strategy.S3:
        for o in multi_f:
            for r in sets.full_supply_racks[o]:
                if r in in_theta:
                    sm.z[o, r] = m.add_var(f"z_{o}_{r}")

    m.set_objective({sm.v[o]: 1.0 for o in S}, "max")
    for p in range(P):
        m.add_constraint({sm.x[o, p]: 1 for o in orders}, "<=", caps[p], f"cap_{p}")
    for o in F:
        m.add_constraint({sm.x[o, p]: 1 for p in range(P)}, "=", 1, f"assign_{o}")
    for o in S:
        coeffs = {sm.x[o, p]: 1 for p in range(P)}
        coeffs[sm.v[o]] = -1
        m.add_constraint(coeffs, "=", 0, f"pick_{o}")
    for r in theta:
        m.add_constraint({sm.y[r, p]: 1 for p in range(P)}, "=", 1, f"rack_{r}")
    for i in sets.active_products:
        for p in range(P):
            coeffs = {sm.y[r, p]: float(s[i, r]) for r in theta if s[i, r]}
            for o in orders:
                if q[i, o]:
                    coeffs[sm.x[o, p]] = -float(q[i, o])
            m.add_constraint(coeffs, ">=", 0, f"supply_{i}_{p}")
    if strategy is Strategy.S3:
        _add_single_rack_blocks(sm, inst, sets, multi_f, theta, stage="second")

    add_extra_constraints(sm, inst, sets, opts)
    return sm


def add_extra_constraints(sm: StageModel, inst: Instance, sets: DerivedSets, options: FormulationOptions) -> StageModel:
    """Append the optional valid inequalities selected in ``options``.

    Stage one restricts them to F orders; stage two covers every order and
    only racks in theta. The blocks cut fractional points but never integer
    solutions.
    """
    m, q, s = sm.model, inst.demand, inst.stock
    P = sm.n_pickers
    first = sm.stage == "first"
    orders = sm.F if first else sm.orders
    pool = set(sm.racks)

    if options.use_order_rack_links:
        for o in orders:
            delta_racks = [r for r in sets.racks_of_order[o] if r in pool]
            for p in range(P):
                coeffs = {sm.y[r, p]: 1 for r in delta_racks}
                coeffs[sm.x[o, p]] = -float(sets.delta[o])
                m.add_constraint(coeffs, ">=", 0, f"ord_racks_{o}_{p}")
                for i in sets.products_of_order[o]:
                    coeffs = {sm.y[r, p]: float(s[i, r]) for r in delta_racks if s[i, r]}
                    coeffs[sm.x[o, p]] = -float(q[i, o])
                    m.add_constraint(coeffs, ">=", 0, f"ord_stock_{o}_{i}_{p}")

    if options.use_picker_lb and sm.F:
        caps = sm.capacities
        total = sum(caps)
        for p in range(P):
            need = len(sm.F) - (total - caps[p])
            if need >= 1:
                m.add_constraint({sm.x[o, p]: 1 for o in sm.F}, ">=", need, f"picker_lb_{p}")

    if options.use_unique_rack_links:
        for o in orders:
            solos = set()
            for i in sets.products_of_order[o]:
                holders = [r for r in sets.racks_of_product[i] if r in pool]
                if len(holders) == 1:
                    solos.add(holders[0])
            for r in sorted(solos):
                for p in range(P):
                    if o in sm.v:
                        # only binding when the order is picked
                        vo = sm.v[o]
                        m.add_constraint({sm.x[o, p]: 1, sm.y[r, p]: -1, vo: -1}, ">=", -1, f"solo_lo_{o}_{r}_{p}")
                        m.add_constraint({sm.x[o, p]: 1, sm.y[r, p]: -1, vo: 1}, "<=", 1, f"solo_hi_{o}_{r}_{p}")
                    else:
                        m.add_constraint({sm.x[o, p]: 1, sm.y[r, p]: -1}, "=", 0, f"solo_{o}_{r}_{p}")
    return sm


def rack_usage_weights(inst: Instance, sets: DerivedSets) -> np.ndarray:
    """Per-rack scaled stock term of the stage-one objective (for reporting)."""
    w = np.zeros(inst.n_racks)
    for i in sets.active_products:
        w += inst.stock[i] / sets.total_demand[i]
    return w
