"""Allocation plans: what a stage decided, in plain index sets."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from rmfs_alloc.formulations import StageModel, Strategy
from rmfs_alloc.errors import ParseError

PLAN_VERSION = 1


@dataclass(frozen=True)
class AllocationPlan:
    """Binary decisions of one stage as sets of index tuples.

    ``x`` holds (order, picker) pairs, ``y`` (rack, picker) pairs, ``u`` the
    used racks, ``v`` the picked second-stage orders and ``z`` (order, rack)
    full-supply pairs. Picker indices follow the instance's capacity-sorted
    order; an index equal to ``n_real_pickers`` is the artificial picker.
    """

    stage: str
    strategy: Strategy
    F: tuple[int, ...]
    S: tuple[int, ...]
    capacities: tuple[int, ...]
    n_real_pickers: int
    x: frozenset[tuple[int, int]]
    y: frozenset[tuple[int, int]]
    u: frozenset[int]
    v: frozenset[int] = frozenset()
    z: frozenset[tuple[int, int]] = frozenset()
    theta: tuple[int, ...] | None = None

    @property
    def rack_set(self) -> tuple[int, ...]:
        """Racks chosen by the plan (Theta for a stage-one plan)."""
        return tuple(sorted(self.u))

    @property
    def npo(self) -> int:
        if self.stage == "first":
            return 0
        return sum(1 for o in self.S if o not in self.v)

    @property
    def artificial_orders(self) -> tuple[int, ...]:
        return tuple(sorted(o for o, p in self.x if p >= self.n_real_pickers))

    def order_picker(self) -> dict[int, int]:
        return {o: p for o, p in sorted(self.x)}

    def rack_picker(self) -> dict[int, int]:
        return {r: p for r, p in sorted(self.y)}

    def to_dict(self, inst=None) -> dict:
        doc = {
            "version": PLAN_VERSION,
            "stage": self.stage,
            "strategy": self.strategy.value,
            "F": list(self.F),
            "S": list(self.S),
            "capacities": list(self.capacities),
            "n_real_pickers": self.n_real_pickers,
            "theta": None if self.theta is None else list(self.theta),
            "x": sorted([list(t) for t in self.x]),
            "y": sorted([list(t) for t in self.y]),
            "u": sorted(self.u),
            "v": sorted(self.v),
            "z": sorted([list(t) for t in self.z]),
            "npo": self.npo,
        }
        if inst is not None:
            doc["picker_ids"] = list(inst.picker_ids)
            doc["order_ids"] = list(inst.order_ids)
        return doc

    def to_json(self, inst=None) -> str:
        return json.dumps(self.to_dict(inst), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "AllocationPlan":
        try:
            return cls(
                stage=doc["stage"],
                strategy=Strategy.parse(doc["strategy"]),
                F=tuple(doc["F"]),
                S=tuple(doc["S"]),
                capacities=tuple(doc["capacities"]),
                n_real_pickers=int(doc["n_real_pickers"]),
                x=frozenset(tuple(t) for t in doc["x"]),
                y=frozenset(tuple(t) for t in doc["y"]),
                u=frozenset(doc["u"]),
                v=frozenset(doc.get("v", [])),
                z=frozenset(tuple(t) for t in doc.get("z", [])),
                theta=None if doc.get("theta") is None else tuple(doc["theta"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed plan: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "AllocationPlan":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid plan JSON: {exc}") from exc


def _on(values: np.ndarray, var: int) -> bool:
    return values[var] > 0.5


def extract_plan(sm: StageModel, values: np.ndarray) -> AllocationPlan:
    """Read a (rounded) solution vector back into an AllocationPlan."""
    x = frozenset(k for k, var in sm.x.items() if _on(values, var))
    y = frozenset(k for k, var in sm.y.items() if _on(values, var))
    z = frozenset(k for k, var in sm.z.items() if _on(values, var))
    if sm.stage == "first":
        u = frozenset(r for r, var in sm.u.items() if _on(values, var))
        v: frozenset[int] = frozenset()
    else:
        u = frozenset(r for r, _ in y)
        v = frozenset(o for o, var in sm.v.items() if _on(values, var))
    return AllocationPlan(
        stage=sm.stage,
        strategy=sm.strategy,
        F=sm.F,
        S=sm.S,
        capacities=sm.capacities,
        n_real_pickers=sm.n_real_pickers,
        x=x,
        y=y,
        u=u,
        v=v,
        z=z,
        theta=sm.theta,
    )


def normalize_idle_racks(plan: AllocationPlan, inst) -> AllocationPlan:
    """Move stage-one racks that serve nobody to the lowest-index picker.

    A rack is idle when its picker keeps enough stock for its own orders and
    at least one rack without it, and no order is pinned to it via ``z``.
    Racks are visited in ascending index, so the result is deterministic.
    """
    if plan.stage != "first":
        return plan
    q, s = inst.demand, inst.stock
    where = plan.rack_picker()
    pinned = {r for _, r in plan.z}
    by_picker: dict[int, list[int]] = {}
    for o, p in plan.order_picker().items():
        by_picker.setdefault(p, []).append(o)
    for r in sorted(where):
        p = where[r]
        if p == 0 or r in pinned:
            continue
        mine = [k for k, pk in where.items() if pk == p and k != r]
        if not mine:
            continue
        need = q[:, by_picker.get(p, [])].sum(axis=1)
        have = s[:, mine].sum(axis=1)
        if (have >= need).all():
            where[r] = 0
    y = frozenset(where.items())
    return AllocationPlan(**{**plan.__dict__, "y": y})
