"""Independent plan checker.

Re-evaluates the allocation rules straight from the instance arrays. It
deliberately shares nothing with the model builders: sets such as
"single-unit orders" or "racks able to supply an order alone" are recomputed
here from scratch.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from rmfs_alloc.formulations import Strategy


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: tuple
    detail: str = ""


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, indices: tuple, detail: str = "") -> None:
        self.violations.append(Violation(kind, indices, detail))


def validate(plan, inst, strategy=None, F=None, S=None, theta=None) -> ValidationResult:
    """Check ``plan`` against the instance; violations are returned, not raised."""
    strategy = Strategy.parse(strategy or plan.strategy)
    F = tuple(plan.F if F is None else F)
    S = tuple(plan.S if S is None else S)
    theta = plan.theta if theta is None else tuple(theta)
    q = np.asarray(inst.demand)
    s = np.asarray(inst.stock)
    caps = list(plan.capacities)
    n_pickers = len(caps)
    out = ValidationResult()

    real = [int(c) for c in inst.capacity]
    if caps[: len(real)] != real or len(caps) > len(real) + 1:
        out.add("capacities", tuple(caps), "plan capacities disagree with the instance")

    for o, p in plan.x:
        if not 0 <= p < n_pickers or not 0 <= o < inst.n_orders:
            out.add("index", (o, p), "order/picker out of range")
    for r, p in plan.y:
        if not 0 <= p < n_pickers or not 0 <= r < inst.n_racks:
            out.add("index", (r, p), "rack/picker out of range")
    if not out.ok:
        return out

    order_count = Counter(o for o, _ in plan.x)
    rack_count = Counter(r for r, _ in plan.y)
    order_at = {o: p for o, p in plan.x}
    rack_at = {r: p for r, p in plan.y}

    first = plan.stage == "first"
    considered = set(F) if first else set(F) | set(S)
    for o in sorted(order_count):
        if o not in considered:
            out.add("stray_order", (o,), "order not handled in this stage")
        elif order_count[o] > 1:
            out.add("order_multi", (o,), f"order allocated {order_count[o]} times")
    for o in F:
        if order_count[o] == 0:
            out.add("order_unassigned", (o,), "first-stage order not allocated")
    if not first:
        for o in S:
            picked = o in plan.v
            if picked != (order_count[o] >= 1):
                out.add("pick_flag", (o,), "pick flag disagrees with allocation")
        for o in plan.v:
            if o not in S:
                out.add("pick_flag", (o,), "pick flag set on a non-second-stage order")

    for r in sorted(rack_count):
        if rack_count[r] > 1:
            out.add("rack_multi", (r,), f"rack allocated to {rack_count[r]} pickers")
    used = set(plan.u)
    if set(rack_count) != used:
        for r in sorted(set(rack_count) ^ used):
            out.add("rack_usage", (r,), "rack usage flag disagrees with rack allocation")

    load = Counter(order_at.values())
    for p in range(n_pickers):
        if load[p] > caps[p]:
            out.add("capacity", (p,), f"{load[p]} orders > capacity {caps[p]}")

    need = np.zeros((q.shape[0], n_pickers), dtype=np.int64)
    have = np.zeros_like(need)
    for o, p in order_at.items():
        need[:, p] += q[:, o]
    for r, p in rack_at.items():
        have[:, p] += s[:, r]
    short = np.argwhere(have < need)
    for i, p in short:
        out.add("supply", (int(i), int(p)), f"picker has {have[i, p]} of product {i}, needs {need[i, p]}")

    demanded = q.sum(axis=1)
    if first:
        chosen = s[:, sorted(used)].sum(axis=1) if used else np.zeros(q.shape[0], dtype=np.int64)
        for i in np.flatnonzero(chosen < demanded):
            out.add("global_stock", (int(i),), f"chosen racks hold {chosen[i]} < {demanded[i]}")
        for p in range(n_pickers):
            if not any(pp == p for pp in rack_at.values()):
                out.add("picker_no_rack", (p,), "picker has no rack")
        relevant = (s[demanded >= 1] >= 1).any(axis=0)
        for r in sorted(used):
            if not relevant[r]:
                out.add("irrelevant_rack", (r,), "rack holds none of the ordered products")
    else:
        pool = set(theta or ())
        for r in sorted(used - pool):
            out.add("outside_theta", (r,), "rack not chosen at stage one")
        for r in sorted(pool - used):
            out.add("theta_unallocated", (r,), "stage-one rack left without a picker")

    if strategy is Strategy.S3:
        _check_single_rack(plan, q, s, F, order_at, rack_at, used, out)
    elif plan.z:
        out.add("stray_z", tuple(sorted(plan.z))[:1], "full-supply pairs outside Strategy 3")
    return out


def _check_single_rack(plan, q, s, F, order_at, rack_at, used, out: ValidationResult) -> None:
    size = q.sum(axis=0)
    multi = [o for o in F if size[o] != 1]
    z_by_order: dict[int, list[int]] = {}
    for o, r in plan.z:
        z_by_order.setdefault(o, []).append(r)
    load = np.zeros_like(s)
    for o in multi:
        racks = z_by_order.get(o, [])
        if len(racks) != 1:
            out.add("single_rack_count", (o,), f"order supplied by {len(racks)} designated racks")
            continue
        r = racks[0]
        if (q[:, o] > s[:, r]).any():
            out.add("single_rack_cover", (o, r), "rack cannot supply the whole order")
        if r not in used:
            out.add("single_rack_unused", (o, r), "designated rack not in use")
        if rack_at.get(r) != order_at.get(o):
            out.add("single_rack_colocation", (o, r), "order and its rack at different pickers")
        load[:, r] += q[:, o]
    for o in z_by_order:
        if o not in multi:
            out.add("stray_z", (o,), "full-supply pair for an order that needs none")
    for i, r in np.argwhere(load > s):
        out.add("single_rack_stock", (int(i), int(r)), f"rack {r} over-committed on product {i}")
