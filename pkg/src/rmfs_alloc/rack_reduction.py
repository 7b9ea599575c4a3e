"""Greedy pre-selection of a small rack set before stage one.

The selected set only steers the stage-one objective (racks outside it are
penalised); it never forbids a rack outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from rmfs_alloc.errors import InfeasibleStockError
from rmfs_alloc.formulations import Strategy
from rmfs_alloc.instance import DerivedSets, Instance


def rack_score(r: int, inst: Instance, sets: DerivedSets | None = None) -> Fraction:
    """Sum over orders of the fraction of each order rack ``r`` could supply."""
    q, s = inst.demand, inst.stock
    total = Fraction(0)
    for o in range(inst.n_orders):
        col = q[:, o]
        need = int(col.sum())
        if need == 0:
            continue
        got = int(np.minimum(s[:, r], col)[col >= 1].sum())
        if got:
            total += Fraction(got, need)
    return total


@dataclass
class ReductionState:
    candidates: tuple[int, ...]
    scores: dict[int, Fraction]
    sequence: list[int]
    inventory: np.ndarray
    capacity: list[int]
    selected: list[int] = field(default_factory=list)
    assigned: dict[int, int] = field(default_factory=dict)

    def by_score(self) -> list[int]:
        return sorted(self.candidates, key=lambda r: (-self.scores[r], r))


def order_sequence(inst: Instance, F, candidates) -> list[int]:
    """F orders first, then the rest; each block by descending stock share."""
    q = inst.demand
    avail = inst.stock[:, list(candidates)].sum(axis=1)

    def share(o: int) -> Fraction:
        return sum(
            (Fraction(int(q[i, o]), int(avail[i])) for i in np.flatnonzero(q[:, o]) if avail[i] > 0),
            Fraction(0),
        )

    first = set(F)
    head = sorted((o for o in range(inst.n_orders) if o in first), key=lambda o: (-share(o), o))
    tail = sorted((o for o in range(inst.n_orders) if o not in first), key=lambda o: (-share(o), o))
    return head + tail


def initial_state(inst: Instance, F) -> ReductionState:
    cands = tuple(range(inst.n_racks))
    return ReductionState(
        candidates=cands,
        scores={r: rack_score(r, inst) for r in cands},
        sequence=order_sequence(inst, F, cands),
        inventory=np.zeros((inst.n_products, inst.n_pickers), dtype=np.int64),
        capacity=[int(c) for c in inst.capacity],
    )


def sweep(state: ReductionState, inst: Instance) -> ReductionState:
    """Step (a): hand out racks by score and pack fully coverable orders."""
    q, s = inst.demand, inst.stock
    chosen = set(state.selected)
    for r in state.by_score():
        p = max(range(len(state.capacity)), key=lambda k: (state.capacity[k], -k))
        state.inventory[:, p] += s[:, r]
        helped = False
        for o in list(state.sequence):
            if state.capacity[p] < 1:
                break
            if (q[:, o] <= state.inventory[:, p]).all():
                state.capacity[p] -= 1
                state.inventory[:, p] -= q[:, o]
                state.sequence.remove(o)
                state.assigned[o] = p
                helped = True
        if helped:
            if r not in chosen:
                chosen.add(r)
                state.selected.append(r)
        else:
            state.inventory[:, p] -= s[:, r]
    return state


def top_up_stock(state: ReductionState, inst: Instance) -> ReductionState:
    """Step (b): add racks until every product's total demand is on hand."""
    q, s = inst.demand, inst.stock
    demand = q.sum(axis=1)
    chosen = set(state.selected)
    ranked = state.by_score()
    short = []
    for i in range(inst.n_products):
        have = int(s[i, sorted(chosen)].sum()) if chosen else 0
        for r in ranked:
            if have >= demand[i]:
                break
            if r not in chosen and s[i, r] >= 1:
                chosen.add(r)
                state.selected.append(r)
                have += int(s[i, r])
        if have < demand[i]:
            short.append(i)
    if short:
        raise InfeasibleStockError(short)
    return state


def top_up_single_rack(state: ReductionState, sets: DerivedSets, F) -> ReductionState:
    """Step (c), Strategy 3: each multi-unit F order needs one full-supply rack."""
    chosen = set(state.selected)
    for o in F:
        if o in sets.single_unit_orders:
            continue
        omega = sets.full_supply_racks[o]
        if not omega or chosen.intersection(omega):
            continue
        best = min(omega, key=lambda r: (-state.scores[r], r))
        chosen.add(best)
        state.selected.append(best)
    return state


def reduce_racks(inst: Instance, sets: DerivedSets, F, strategy: Strategy | str) -> tuple[int, ...]:
    """Selected rack set, sorted by index."""
    strategy = Strategy.parse(strategy)
    state = sweep(initial_state(inst, F), inst)
    top_up_stock(state, inst)
    if strategy is Strategy.S3:
        top_up_single_rack(state, sets, F)
    return tuple(sorted(state.selected))
