"""Brute-force reference solutions for tiny instances.

Everything here works from the raw demand/stock arrays and never touches the
package's model builders, so agreement with them is meaningful.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass
class Semantics:
    q: np.ndarray
    s: np.ndarray
    F: list[int]
    S: list[int]
    caps: list[int]
    single_rack: bool

    @property
    def P(self) -> int:
        return len(self.caps)


def partition(q: np.ndarray, s: np.ndarray, strategy: str) -> tuple[list[int], list[int]]:
    size = q.sum(axis=0)
    orders = range(q.shape[1])
    if strategy == "S1":
        later = set()
    elif strategy == "S2":
        later = {o for o in orders if size[o] == 1}
    else:
        later = {o for o in orders if size[o] != 1 and not _omega(q, s, o)}
    return [o for o in orders if o not in later], sorted(later)


def _omega(q, s, o) -> list[int]:
    need = q[:, o][:, None]
    return [int(r) for r in np.flatnonzero((s >= need).all(axis=0))]


def semantics(inst, strategy: str) -> Semantics:
    q, s = np.asarray(inst.demand), np.asarray(inst.stock)
    F, S = partition(q, s, strategy)
    caps = [int(c) for c in inst.capacity]
    if len(F) > sum(caps):
        caps.append(len(F) - sum(caps))
    return Semantics(q, s, F, S, caps, strategy == "S3")


def _assign(sem: Semantics, racks_at: list[list[int]], mandatory, optional, need_z, zstock):
    """Max number of optional orders placeable with all mandatory ones (or None)."""
    q, s, P = sem.q, sem.s, sem.P
    have = [s[:, rs].sum(axis=1) if rs else np.zeros(q.shape[0], dtype=np.int64) for rs in racks_at]
    left = [h.copy() for h in have]
    room = list(sem.caps)
    rack_picker = {r: p for p, rs in enumerate(racks_at) for r in rs}
    z_left = {r: zstock[r].copy() for r in rack_picker}
    best = [-1]

    def place_mandatory(k: int):
        if k == len(mandatory):
            place_optional(0, 0)
            return
        o = mandatory[k]
        for p in range(P):
            if room[p] < 1 or (q[:, o] > left[p]).any():
                continue
            room[p] -= 1
            left[p] -= q[:, o]
            if o in need_z:
                for r in need_z[o]:
                    if rack_picker.get(r) == p and (q[:, o] <= z_left[r]).all():
                        z_left[r] -= q[:, o]
                        place_mandatory(k + 1)
                        z_left[r] += q[:, o]
            else:
                place_mandatory(k + 1)
            room[p] += 1
            left[p] += q[:, o]

    def place_optional(k: int, picked: int):
        if picked + (len(optional) - k) <= best[0]:
            return
        if k == len(optional):
            best[0] = max(best[0], picked)
            return
        o = optional[k]
        for p in range(P):
            if room[p] >= 1 and (q[:, o] <= left[p]).all():
                room[p] -= 1
                left[p] -= q[:, o]
                place_optional(k + 1, picked + 1)
                room[p] += 1
                left[p] += q[:, o]
        place_optional(k + 1, picked)

    place_mandatory(0)
    return None if best[0] < 0 else best[0]


def _picker_maps(racks, P, surjective: bool):
    for assignment in itertools.product(range(P), repeat=len(racks)):
        if surjective and len(set(assignment)) < P:
            continue
        groups = [[] for _ in range(P)]
        for r, p in zip(racks, assignment):
            groups[p].append(r)
        yield groups


def _z_needs(sem: Semantics, pool) -> dict[int, list[int]]:
    if not sem.single_rack:
        return {}
    size = sem.q.sum(axis=0)
    pool = set(pool)
    return {o: [r for r in _omega(sem.q, sem.s, o) if r in pool] for o in sem.F if size[o] != 1}


def stage_one(inst, strategy: str):
    """Minimum rack count of stage one, or None when infeasible.

    Tries rack subsets by increasing size; a subset works when its racks can
    be split over all pickers (each getting one) so that every stage-one
    order fits some picker's capacity and stock.
    """
    sem = semantics(inst, strategy)
    q, s = sem.q, sem.s
    demand = q.sum(axis=1)
    active = demand >= 1
    useful = [r for r in range(s.shape[1]) if (s[active, r] >= 1).any()]
    for k in range(1, len(useful) + 1):
        for subset in itertools.combinations(useful, k):
            if (s[:, list(subset)].sum(axis=1) < demand).any():
                continue
            zneed = _z_needs(sem, subset)
            if any(not v for v in zneed.values()):
                continue
            zstock = {r: s[:, r].copy() for r in subset}
            for groups in _picker_maps(subset, sem.P, surjective=True):
                if _assign(sem, groups, sem.F, [], zneed, zstock) is not None:
                    return k
    return None


def stage_two_npo(inst, strategy: str, theta, caps=None):
    """Fewest unpicked second-stage orders using exactly the racks in theta."""
    sem = semantics(inst, strategy)
    if caps is not None:
        sem.caps = list(caps)
    theta = sorted(theta)
    zneed = _z_needs(sem, theta)
    zstock = {r: sem.s[:, r].copy() for r in theta}
    best = None
    for groups in _picker_maps(theta, sem.P, surjective=False):
        got = _assign(sem, groups, sem.F, sem.S, zneed, zstock)
        if got is not None and (best is None or got > best):
            best = got
            if best == len(sem.S):
                break
    return None if best is None else len(sem.S) - best
