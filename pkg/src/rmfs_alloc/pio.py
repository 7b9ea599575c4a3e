"""Partial integer optimisation over pickers.

Each round keeps the allocation variables of a few pickers binary, relaxes
the rest, solves, and pins every picker that came out integral. Stage one
finally restores binary rack-usage variables and solves once more.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from rmfs_alloc.errors import PioFailed
from rmfs_alloc.formulations import StageModel
from rmfs_alloc.milp import INT_TOL, Limits, SolveOutcome, Status, fix, relax, solve


def _integral(values: np.ndarray, ids) -> bool:
    ids = list(ids)
    if not ids:
        return True
    vals = values[ids]
    return bool(np.all(np.abs(vals - np.round(vals)) <= INT_TOL))


def picker_score(p: int, values: np.ndarray, sm: StageModel) -> float:
    """Distance of picker ``p``'s allocation variables from integrality."""
    ids = sm.picker_vars(p)
    if not ids:
        return 0.0
    vals = np.clip(values[ids], 0.0, 1.0)
    return float(np.minimum(vals, 1.0 - vals).sum())


def choose_pickers(scores: dict[int, float], tau: int) -> list[int]:
    """The ``tau`` pickers with the smallest summed score, ties to lowest index."""
    return sorted(sorted(scores, key=lambda p: (scores[p], p))[:tau])


@dataclass
class PioResult:
    outcome: SolveOutcome
    iterations: int
    history: list[tuple[int, ...]] = field(default_factory=list)
    initial_scores: dict[int, float] = field(default_factory=dict)


def _sub_limit(limits: Limits, deadline: float, rounds_left: int, iteration: int) -> Limits:
    remaining = deadline - time.perf_counter()
    if remaining <= 0:
        raise PioFailed(iteration, "time limit exhausted")
    budget = min(remaining, max(1.0, remaining / max(rounds_left, 1)))
    return Limits(time_limit_s=budget, node_limit=limits.node_limit, int_tol=limits.int_tol, rel_gap=limits.rel_gap)


def pio_solve(sm: StageModel, tau: int, limits: Limits | None = None, backend=None) -> PioResult:
    """Run the picker-by-picker fixing loop on a built stage model.

    Raises :class:`PioFailed` when a subproblem is infeasible or returns no
    incumbent in its time slice.
    """
    if tau < 1:
        raise ValueError("tau must be at least 1")
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.time_limit_s
    base = sm.model
    P = sm.n_pickers
    alloc = {p: sm.picker_vars(p) for p in range(P)}
    usage = list(sm.u.values()) if sm.stage == "first" else list(sm.v.values())
    nodes = 0

    def rounds_left(done: int, t: int) -> int:
        return math.ceil((P - done) / t) + 1

    lp = solve(relax(base), _sub_limit(limits, deadline, rounds_left(0, tau), 0), backend)
    if lp.status is Status.INFEASIBLE or not lp.has_incumbent:
        raise PioFailed(0, "LP relaxation infeasible")
    scores = {p: picker_score(p, lp.values, sm) for p in range(P)}
    committed: list[int] = []
    fixings: dict[int, float] = {}
    history: list[tuple[int, ...]] = []
    iteration = 0
    values = lp.values
    chosen = choose_pickers(scores, min(tau, P))
    first_scores = dict(scores)
    while True:
        iteration += 1
        active = committed + [p for p in chosen if p not in committed]
        relaxed = [v for p in range(P) if p not in active for v in alloc[p]] + usage
        sub = relax(fix(base, fixings), relaxed)
        out = solve(sub, _sub_limit(limits, deadline, rounds_left(len(active), tau), iteration), backend)
        nodes += out.nodes
        if not out.has_incumbent:
            raise PioFailed(iteration, "subproblem infeasible" if out.status is Status.INFEASIBLE else "no incumbent")
        values = out.values
        if _integral(values, relaxed):
            history.append(tuple(range(P)))
            return _finish(sm, np.round(values), start, nodes, iteration, history, first_scores)
        fresh = [p for p in range(P) if p not in active and _integral(values, alloc[p])]
        committed = sorted(set(active) | set(fresh))
        history.append(tuple(committed))
        for p in committed:
            for v in alloc[p]:
                fixings[v] = float(round(values[v]))
        if len(committed) == P:
            break
        tau = min(P - len(committed), tau)
        scores = {p: picker_score(p, values, sm) for p in range(P) if p not in committed}
        chosen = choose_pickers(scores, tau)

    iteration += 1
    out = solve(fix(base, fixings), _sub_limit(limits, deadline, 1, iteration), backend)
    nodes += out.nodes
    if not out.has_incumbent:
        raise PioFailed(iteration, "final restoration infeasible" if out.status is Status.INFEASIBLE else "no incumbent")
    return _finish(sm, out.values, start, nodes, iteration, history, first_scores)


def _finish(sm, values, start, nodes, iteration, history, scores) -> PioResult:
    model = sm.model
    objective = model.evaluate(values)
    elapsed = time.perf_counter() - start
    outcome = SolveOutcome(Status.HEURISTIC, values, objective, None, model.sense, elapsed, nodes)
    return PioResult(outcome, iteration, history, scores)
