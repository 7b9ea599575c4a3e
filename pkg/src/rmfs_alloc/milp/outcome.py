from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from rmfs_alloc.errors import LimitZero
from rmfs_alloc.milp.model import INT_TOL


class Status(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_AT_LIMIT = "feasible_at_limit"
    INFEASIBLE = "infeasible"
    NO_INCUMBENT_AT_LIMIT = "no_incumbent_at_limit"
    # integer-feasible point from a heuristic; no bound is claimed
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class Limits:
    time_limit_s: float = 300.0
    node_limit: int | None = None
    int_tol: float = INT_TOL
    rel_gap: float = 1e-9

    def __post_init__(self) -> None:
        if not self.time_limit_s > 0:
            raise LimitZero(f"time limit must be positive, got {self.time_limit_s}")


@dataclass
class SolveOutcome:
    """Result of a MILP solve.

    ``objective`` is the incumbent value and ``bound`` the best proven bound,
    both in the model's own sense. ``upper_bound``/``lower_bound`` translate
    them into bounds on the optimum regardless of sense.
    """

    status: Status
    values: np.ndarray | None
    objective: float | None
    bound: float | None
    sense: str = "min"
    wall_time: float = 0.0
    nodes: int = 0

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None

    @property
    def at_limit(self) -> bool:
        return self.status in (Status.FEASIBLE_AT_LIMIT, Status.NO_INCUMBENT_AT_LIMIT)

    @property
    def upper_bound(self) -> float | None:
        return self.objective if self.sense == "min" else self.bound

    @property
    def lower_bound(self) -> float | None:
        return self.bound if self.sense == "min" else self.objective

    @property
    def gap_pct(self) -> float | None:
        """100 (UB - LB) / UB; None without an incumbent."""
        if self.status is Status.OPTIMAL:
            return 0.0
        ub, lb = self.upper_bound, self.lower_bound
        if ub is None or lb is None or not self.has_incumbent:
            return None
        if ub - lb <= 1e-9 * max(1.0, abs(ub)):
            return 0.0
        if abs(ub) < 1e-12:
            return 100.0
        return 100.0 * (ub - lb) / abs(ub)

    def value(self, var: int) -> float:
        if self.values is None:
            raise ValueError("no incumbent")
        return float(self.values[var])
