"""Solver backends.

A backend is any object with ``solve(model, limits) -> SolveOutcome``. The
builtin engine is exact but meant for desk-scale models; ``HighsBackend``
hands the model to HiGHS through :func:`scipy.optimize.milp` for full-size
runs. Third-party adapters are loaded from a ``"package.module:attr"`` path,
either passed explicitly or through the ``RMFS_ALLOC_BACKEND`` variable.
"""

from __future__ import annotations

import importlib
import os
import time
from typing import Protocol

import numpy as np

from rmfs_alloc.milp.bnb import branch_and_bound
from rmfs_alloc.milp.model import Model, VarKind
from rmfs_alloc.milp.outcome import Limits, SolveOutcome, Status

BACKEND_ENV = "RMFS_ALLOC_BACKEND"


class Backend(Protocol):
    name: str

    def solve(self, model: Model, limits: Limits) -> SolveOutcome: ...


class BuiltinBackend:
    name = "builtin"

    def solve(self, model: Model, limits: Limits) -> SolveOutcome:
        return branch_and_bound(model, limits)


class HighsBackend:
    name = "highs"

    def solve(self, model: Model, limits: Limits) -> SolveOutcome:
        from scipy.optimize import Bounds, LinearConstraint, milp

        model.check()
        start = time.perf_counter()
        sign = 1.0 if model.sense == "min" else -1.0
        c = sign * model.objective_vector()
        lo, hi = model.bounds()
        integrality = np.array([1 if v.kind is VarKind.BINARY else 0 for v in model.variables])
        cons = []
        if model.n_constraints:
            a, rlo, rhi = model.matrix()
            cons.append(LinearConstraint(a, rlo, rhi))
        res = milp(
            c,
            integrality=integrality,
            bounds=Bounds(lo, hi),
            constraints=cons,
            options={"time_limit": float(limits.time_limit_s), "mip_rel_gap": max(limits.rel_gap, 1e-9), "disp": False},
        )
        elapsed = time.perf_counter() - start
        const = model.objective_constant
        bound = getattr(res, "mip_dual_bound", None)
        x = None if res.x is None else np.asarray(res.x, dtype=float)
        if x is not None:
            binaries = integrality == 1
            x[binaries] = np.round(x[binaries])
        obj = None if x is None else float(model.objective_vector() @ x) + const
        if bound is not None and np.isfinite(bound):
            bound = sign * bound + const
        elif res.status == 0 and obj is not None:
            bound = obj
        else:
            bound = None
        if res.status == 0:
            status = Status.OPTIMAL
        elif res.status == 2:
            status = Status.INFEASIBLE
        elif x is not None:
            status = Status.FEASIBLE_AT_LIMIT
        else:
            status = Status.NO_INCUMBENT_AT_LIMIT
        return SolveOutcome(status, x, obj, bound, model.sense, elapsed, int(getattr(res, "mip_node_count", 0) or 0))


_NAMED = {"builtin": BuiltinBackend, "highs": HighsBackend}


def resolve_backend(spec: str | Backend | None = None) -> Backend:
    """Turn a name, ``module:attr`` path or instance into a backend object."""
    if spec is None:
        spec = os.environ.get(BACKEND_ENV) or "builtin"
    if not isinstance(spec, str):
        return spec
    if spec in _NAMED:
        return _NAMED[spec]()
    module_name, _, attr = spec.partition(":")
    if not attr:
        raise ValueError(f"backend {spec!r} is neither builtin/highs nor a module:attr path")
    obj = getattr(importlib.import_module(module_name), attr)
    return obj() if isinstance(obj, type) or (callable(obj) and not hasattr(obj, "solve")) else obj


def solve(model: Model, limits: Limits | None = None, backend: str | Backend | None = None) -> SolveOutcome:
    """Solve with the requested backend (builtin when unspecified)."""
    limits = limits or Limits()
    engine = BuiltinBackend() if backend is None else resolve_backend(backend)
    return engine.solve(model, limits)
