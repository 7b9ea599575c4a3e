"""Linear model container with binary and bounded continuous variables."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

from rmfs_alloc.errors import BoundViolation, ModelError

# a value counts as integral when within this distance of an integer;
# shared by branch-and-bound and the PIO loop
INT_TOL = 1e-6


class VarKind(str, Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


@dataclass
class Variable:
    id: int
    name: str
    kind: VarKind
    lo: float = 0.0
    hi: float = 1.0


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str


@dataclass
class Model:
    """A minimisation or maximisation over linear constraints.

    Variables are binary or continuous on a finite box. ``fixings`` pins
    variables to values without removing them, so variable ids stay stable
    across :func:`fix` and :func:`relax`.
    """

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    sense: str = "min"
    objective_constant: float = 0.0
    fixings: dict[int, float] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_var(self, name: str, kind: VarKind | str = VarKind.BINARY, lo: float = 0.0, hi: float = 1.0) -> int:
        kind = VarKind(kind)
        if kind is VarKind.BINARY:
            lo, hi = 0.0, 1.0
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ModelError(f"variable {name!r} needs finite bounds lo <= hi, got [{lo}, {hi}]")
        v = Variable(len(self.variables), name, kind, float(lo), float(hi))
        self.variables.append(v)
        return v.id

    def add_constraint(
        self,
        coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
        sense: str,
        rhs: float,
        name: str = "",
    ) -> int:
        if sense not in ("<=", ">=", "="):
            raise ModelError(f"bad constraint sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, float] = {}
        for var, coef in items:
            if not 0 <= var < len(self.variables):
                raise ModelError(f"constraint {name!r} references unknown variable {var}")
            merged[var] = merged.get(var, 0.0) + float(coef)
        merged = {v: c for v, c in merged.items() if c != 0.0}
        self.constraints.append(Constraint(merged, sense, float(rhs), name or f"c{len(self.constraints)}"))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: Mapping[int, float], sense: str = "min", constant: float = 0.0) -> None:
        if sense not in ("min", "max"):
            raise ModelError(f"bad objective sense {sense!r}")
        for var in coeffs:
            if not 0 <= var < len(self.variables):
                raise ModelError(f"objective references unknown variable {var}")
        self.objective = {v: float(c) for v, c in coeffs.items() if c != 0.0}
        self.sense = sense
        self.objective_constant = float(constant)

    def copy(self) -> "Model":
        return copy.deepcopy(self)

    def check(self) -> None:
        n = len(self.variables)
        for con in self.constraints:
            if any(not 0 <= v < n for v in con.coeffs):
                raise ModelError(f"constraint {con.name} references an unknown variable")
        for v, val in self.fixings.items():
            _check_fix(self.variables[v], val)

    def binary_ids(self) -> list[int]:
        return [v.id for v in self.variables if v.kind is VarKind.BINARY]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([v.lo for v in self.variables], dtype=float)
        hi = np.array([v.hi for v in self.variables], dtype=float)
        for v, val in self.fixings.items():
            lo[v] = hi[v] = val
        return lo, hi

    def matrix(self) -> tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
        """Constraint matrix with row activity bounds ``row_lo <= A x <= row_hi``."""
        rows, cols, vals = [], [], []
        row_lo = np.empty(len(self.constraints))
        row_hi = np.empty(len(self.constraints))
        for k, con in enumerate(self.constraints):
            for v, c in con.coeffs.items():
                rows.append(k)
                cols.append(v)
                vals.append(c)
            row_lo[k] = con.rhs if con.sense in (">=", "=") else -np.inf
            row_hi[k] = con.rhs if con.sense in ("<=", "=") else np.inf
        a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(self.constraints), len(self.variables)))
        return a, row_lo, row_hi

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(len(self.variables))
        for v, coef in self.objective.items():
            c[v] = coef
        return c

    def evaluate(self, values) -> float:
        return self.objective_constant + sum(c * values[v] for v, c in self.objective.items())

    def violations(self, values, tol: float = 1e-6) -> list[str]:
        """Names of constraints/bounds violated by ``values`` (for tests and debugging)."""
        bad = []
        lo, hi = self.bounds()
        for v in self.variables:
            x = values[v.id]
            if x < lo[v.id] - tol or x > hi[v.id] + tol:
                bad.append(f"bound:{v.name}")
            elif v.kind is VarKind.BINARY and abs(x - round(x)) > tol:
                bad.append(f"integrality:{v.name}")
        for con in self.constraints:
            act = sum(c * values[v] for v, c in con.coeffs.items())
            if (con.sense == "<=" and act > con.rhs + tol) or (con.sense == ">=" and act < con.rhs - tol) or (
                con.sense == "=" and abs(act - con.rhs) > tol
            ):
                bad.append(con.name)
        return bad

    def to_lp(self) -> str:
        return to_lp_format(self)


def _check_fix(var: Variable, value: float) -> None:
    if value < var.lo - 1e-12 or value > var.hi + 1e-12:
        raise BoundViolation(f"{var.name}={value} outside [{var.lo}, {var.hi}]")
    if var.kind is VarKind.BINARY and value not in (0.0, 1.0):
        raise BoundViolation(f"binary {var.name} cannot be fixed to {value}")


def relax(model: Model, variables: Iterable[int] | None = None) -> Model:
    """Copy with binaries (all, or just ``variables``) made continuous on [0, 1]."""
    out = model.copy()
    targets = range(out.n_vars) if variables is None else variables
    for v in targets:
        var = out.variables[v]
        if var.kind is VarKind.BINARY:
            var.kind = VarKind.CONTINUOUS
    return out


def make_binary(model: Model, variables: Iterable[int]) -> Model:
    """Copy with ``variables`` (which must sit on [0, 1]) declared binary."""
    out = model.copy()
    for v in variables:
        var = out.variables[v]
        if (var.lo, var.hi) != (0.0, 1.0):
            raise ModelError(f"{var.name} is not on [0, 1] and cannot become binary")
        var.kind = VarKind.BINARY
    return out


def fix(model: Model, assignments: Iterable[tuple[int, float]] | Mapping[int, float]) -> Model:
    """Copy with the given variables pinned; raises BoundViolation when out of domain."""
    out = model.copy()
    items = assignments.items() if isinstance(assignments, Mapping) else assignments
    for v, val in items:
        if not 0 <= v < out.n_vars:
            raise ModelError(f"cannot fix unknown variable {v}")
        val = float(val)
        _check_fix(out.variables[v], val)
        out.fixings[v] = val
    return out


def _fmt(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def _lp_terms(coeffs: Mapping[int, float], names: list[str]) -> str:
    if not coeffs:
        return "0 " + names[0] if names else "0"
    parts = []
    for k, (v, c) in enumerate(sorted(coeffs.items())):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = names[v] if mag == 1 else f"{_fmt(mag)} {names[v]}"
        parts.append((f"- {term}" if sign == "-" else term) if k == 0 else f"{sign} {term}")
    return " ".join(parts)


def to_lp_format(model: Model) -> str:
    """CPLEX-style LP text.

    Field order is fixed: objective, constraints in insertion order, bounds
    and binaries in variable-id order. Terms within a row are sorted by
    variable id; fixings appear as ``lo <= x <= lo`` bounds. Names are the
    variable names with characters outside ``[A-Za-z0-9_]`` replaced by ``_``.
    """
    names = ["".join(ch if ch.isalnum() or ch == "_" else "_" for ch in v.name) or f"v{v.id}" for v in model.variables]
    lines = [f"\\ {model.name}", "Minimize" if model.sense == "min" else "Maximize"]
    obj = _lp_terms(model.objective, names)
    if model.objective_constant:
        obj += f" + {_fmt(model.objective_constant)}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    op = {"<=": "<=", ">=": ">=", "=": "="}
    for con in model.constraints:
        lines.append(f" {con.name}: {_lp_terms(con.coeffs, names)} {op[con.sense]} {_fmt(con.rhs)}")
    lo, hi = model.bounds()
    lines.append("Bounds")
    for v in model.variables:
        lines.append(f" {_fmt(lo[v.id])} <= {names[v.id]} <= {_fmt(hi[v.id])}")
    bins = [names[v.id] for v in model.variables if v.kind is VarKind.BINARY]
    if bins:
        lines.append("Binaries")
        lines.append(" " + " ".join(bins))
    lines.append("End")
    return "\n".join(lines) + "\n"
