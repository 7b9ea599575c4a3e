"""0-1 / continuous linear models and the engines that solve them."""

from rmfs_alloc.milp.backends import BACKEND_ENV, Backend, BuiltinBackend, HighsBackend, resolve_backend, solve
from rmfs_alloc.milp.bnb import branch_and_bound
from rmfs_alloc.milp.model import INT_TOL, Model, VarKind, fix, make_binary, relax, to_lp_format
from rmfs_alloc.milp.outcome import Limits, SolveOutcome, Status
from rmfs_alloc.milp.simplex import DenseLP

__all__ = [
    "BACKEND_ENV",
    "INT_TOL",
    "Backend",
    "BuiltinBackend",
    "DenseLP",
    "HighsBackend",
    "Limits",
    "Model",
    "SolveOutcome",
    "Status",
    "VarKind",
    "branch_and_bound",
    "fix",
    "make_binary",
    "relax",
    "resolve_backend",
    "solve",
    "to_lp_format",
]
