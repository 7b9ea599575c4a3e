"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RmfsError(Exception):
    """Base class for every error raised by :mod:`rmfs_alloc`."""


class ParseError(RmfsError):
    """Instance or plan text could not be parsed."""


class InvariantError(RmfsError):
    """Instance data breaks a structural invariant.

    ``indices`` carries the offending (product, order, rack, picker) indices so
    callers can report them without parsing the message.
    """

    def __init__(self, message: str, indices: dict | None = None) -> None:
        super().__init__(message)
        self.indices = dict(indices or {})


class ProfileError(RmfsError):
    """A generator profile cannot produce a valid instance."""


class InfeasibleStockError(RmfsError):
    """Total warehouse stock of some product is below its total demand."""

    def __init__(self, products: list[int]) -> None:
        super().__init__(f"total stock below total demand for products {products}")
        self.products = list(products)


class ModelError(RmfsError):
    """A model is malformed (dangling variable reference, bad bounds, ...)."""


class LimitZero(RmfsError):
    """A non-positive time limit was requested."""


class BoundViolation(RmfsError):
    """A fixing value lies outside the variable's domain."""


class CapacityShortfall(RmfsError):
    """Pickers cannot absorb the first-stage orders and augmentation is off."""


class EmptyTheta(RmfsError):
    """Second stage requested with no racks carried over from stage one."""


class PioFailed(RmfsError):
    """The partial integer optimisation loop hit an infeasible subproblem."""

    def __init__(self, iteration: int, reason: str) -> None:
        super().__init__(f"PIO failed at iteration {iteration}: {reason}")
        self.iteration = iteration
        self.reason = reason


class Stage1Infeasible(RmfsError):
    """The first-stage model has no feasible solution.

    For Strategy 3 ``witness`` lists the first-stage orders whose single-rack
    supply sets collide on insufficient stock (may be empty when the conflict
    lies elsewhere, e.g. picker capacity).
    """

    def __init__(self, message: str, witness: tuple[int, ...] = (), report=None) -> None:
        super().__init__(message)
        self.witness = tuple(witness)
        self.report = report


class PlanValidationError(RmfsError):
    """A plan produced by the pipeline failed independent validation."""

    def __init__(self, violations) -> None:
        super().__init__(f"{len(violations)} constraint violations: {violations[:3]}")
        self.violations = list(violations)
