"""Exception hierarchy shared by every orbitrep module."""

from __future__ import annotations


class OrbitRepError(Exception):
    """Base class for all library errors."""


class ScalarSyntaxError(OrbitRepError, ValueError):
    """A scalar expression does not follow the grammar."""

    def __init__(self, message: str, position: int, expected: str):
        super().__init__(f"{message} at position {position} (expected {expected})")
        self.position = position
        self.expected = expected


class DomainError(OrbitRepError, ValueError):
    """A value lies outside the domain an operation accepts."""


class DivisionByZero(OrbitRepError, ZeroDivisionError):
    pass


class ApproxIndeterminate(OrbitRepError, ArithmeticError):
    """An approximate value is too close to a decision boundary to decide."""


class IndeterminateFloor(ApproxIndeterminate):
    pass


class BoundaryHit(OrbitRepError):
    """A point (or one of its iterates) sits on a partition endpoint."""

    def __init__(self, point, step: int | None = None):
        where = "" if step is None else f" at step {step}"
        super().__init__(f"point {point} is a partition endpoint{where}")
        self.point = point
        self.step = step


class RangeError(OrbitRepError, ValueError):
    pass


class ResourceLimit(OrbitRepError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class BasisMismatch(OrbitRepError, ValueError):
    pass


class EmptySelection(OrbitRepError):
    pass


class NoCoreColumns(OrbitRepError):
    pass
