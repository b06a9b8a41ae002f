"""Runtime exceptions shared across the package."""


class AccelsumError(Exception):
    """Base class for all package errors."""


class InputError(AccelsumError):
    """Non-finite or malformed numerical input."""


class ConstraintError(AccelsumError):
    """A structural precondition (degree, exponent, weight) is violated."""


class PoleError(AccelsumError):
    """A polynomial that must stay nonzero vanishes at a grid node."""


class StripError(AccelsumError):
    """Evaluation point lies outside the analyticity strip."""


class DirectionError(AccelsumError):
    """No admissible integration ray exists for the requested point."""


class AccuracyError(AccelsumError):
    """Estimated truncation error exceeds the requested tolerance."""


class GeometryError(AccelsumError):
    """Sector/contour construction is infeasible for the given data."""


class DivergenceError(AccelsumError):
    """Fixed-point iteration fails to contract (budget too large)."""
