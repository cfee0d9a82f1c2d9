"""Exception types shared across the solver modules."""


class MonopolyControlError(Exception):
    """Base class for all errors raised by this package."""


class AssumptionViolation(MonopolyControlError):
    """A problem spec breaks one of the standing model assumptions.

    The message names the violated assumption (e.g. "0 must belong to the
    demand set", "production cost must be non-decreasing").
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class CoercivityUndetectable(AssumptionViolation):
    """Unbounded production set whose cost growth cannot be certified.

    Raised for Table costs on a right ray: a finite table cannot witness
    that average cost grows without bound.
    """


class InvalidParameter(MonopolyControlError, ValueError):
    """A scalar argument is outside its documented range."""


class DegenerateGrid(MonopolyControlError, ValueError):
    """Fewer than two distinct sample points were supplied."""


class OutOfDomain(MonopolyControlError, ValueError):
    """Query point lies outside the tabulated domain."""


class TruncationFailed(MonopolyControlError):
    """The production-ray truncation bound grew past its cap without the
    cost conjugate's maximizer becoming interior."""


class DecompositionMismatch(MonopolyControlError):
    """A two-point hull decomposition failed its reconstruction identity."""


class StateViolation(MonopolyControlError):
    """Simulated inventory went below the admissibility tolerance."""

    def __init__(self, time: float, inventory: float):
        super().__init__(
            f"inventory {inventory:.6g} below tolerance at t={time:.6g}; "
            "plan is inadmissible under this step size"
        )
        self.time = time
        self.inventory = inventory


class HorizonTooShort(MonopolyControlError):
    """Discount weight left beyond the horizon exceeds the requested
    tolerance, so the profit gap would be dominated by truncation."""


class NotConverged(MonopolyControlError):
    """Fixed-point iteration hit its sweep cap before the tolerance."""


class ZetaZeroWarning(UserWarning):
    """The value function is constant; any admissible plan is optimal."""
