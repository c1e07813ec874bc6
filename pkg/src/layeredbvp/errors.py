"""Exception hierarchy shared by all modules."""


class LayeredBvpError(Exception):
    """Base class for all errors raised by this package."""


class CenterMismatch(LayeredBvpError):
    """Series arithmetic requires both operands expanded about the same point."""


class DivisionByZeroConstantTerm(LayeredBvpError):
    """Series division needs a constant term bounded away from zero."""


class OrderExhausted(LayeredBvpError):
    """A derivative was requested beyond the available truncation order."""


class InsufficientOrder(LayeredBvpError):
    """A coefficient provider cannot supply the requested expansion depth."""


class InvalidCoefficient(LayeredBvpError):
    """A coefficient specification is malformed or not admissible on [0, 1]."""


class AssumptionViolated(LayeredBvpError):
    """One of the structural positivity assumptions on b, c fails on [0, 1]."""

    def __init__(self, message, which=None, location=None):
        super().__init__(message)
        self.which = which
        self.location = location


class QuadratureUnderResolved(LayeredBvpError):
    """Two quadrature refinement levels disagree beyond tolerance."""


class NonDecayingInput(LayeredBvpError):
    """A layer right-hand side contains a non-decaying exponential term."""


class NoDecayingSolution(LayeredBvpError):
    """The layer ODE admits no solution that decays at infinity."""


class SelfCheckFailed(LayeredBvpError):
    """A post-solve residual self-check exceeded its tolerance."""


class RecurrenceRowAmbiguous(LayeredBvpError):
    """A term index matches no known recurrence row."""


class SingularSystem(LayeredBvpError):
    """The Galerkin system could not be solved reliably."""


class OutOfDomain(LayeredBvpError):
    """Evaluation requested outside [0, 1]."""


class ReferenceTooCoarse(LayeredBvpError):
    """The reference solution is not resolved below the remainder scale."""


class DegenerateFit(LayeredBvpError):
    """Too few usable points for a least-squares fit."""
