"""Exception hierarchy for the solver."""


class SolverError(Exception):
    """Base class for all solver errors."""


class NonPositiveParameter(SolverError):
    """A physical parameter violates its positivity requirement."""


class DomainError(SolverError):
    """Evaluation requested outside a function's validity domain."""


class ToleranceNotMet(SolverError):
    """Adaptive quadrature exhausted its subdivision budget."""


class DecayViolation(SolverError):
    """A semi-infinite integrand does not decay fast enough to integrate."""


class DegenerateDenominator(SolverError):
    """A denominator quantity underflowed to an unusable magnitude."""


class MaxIterExceeded(SolverError):
    """Fixed-point iteration hit the sweep budget before converging."""

    def __init__(self, message, last_update_norm=None):
        super().__init__(message)
        self.last_update_norm = last_update_norm


class DivergenceDetected(SolverError):
    """Fixed-point update norms grew for several consecutive sweeps."""


class NoSignChange(SolverError):
    """A scalar residual does not change sign over the search bracket."""


class InnerFailure(SolverError):
    """The inner front solve failed while the outer solve was running."""


class RootNotBracketed(SolverError):
    """A certificate root search found no crossing on its grid."""


class ParseError(SolverError):
    """A scenario or solution file failed to parse or validate."""
