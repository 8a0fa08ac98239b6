"""Exception hierarchy for the nlheat package."""
from __future__ import annotations


class NlheatError(Exception):
    """Base class for all package-specific errors."""


class InvalidProblemError(NlheatError):
    """A problem description violates a structural hypothesis (signs, exponents)."""


class ConfigError(NlheatError):
    """A config or sweep-plan file failed to parse or validate."""


class NonConvergenceError(NlheatError):
    """The integrator stalled at the step-size floor without reaching the blow-up cap.

    Reported distinctly from blow-up so that stiffness is never silently
    classified as a singularity.  Carries the partial trajectory when available.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class FitDegenerateError(NlheatError):
    """The terminal window of a series is unusable for blow-up extrapolation."""


class InsufficientWindowError(NlheatError):
    """Too few samples in the terminal decade for a trend or rate monitor."""


class HypothesisNotMetError(NlheatError):
    """Inputs fall outside the hypotheses a routine needs to give a verdict."""


class CertificateInfeasibleError(NlheatError):
    """No admissible constants were found in the scan range for a certificate."""


class NoSolutionError(NlheatError):
    """A scalar equation has no root (the left side saturates below the target)."""


class SandwichViolationError(NlheatError):
    """A numeric trajectory escaped its certificate bracket.

    Carries the first violating point.
    """

    def __init__(self, message, x=None, t=None, gap=None, side=None):
        super().__init__(message)
        self.x = x
        self.t = t
        self.gap = gap
        self.side = side
