"""Exception types shared across the package.

The CLI maps these onto exit codes: domain/config errors exit 2, numerical
failures exit 3, evolution blow-up exit 4, matching failures exit 5.
"""


class TovpulseError(Exception):
    """Base class for package errors."""


class DomainError(TovpulseError, ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericalError(TovpulseError, RuntimeError):
    """A solver or quadrature failed to reach its tolerance."""


class ConvergenceError(NumericalError):
    """A discretization did not converge under refinement."""


class CollapseError(NumericalError):
    """TOV integration left the domain 2Gm/c^2 r < 1."""


class StallError(NumericalError):
    """The enthalpy failed to decrease during outward integration."""


class LongEquilibriumError(TovpulseError):
    """No vacuum surface found below the configured radius bound."""


class BlowupError(TovpulseError, RuntimeError):
    """Evolution state violated positivity; carries the last good time."""

    def __init__(self, message, t_last=None, state=None):
        super().__init__(message)
        self.t_last = t_last
        self.state = state


class MatchingError(TovpulseError, RuntimeError):
    """Interior/exterior metric matching failed its residual checks."""


class IntegrityError(TovpulseError):
    """Pipeline artifact hashes do not agree."""
