"""Shared exception types.

The CLI maps these onto exit codes: configuration problems exit 2, numeric
failures exit 3.
"""


class VolestError(Exception):
    """Base class for all package errors."""


class ConfigError(VolestError):
    """Malformed configuration input: unknown key, bad syntax, wrong arity."""


class DomainError(VolestError):
    """Parameter or state outside the mathematical domain of validity."""


class SimulationError(VolestError):
    """Euler state left the finite range at some step."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DegenerateVolatilityError(VolestError):
    """sigma1*sigma2 vanished at a node the estimator needs."""

    def __init__(self, message: str, node: int | None = None, where=None):
        super().__init__(message)
        self.node = node
        self.where = where  # (t, x, y) triple of the offending node


class NoInformationError(VolestError):
    """Estimator denominator is zero: the path carries no drift information."""


class UnsupportedDataError(VolestError):
    """Operation needs simulator-internal arrays absent from observed data."""


class ExperimentError(VolestError):
    """Monte-Carlo experiment could not produce statistics."""


class DegenerateCorrelationError(VolestError):
    """|rho| = 1 collapses the two driving noises onto one line."""


class QuadratureError(VolestError):
    """Adaptive quadrature failed to reach the requested tolerance."""
