"""Exception types shared across the package."""


class StringStabError(Exception):
    """Base class for all stringstab errors."""


class InvalidGainsError(StringStabError, ValueError):
    """Controller gains violate positivity or finiteness requirements."""


class ConfigError(StringStabError, ValueError):
    """A run configuration failed validation; the message names the field."""


class EvaluationError(StringStabError):
    """A frequency-response evaluation returned a non-finite value."""

    def __init__(self, message: str, omega: float | None = None):
        super().__init__(message)
        self.omega = omega


class DegeneratePointError(StringStabError):
    """A closed-form denominator is too close to zero at the given point."""

    def __init__(self, message: str, s: complex | None = None):
        super().__init__(message)
        self.s = s


class SingularMatrixError(StringStabError):
    """The chain operator is numerically singular at the given point."""

    def __init__(self, message: str, s: complex | None = None):
        super().__init__(message)
        self.s = s


class DivergenceError(StringStabError):
    """Simulation state became non-finite."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t
