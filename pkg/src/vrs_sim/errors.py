"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`VrsError`.
Configuration problems derive from :class:`ConfigError`; the rest are
numerical failures. The CLI maps the two families onto distinct exit codes.
"""


class VrsError(Exception):
    """Base class for all package errors."""


class NumericError(VrsError):
    """A numerical routine could not satisfy its contract."""


class SingularMatrix(NumericError):
    pass


class NotHermitian(NumericError):
    pass


class DegenerateSteadyState(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class NonPhysicalState(NumericError):
    """Steady state has eigenvalues below the positivity tolerance.

    Usually a sign that the Fock truncation is too small for the pump rates.
    """


class ResolventSingular(NumericError):
    pass


class GridTooCoarse(NumericError):
    pass


class BelowThreshold(NumericError):
    """Closed-form splitting requested outside the strong-coupling regime."""


class FitDiverged(NumericError):
    pass


class ZeroPopulation(NumericError):
    pass


class ConfigError(VrsError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ValidationError(ConfigError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
