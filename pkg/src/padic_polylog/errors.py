"""Exception hierarchy.  Each CLI-visible failure carries its own exit code.

Exit status 1 is kept for a verification that ran and failed, 9 for I/O.
"""


class PadicError(Exception):
    exit_code = 10


class ConfigError(PadicError, ValueError):
    exit_code = 2


class MalformedInputError(PadicError, ValueError):
    exit_code = 3


class PrecisionError(PadicError):
    """Guard-digit shortfall or precision exhausted by a lossy step."""
    exit_code = 4


class ClippedCoefficientError(PadicError):
    """A nonzero coefficient would be pushed past the level of a section."""
    exit_code = 5


class NotInvertibleError(PadicError, ZeroDivisionError):
    exit_code = 6


class NotUnitSupportedError(PadicError):
    exit_code = 7


class DivergentSeedError(PadicError):
    exit_code = 8
