"""Fixed-precision p-adic series, measures and the moment functions of a p-adic elliptic polylogarithm."""

from .errors import (
    ClippedCoefficientError, ConfigError, DivergentSeedError, MalformedInputError,
    NotInvertibleError, NotUnitSupportedError, PadicError, PrecisionError,
)
from .padic import PadicNumber, PadicScalar, Ring, RingElement, make_scalar, unit_inverse, valuation
from .series import Comparison, Series, compare

__version__ = "0.1.0"
