"""Fixed-precision p-adic scalars and the coefficient rings series live over.

Every value is a residue modulo p**M together with an effective precision
``M_eff <= M``: the residue is only claimed to be correct modulo p**M_eff.
Residues are kept reduced modulo p**M_eff, which makes equality of canonical
values a plain comparison.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NotInvertibleError, PadicError

# int64 storage is used while products of two residues plus a few hundred
# accumulations stay below 2**63.
INT64_MODULUS_LIMIT = 2 ** 26


@lru_cache(maxsize=None)
def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp(n, p, cap=None):
    """p-adic valuation of the integer n; ``cap`` (or None for infinity) when n == 0."""
    n = int(n)
    if n == 0:
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


def vp_factorial(n, p):
    """Legendre's formula for v_p(n!)."""
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v


def vp_array(arr, p, cap):
    """Elementwise valuation of an integer array, capped at ``cap`` (zero -> cap)."""
    arr = np.asarray(arr)
    v = np.zeros(arr.shape, dtype=np.int64)
    q = 1
    for _ in range(cap):
        q *= p
        v += (arr % q == 0).astype(np.int64)
    return v


def _check_prime_precision(p, M):
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ConfigError(f"prime: {p!r} is not a prime")
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise ConfigError(f"precision: {M!r} must be an integer >= 1")


@dataclass(frozen=True)
class PadicScalar:
    p: int
    M: int
    r: int
    M_eff: int

    def __post_init__(self):
        if not 0 <= self.M_eff <= self.M:
            raise PadicError(f"effective precision {self.M_eff} outside [0, {self.M}]")
        object.__setattr__(self, "r", int(self.r) % self.p ** self.M_eff)

    @property
    def modulus(self):
        return self.p ** self.M_eff

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise PadicError("mixing different primes")
            return other
        if isinstance(other, (int, np.integer)):
            return PadicScalar(self.p, self.M, int(other) % self.p ** self.M, self.M)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        eff = min(self.M_eff, other.M_eff)
        return PadicScalar(self.p, min(self.M, other.M), self.r + other.r, eff)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.p, self.M, -self.r, self.M_eff)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = min(self.M, other.M)
        # an error of size p**eff in one factor is scaled by the other factor
        eff = min(M, self.M_eff + valuation(other), other.M_eff + valuation(self))
        return PadicScalar(self.p, M, self.r * other.r, eff)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        q = self.p ** min(self.M_eff, other.M_eff)
        return (self.r - other.r) % q == 0

    def __hash__(self):
        return hash((self.p, self.r, self.M_eff))

    def reduce(self, M):
        """The same value at (at most) M digits."""
        M = min(M, self.M)
        return PadicScalar(self.p, M, self.r, min(self.M_eff, M))

    def is_unit(self):
        return self.M_eff > 0 and self.r % self.p != 0

    def __int__(self):
        return self.r

    def __repr__(self):
        return f"{self.r} (mod {self.p}^{self.M_eff})"


def make_scalar(p, M, n):
    _check_prime_precision(p, M)
    return PadicScalar(int(p), int(M), int(n) % p ** M, int(M))


def valuation(a):
    """Valuation of a; ``a.M_eff`` stands for "at least M_eff" (zero residue)."""
    if a.r == 0:
        return a.M_eff
    return vp(a.r, a.p)


def unit_inverse(a):
    if not a.is_unit():
        raise NotInvertibleError(f"{a!r} is not a unit in Z_{a.p}")
    return PadicScalar(a.p, a.M, pow(a.r, -1, a.modulus), a.M_eff)


@dataclass(frozen=True)
class PadicNumber:
    """p**shift * unit, for the few places where negative powers of p appear.

    ``unit`` is a PadicScalar of valuation 0, or zero.  Absolute precision is
    ``shift + unit.M_eff``.
    """
    shift: int
    unit: PadicScalar

    @classmethod
    def from_scalar(cls, a):
        v = valuation(a)
        if v >= a.M_eff:
            return cls(a.M_eff, PadicScalar(a.p, a.M, 0, 0))
        return cls(v, PadicScalar(a.p, a.M, a.r // a.p ** v, a.M_eff - v))

    @property
    def absolute_precision(self):
        return self.shift + self.unit.M_eff

    def valuation(self):
        return self.absolute_precision if self.unit.r == 0 else self.shift

    def scale_p(self, k):
        return PadicNumber(self.shift + k, self.unit)

    def __mul__(self, other):
        if isinstance(other, PadicScalar):
            other = PadicNumber.from_scalar(other)
        return PadicNumber(self.shift + other.shift, self.unit * other.unit)

    def to_scalar(self):
        if self.shift < 0 and self.unit.r != 0:
            raise NotInvertibleError(f"p^{self.shift} * unit is not integral")
        eff = max(0, min(self.unit.M, self.absolute_precision))
        r = self.unit.r * self.unit.p ** self.shift if self.shift >= 0 else 0
        return PadicScalar(self.unit.p, self.unit.M, r, eff)


@dataclass(frozen=True)
class Ring:
    """Z/p^M (``plain``) or (Z/p^M)[q]/(q^(degree+1)) with sigma(q) = q^p (``polyq``).

    Ring elements are stored as integer vectors of length ``width`` (the
    q-coefficients); the plain ring has width 1.
    """
    p: int
    M: int
    kind: str = "plain"
    degree: int = 0

    def __post_init__(self):
        _check_prime_precision(self.p, self.M)
        if self.kind not in ("plain", "polyq"):
            raise ConfigError(f"ring: unknown ring tag {self.kind!r}")
        if self.kind == "plain" and self.degree != 0:
            raise ConfigError("ring: the plain ring has no q-degree")
        if self.degree < 0:
            raise ConfigError("ring: q-degree bound must be >= 0")

    @classmethod
    def plain(cls, p, M):
        return cls(p, M)

    @classmethod
    def polyq(cls, p, M, degree):
        return cls(p, M, "polyq", degree)

    @property
    def modulus(self):
        return self.p ** self.M

    @property
    def width(self):
        return self.degree + 1

    @property
    def dtype(self):
        return np.int64 if self.modulus < INT64_MODULUS_LIMIT else object

    def with_precision(self, M):
        return Ring(self.p, M, self.kind, self.degree)

    def tag(self):
        return "plain" if self.kind == "plain" else f"polyq:{self.degree}"

    def zeros(self, shape):
        return np.zeros(tuple(shape) + (self.width,), dtype=self.dtype)

    def array(self, values):
        """Integer array reduced into the ring's storage dtype."""
        arr = np.array(values, dtype=object) % self.modulus
        return arr.astype(self.dtype)

    def vector(self, value):
        """Ring-element payload from an int or a sequence of q-coefficients."""
        if isinstance(value, (int, np.integer)):
            vec = [int(value)] + [0] * self.degree
        else:
            vec = [int(c) for c in value]
            if len(vec) > self.width:
                if any(vec[self.width:]):
                    raise ConfigError(f"ring: q-degree of {value!r} exceeds bound {self.degree}")
                vec = vec[:self.width]
            vec += [0] * (self.width - len(vec))
        return self.array(vec)

    def mul_arrays(self, a, b):
        """Coefficientwise ring product of broadcastable arrays with a trailing ring axis."""
        m = self.modulus
        if self.kind == "plain":
            return (a * b) % m
        w = self.width
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=self.dtype)
        for i in range(w):
            out[..., i:] = (out[..., i:] + a[..., i:i + 1] * b[..., :w - i]) % m
        return out

    def frobenius_array(self, a):
        """sigma applied along the trailing ring axis."""
        if self.kind == "plain":
            return a.copy()
        out = np.zeros_like(a)
        for j in range(0, self.width):
            if self.p * j > self.degree:
                break
            out[..., self.p * j] = a[..., j]
        return out


@dataclass(frozen=True, eq=False)
class RingElement:
    ring: Ring
    value: tuple
    prec: int

    def __post_init__(self):
        q = self.ring.p ** self.prec
        object.__setattr__(self, "value", tuple(int(c) % q for c in self.value))

    @classmethod
    def of(cls, ring, value, prec=None):
        return cls(ring, tuple(ring.vector(value)), ring.M if prec is None else prec)

    def _coerce(self, other):
        if isinstance(other, RingElement):
            return other
        return RingElement.of(self.ring, other)

    def __add__(self, other):
        other = self._coerce(other)
        vec = self.ring.array(self.value) + self.ring.array(other.value)
        return RingElement(self.ring, tuple(vec), min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.ring, tuple(-self.ring.array(self.value)), self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.ring.array(self.value), self.ring.array(other.value)
        prod = self.ring.mul_arrays(a, b)
        return RingElement(self.ring, tuple(prod), min(self.prec, other.prec))

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        q = self.ring.p ** min(self.prec, other.prec)
        return all((a - b) % q == 0 for a, b in zip(self.value, other.value))

    def __hash__(self):
        return hash(self.value)

    def is_zero(self):
        return not any(self.value)

    def scalar(self):
        """The q^0 coefficient as a PadicScalar."""
        return PadicScalar(self.ring.p, self.ring.M, self.value[0], self.prec)

    def __repr__(self):
        if self.ring.kind == "plain":
            return f"{self.value[0]} (mod {self.ring.p}^{self.prec})"
        terms = [f"{c}q^{j}" for j, c in enumerate(self.value) if c]
        return f"({' + '.join(terms) or '0'}) (mod {self.ring.p}^{self.prec})"


def frobenius(x):
    vec = x.ring.frobenius_array(x.ring.array(x.value))
    return RingElement(x.ring, tuple(vec), x.prec)
