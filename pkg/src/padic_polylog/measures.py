"""Measures on Z_p and Z_p^2 through their Amice transforms.

Finite Dirac combinations are the brute-force-checkable class: integrating a
polynomial against one is a finite weighted sum.  Everything else is a raw
Series regarded as a measure.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DivergentSeedError, NotUnitSupportedError, PadicError, PrecisionError
from .padic import PadicScalar, Ring, RingElement, make_scalar, vp, vp_factorial
from .series import (
    INF, Series, integrate_trace_zero, inv_derive_power, moment_extract, psi, substitute_p,
)

# integer Dirac points are stored with enough digits for truncation orders up to this
MAX_ORDER = 1000


@dataclass(frozen=True)
class DiracTerm:
    x: PadicScalar
    y: object  # PadicScalar, or None for one-variable combinations
    c: RingElement


@dataclass(frozen=True)
class DiracCombination:
    ring: Ring
    terms: tuple
    arity: int
    label: str = ""

    def brute_moment(self, k, l=0):
        """sum_i c_i x_i^k y_i^l, straight from the definition."""
        mod = self.ring.modulus
        total = RingElement.of(self.ring, 0)
        for t in self.terms:
            w = pow(t.x.r, k, mod)
            if t.y is not None:
                w = w * pow(t.y.r, l, mod) % mod
            elif l:
                raise PadicError("one-variable combination has no y-moments")
            total = total + t.c * w
        return total

    def integrate(self, fn):
        """sum_i c_i fn(x_i[, y_i]) for an integer-valued fn on integer representatives."""
        total = RingElement.of(self.ring, 0)
        for t in self.terms:
            args = (t.x.r,) if t.y is None else (t.x.r, t.y.r)
            total = total + t.c * int(fn(*args))
        return total

    def is_unit_supported(self):
        return all(t.x.is_unit() for t in self.terms)


def dirac_combination(ring, terms, guard=None, label=""):
    """Build a combination from (x, c) or (x, y, c) tuples.

    Points may be ints (stored with ``guard`` extra digits, enough for any
    order up to MAX_ORDER by default) or PadicScalars.  Coefficients are ints
    or q-coefficient sequences.  Duplicate points are merged.
    """
    p, M = ring.p, ring.M
    if guard is None:
        guard = vp_factorial(MAX_ORDER, p)
    arity = None
    merged = {}
    order = []
    for term in terms:
        if len(term) == 2:
            x, c = term
            y = None
        elif len(term) == 3:
            x, y, c = term
        else:
            raise PadicError(f"Dirac term {term!r} must be (x, c) or (x, y, c)")
        a = 1 if y is None else 2
        if arity is None:
            arity = a
        elif a != arity:
            raise PadicError("mixed one- and two-variable Dirac terms")
        xs = _point(p, M + guard, x)
        ys = None if y is None else _point(p, M + guard, y)
        key = (xs.r, xs.M_eff, None if ys is None else (ys.r, ys.M_eff))
        cv = RingElement.of(ring, c)
        if key in merged:
            merged[key] = (xs, ys, merged[key][2] + cv)
        else:
            merged[key] = (xs, ys, cv)
            order.append(key)
    kept = tuple(DiracTerm(*merged[k]) for k in order if not merged[k][2].is_zero())
    return DiracCombination(ring, kept, arity or 1, label)


def _point(p, digits, x):
    if isinstance(x, PadicScalar):
        return x
    return make_scalar(p, digits, int(x))


class MeasureSeries(Series):
    """A Series regarded as the Amice transform of a measure."""
    __slots__ = ("provenance",)

    def __init__(self, ring, coeffs, prec=None, provenance=""):
        super().__init__(ring, coeffs, prec)
        self.provenance = provenance

    @classmethod
    def wrap(cls, series, provenance):
        out = cls.__new__(cls)
        out.ring, out.coeffs, out.prec = series.ring, series.coeffs, series.prec
        out.provenance = provenance
        return out


def _binomial_row(x, N, M):
    p = x.p
    need = M + vp_factorial(N, p)
    if x.M_eff < need:
        raise PrecisionError(f"Dirac point {x!r} carries {x.M_eff} digits, order {N} needs {need}")
    mod = p ** M
    return np.array([comb(x.r, m) % mod for m in range(N + 1)], dtype=object)


def amice(d, orders):
    """sum_i c_i (1+S)^x_i (1+T)^y_i, truncated at ``orders`` (int, or (N_S, N_T))."""
    ring = d.ring
    if isinstance(orders, (int, np.integer)):
        orders = (int(orders),) * d.arity
    orders = tuple(orders)
    if len(orders) != d.arity and d.terms:
        raise PadicError(f"{d.arity}-variable combination needs {d.arity} truncation orders")
    shape = tuple(n + 1 for n in orders)
    acc = np.zeros(shape + (ring.width,), dtype=object)
    for t in d.terms:
        row = _binomial_row(t.x, orders[0], ring.M)
        if d.arity == 2:
            row = np.multiply.outer(row, _binomial_row(t.y, orders[1], ring.M))
        acc += np.multiply.outer(row, np.array(t.c.value, dtype=object))
    # coefficients carry the (full) precision of the c_i
    prec = min((t.c.prec for t in d.terms), default=ring.M)
    return MeasureSeries(ring, ring.array(acc), prec, provenance="dirac")


def moment(m, k, l=0):
    """integral of x^k y^l: iterated invariant derivation, then evaluation at 0."""
    out = moment_extract(m, "S", k)
    if m.arity == 2:
        out = moment_extract(out, "S", l)  # the remaining variable is T
    elif l:
        raise PadicError("one-variable measure has no y-moments")
    return out


def restrict_units(m):
    """Restriction to Z_p^x (in x): f - phi(psi(f))."""
    out = m - substitute_p(psi(m), order=m.N)
    return MeasureSeries.wrap(out, "restricted")


def stabilize(m):
    """theta(S, T) - sigma(theta)([p](S), T)."""
    out = m - substitute_p(m).frobenius()
    return MeasureSeries.wrap(out, "stabilized")


def is_unit_supported(m):
    return psi(m).is_zero()


def euler_exponent(p, M, times):
    """e >= M with x^e = x^(-times) mod p^M for every unit x.

    e >= M also annihilates (mod p^M) any mass on pZ_p hiding below the
    precision of a unit-supported input.
    """
    lam = p ** (M - 1) * (p - 1)
    e = (-times) % lam
    while e < M:
        e += lam
    return e


def divide_by_x(m, times=1):
    """Amice transform of x^(-times) m for unit-supported m (powers of the invariant derivation)."""
    if not is_unit_supported(m):
        raise NotUnitSupportedError("divide_by_x needs a measure supported on the units")
    ring = m.ring
    out = inv_derive_power(m, euler_exponent(ring.p, ring.M, times), "S")
    return MeasureSeries.wrap(out, "divided")


def divide_by_x_ode(m, times=1):
    """Oracle route for divide_by_x: solve (1+S)F' = f with psi(F) = 0, ``times`` times.

    Loses v_p(N!) digits along the way; feed it inputs with that many guard digits.
    """
    if not is_unit_supported(m):
        raise NotUnitSupportedError("divide_by_x needs a measure supported on the units")
    out = m
    for _ in range(times):
        if out.arity == 1:
            out = integrate_trace_zero(out)
        else:
            out = Series.stack_T([integrate_trace_zero(out.slice_T(j)) for j in range(out.orders[1] + 1)])
    return MeasureSeries.wrap(out, "divided-ode")


def _log_ceil(p, n):
    k, q = 0, 1
    while q < n:
        q *= p
        k += 1
    return k


def eisenstein_like(seed, orders, terms=None):
    """sum_j sigma^j(theta_seed)([p]^j(S), T): satisfies stabilize = restrict_units = seed.

    The sum converges only when sigma^j kills the y-marginal theta_seed(0, T)
    (for the plain ring: the y-marginal vanishes), in which case the j-th term
    is 0 mod p^M once j >= M + log_p N (+ log_p of the q-degree bound).
    Passing ``terms`` returns that many partial-sum terms without the check.
    """
    if not seed.is_unit_supported():
        raise NotUnitSupportedError("eisenstein_like needs a seed supported on Z_p^x")
    ring = seed.ring
    theta = amice(seed, orders)
    total, term = theta, theta
    if terms is not None:
        for _ in range(terms - 1):
            term = substitute_p(term).frobenius()
            total = total + term
        return MeasureSeries.wrap(total, "eisenstein-like (partial)")
    bound = ring.M + _log_ceil(ring.p, theta.N + 1) + _log_ceil(ring.p, ring.width) + 1
    for _ in range(bound):
        term = substitute_p(term).frobenius()
        if term.is_zero() and term.effective_precision() == ring.M:
            return MeasureSeries.wrap(total, "eisenstein-like")
        total = total + term
    raise DivergentSeedError("the y-marginal of the seed is not killed by sigma; the sum diverges")


@dataclass(frozen=True)
class CyclotomicElement:
    """Element of (Z/p^M)[zeta]/(Phi_p), coordinates in the basis 1, zeta, ..., zeta^(p-2).

    ``coords[i]`` is a ring payload (tuple of q-coefficients).
    """
    p: int
    M: int
    coords: tuple
    prec: int

    @property
    def is_rational(self):
        return not any(any(c) for c in self.coords[1:])

    def rational(self):
        return self.coords[0]

    def is_zero(self):
        q = self.p ** self.prec
        return all(int(x) % q == 0 for c in self.coords for x in c)


def _group_ring_value(f, s0):
    """f(zeta(1+s0) - 1) in Z[C_p] = Z[zeta]/(zeta^p - 1), by Horner; shape (p, width)."""
    ring = f.ring
    p, mod = ring.p, ring.modulus
    # u = zeta(1+s0) - 1 has integer coordinates, so a Horner step is a sum of rotations
    u = [0] * p
    u[0] = -1
    u[1 % p] += 1 + s0
    u = [c % mod for c in u]
    acc = np.zeros((p, ring.width), dtype=object)
    coeffs = f.coeffs.astype(object)
    for m in range(f.N, -1, -1):
        out = np.zeros_like(acc)
        for i, ui in enumerate(u):
            if ui:
                out = out + np.roll(acc, i, axis=0) * ui
        out[0] = out[0] + coeffs[m]
        acc = out % mod
    return acc


def _point_int(p, s0):
    s0 = s0.r if isinstance(s0, PadicScalar) else int(s0)
    if vp(s0, p, INF) < 1:
        raise PadicError("s0 must have positive valuation")
    return s0


def evaluate_at_primitive_root(f, s0):
    """f(zeta(1+s0) - 1) for a primitive p-th root of unity zeta, in (Z/p^M)[zeta]/(Phi_p).

    The precision recorded is the one of the trace (see cyclotomic_trace).
    """
    if f.arity != 1:
        raise PadicError("expected a one-variable series")
    ring = f.ring
    acc = _group_ring_value(f, _point_int(ring.p, s0))
    b = (acc[:-1] - acc[-1]) % ring.modulus
    return CyclotomicElement(ring.p, ring.M, tuple(tuple(int(x) for x in row) for row in b),
                             _trace_precision(f, _point_int(ring.p, s0)))


def _trace_precision(f, s0):
    """Digits of the trace certified by the coefficient precisions and the unknown tail.

    At a primitive zeta, u = zeta(1+s0) - 1 has valuation 1/(p-1): a coefficient
    known mod p^a_m at degree m contributes an error of pi-adic valuation
    (p-1) a_m + m, the tail at least N+1; a trace of an element of pi-valuation
    r is divisible by p^ceil(r/(p-1)).  At zeta = 1 the point s0 has valuation v0.
    """
    ring = f.ring
    p, M, N = ring.p, ring.M, f.N
    a = f.prec.astype(np.int64)
    m = np.arange(N + 1)
    r = min(int((a * (p - 1) + m).min()), N + 1)
    v0 = min(vp(s0, p, INF), M)
    at_one = min(int((a + m * v0).min()), (N + 1) * v0)
    return max(0, min(M, (r + p - 2) // (p - 1), at_one))


def cyclotomic_trace(f, s0):
    """sum over zeta^p = 1 of f(zeta(1+s0) - 1), with v_p(s0) >= 1.

    Computed as f(s0) plus the trace of f at a primitive zeta, the latter in
    the basis 1, zeta, ..., zeta^(p-2) where Tr(zeta^i) = p-1 for i = 0 and
    -1 otherwise.  Returns a rational CyclotomicElement.
    """
    if f.arity != 1:
        raise PadicError("cyclotomic_trace expects a one-variable series")
    ring = f.ring
    p, M = ring.p, ring.M
    if f.N < M * (p - 1):
        raise PrecisionError(f"truncation order {f.N} below M(p-1) = {M * (p - 1)}")
    s0 = _point_int(p, s0)
    mod = ring.modulus
    acc = _group_ring_value(f, s0)
    b = (acc[:-1] - acc[-1]) % mod  # zeta^(p-1) = -(1 + ... + zeta^(p-2))
    trace = ((p - 1) * b[0] - b[1:].sum(axis=0)) % mod
    at_one = acc.sum(axis=0) % mod
    total = (at_one + trace) % mod
    prec = _trace_precision(f, s0)
    q = p ** prec
    zero = tuple(0 for _ in range(ring.width))
    coords = (tuple(int(x) % q for x in total),) + (zero,) * (p - 2)
    return CyclotomicElement(p, M, coords, prec)
