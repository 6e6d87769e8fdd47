"""Sections of the logarithm sheaves on a tubular neighbourhood.

A section of level n is sum_{k+l<=n} e_(k,l)(s) w^[k,l] (times the invariant
1-form w for 1-forms).  Each coefficient is stored as p^shift * series so that
the p^-l of the Frobenius structure stays exact.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ClippedCoefficientError, PadicError
from .padic import vp
from .polylog import g_columns, grid_cells, moment_grid_closed
from .report import Record, Report
from .series import Series, inv_derive, substitute_p


@dataclass(frozen=True)
class LogSection:
    level: int
    entries: dict = field(hash=False)  # (k, l) -> (shift, Series)
    form: int = 0  # 0 for functions, 1 for multiples of w

    def __post_init__(self):
        if self.form not in (0, 1):
            raise PadicError("only 0-forms and 1-forms are modelled")
        for (k, l) in self.entries:
            if k < 0 or l < 0 or k + l > self.level:
                raise PadicError(f"index ({k}, {l}) outside level {self.level}")

    @property
    def ring(self):
        return next(iter(self.entries.values()))[1].ring

    @property
    def order(self):
        return next(iter(self.entries.values()))[1].N

    def cells(self):
        return grid_cells(self.level)

    def get(self, k, l):
        """(shift, series) of the coefficient of w^[k,l]; None when absent."""
        return self.entries.get((k, l))

    def series(self, k, l):
        """The coefficient as an integral Series (zero if absent)."""
        e = self.entries.get((k, l))
        if e is None:
            some = next(iter(self.entries.values()))[1]
            return Series.zero(some.ring, some.orders)
        shift, s = e
        if shift < 0:
            if s.is_zero():
                return Series.zero(s.ring, s.orders)
            raise PadicError(f"coefficient of w^[{k},{l}] is not integral (p^{shift})")
        return s.scale(s.ring.p ** shift) if shift else s

    def normalized(self):
        return LogSection(self.level, {kl: _normalize(*e) for kl, e in self.entries.items()
                                       if not e[1].is_zero() or e[1].effective_precision() < e[1].ring.M},
                          self.form)

    def equals(self, other):
        """Equal as values, coefficient by coefficient, modulo the known precision."""
        _compatible(self, other)
        return all(_combine([(c,) + e for c, e in ((1, self.get(*kl)), (-1, other.get(*kl)))
                             if e is not None])[1].is_zero()
                   for kl in set(self.entries) | set(other.entries))

    def __add__(self, other):
        _compatible(self, other)
        keys = sorted(set(self.entries) | set(other.entries))
        out = {}
        for kl in keys:
            terms = [(1,) + e for e in (self.entries.get(kl), other.entries.get(kl)) if e is not None]
            out[kl] = _combine(terms)
        return LogSection(self.level, out, self.form)

    def __neg__(self):
        return LogSection(self.level, {kl: (s, -e) for kl, (s, e) in self.entries.items()}, self.form)

    def __sub__(self, other):
        return self + (-other)


def _compatible(a, b):
    if a.level != b.level or a.form != b.form:
        raise PadicError("sections differ in level or form degree")


def _combine(terms):
    """sum of c * p^shift * series over (c, shift, series) terms, as (shift, series)."""
    base = min(t[1] for t in terms)
    p = terms[0][2].ring.p
    total = None
    for c, shift, s in terms:
        s = s.scale(c * p ** (shift - base))
        total = s if total is None else total + s
    return base, total


def _normalize(shift, s):
    """Absorb powers of p dividing the series into the shift (only while shift < 0)."""
    if shift >= 0:
        return shift, s
    ring = s.ring
    p = ring.p
    coeffs = s.coeffs.astype(object)
    j = 0
    while shift + j < 0:
        # divisible by p^(j+1) as far as the precision certifies
        if (s.prec < j + 1).any() or any(int(c) % p ** (j + 1) for c in coeffs.ravel()):
            break
        j += 1
    if j == 0:
        return shift, s
    c = coeffs // p ** j
    return shift + j, Series(ring, ring.array(c), np.maximum(s.prec - j, 0))


def basis_element(ring, order, level, k, l, coeff=1, form=0):
    """coeff * w^[k,l]; coeff is an int or a one-variable Series."""
    if isinstance(coeff, Series):
        s = coeff
    else:
        s = Series.one(ring, order).scale(coeff)
    return LogSection(level, {(k, l): (0, s)}, form)


def zero_section(ring, order, level, form=0):
    return LogSection(level, {(0, 0): (0, Series.zero(ring, order))}, form)


def from_grid(grid):
    """sum e_(k,l) w^[k,l] for a MomentGrid."""
    return LogSection(grid.level, {kl: (0, e) for kl, e in grid.entries.items()}, 0)


def connection(sec, clip="error"):
    """The 1-form with coefficients d e_(k,l) + l e_(k,l-1) on w^[k,l] (x) w.

    Terms (l+1) e_(k,l) w^[k,l+1] with k + l = n leave the level; with
    clip="error" a nonzero one raises, with clip="drop" it is discarded (the
    image in the level-n quotient).
    """
    if sec.form != 0:
        raise PadicError("the connection is applied to 0-forms")
    if clip not in ("error", "drop"):
        raise PadicError(f"clip must be 'error' or 'drop', got {clip!r}")
    out = {}
    for k, l in sec.cells():
        terms = []
        e = sec.get(k, l)
        if e is not None:
            terms.append((1, e[0], inv_derive(e[1])))
        below = sec.get(k, l - 1) if l >= 1 else None
        if below is not None:
            terms.append((l, below[0], below[1]))
        if terms:
            out[(k, l)] = _combine(terms)
        if k + l == sec.level and e is not None and clip == "error":
            pushed = e[1].scale(l + 1)
            if not pushed.is_zero():
                raise ClippedCoefficientError(
                    f"connection pushes a nonzero coefficient from w^[{k},{l}] past level {sec.level}")
    return LogSection(sec.level, out, 1)


def lift(series):
    """The Frobenius lift on functions: f(s) -> sigma(f)([p](s))."""
    return substitute_p(series).frobenius()


def frobenius_structure(sec):
    """Phi on the basis: w^[k,l] -> p^-l w^[k,l], coefficients untouched."""
    return LogSection(sec.level, {(k, l): _normalize(s - l, e) for (k, l), (s, e) in sec.entries.items()},
                      sec.form)


def frobenius_inverse(sec):
    """Inverse of frobenius_structure: w^[k,l] -> p^l w^[k,l]."""
    return LogSection(sec.level, {(k, l): (s + l, e) for (k, l), (s, e) in sec.entries.items()}, sec.form)


def frobenius_section(sec):
    """Phi(sum e w^[k,l]) = sum p^-l sigma(e)([p](s)) w^[k,l]."""
    return LogSection(sec.level, {(k, l): _normalize(s - l, lift(e))
                                  for (k, l), (s, e) in sec.entries.items()}, sec.form)


def transition(sec):
    if sec.level < 1:
        raise PadicError("no transition below level 0")
    keep = {kl: e for kl, e in sec.entries.items() if sum(kl) < sec.level}
    if not keep:
        e = next(iter(sec.entries.values()))[1]
        keep = {(0, 0): (0, Series.zero(e.ring, e.orders))}
    return LogSection(sec.level - 1, keep, sec.form)


def raise_level(sec, n):
    if n < sec.level:
        raise PadicError("raise_level cannot lower the level; use transition")
    return LogSection(n, dict(sec.entries), sec.form)


def dp_multiply(a, b, level=None, bound=None):
    """Divided-power product: w^[k,l] w^[k',l'] = C(k+k',k) C(l+l',l) w^[k+k',l+l'].

    The result has level a.level + b.level, or ``level`` to read it in a
    quotient (terms above are dropped).  ``bound`` caps the allowed level.
    """
    if a.form + b.form > 1:
        raise PadicError("no forms of degree 2")
    n = a.level + b.level if level is None else level
    if bound is not None and n > bound:
        raise PadicError(f"product level {n} exceeds the bound {bound}")
    acc = {}
    for (k, l), (sa, ea) in sorted(a.entries.items()):
        for (k2, l2), (sb, eb) in sorted(b.entries.items()):
            if k + k2 + l + l2 > n:
                continue
            c = comb(k + k2, k) * comb(l + l2, l)
            acc.setdefault((k + k2, l + l2), []).append((c, sa + sb, ea * eb))
    if not acc:
        e = next(iter(a.entries.values()))[1]
        acc = {(0, 0): [(1, 0, Series.zero(e.ring, e.orders))]}
    return LogSection(n, {kl: _combine(t) for kl, t in acc.items()}, a.form + b.form)


def rhs_one_minus_phi(theta, n, mode="restrict"):
    """sum_k g_k w^[k,0] (x) w."""
    gs = g_columns(theta, n, mode)
    return LogSection(n, {(k, 0): (0, g) for k, g in enumerate(gs)}, 1)


def rho_section(theta, n, mode="restrict", workers=1):
    return from_grid(moment_grid_closed(theta, n, mode, workers))


def compare_sections(a, b, title, order=None, target=None):
    """One record per (k, l): valuation of the certified difference of the coefficients."""
    _compatible(a, b)
    ring = a.ring
    target = ring.M if target is None else target
    records = []
    for k, l in a.cells():
        ea, eb = a.get(k, l), b.get(k, l)
        if ea is None and eb is None:
            continue
        terms = [(c,) + e for c, e in ((1, ea), (-1, eb)) if e is not None]
        shift, diff = _combine(terms)
        if order is not None:
            diff = diff.truncated(order)
        records.append(_record(k, l, shift, diff, target))
    return Report(title, target, tuple(records))


def _record(k, l, shift, diff, target):
    """Outcome for p^shift * diff, judged against ``target`` absolute digits."""
    nz = diff.coeffs.any(axis=-1)
    if nz.any():
        valuation = _min_valuation(diff) + shift
    else:
        valuation = None
    precision = diff.effective_precision() + shift
    order = diff.valid_order(target - shift) if target - shift > 0 else diff.N
    ok = (valuation is None or valuation >= target) and order >= 0
    return Record(k, l, "agree", valuation, precision, order, ok)


def _min_valuation(s):
    p = s.ring.p
    return min(vp(int(c), p) for c in s.coeffs.ravel() if int(c))


def verify_polylog(theta, n, mode="restrict", rho=None, order=None, workers=1):
    """Check connection(rho) = (1 - Phi)(l_n) coefficientwise.

    The connection is read in the level-n quotient.  ``rho`` defaults to the
    closed-form section; pass a modified one to see where it fails.
    """
    if rho is None:
        rho = rho_section(theta, n, mode, workers)
    lhs = connection(rho, clip="drop")
    rhs = rhs_one_minus_phi(theta, n, mode)
    return compare_sections(lhs, rhs, f"connection(rho) = (1 - Phi)(l_{n})", order)
