"""Truncated power series in S (and T) over a Ring, with per-coefficient precision.

A Series stores, for every monomial of degree at most the truncation order,
a residue and a precision ``a``: the residue agrees with the true coefficient
modulo p**a.  Coefficients above the truncation order are unknown but are
assumed integral, so every lossy operation below can bound what the missing
tail contributes.  "Valid order" is derived from this profile rather than
tracked separately.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import PadicError, PrecisionError
from .padic import Ring, RingElement, vp, vp_array, vp_factorial

INF = 10 ** 9
VARS = {"S": 0, "T": 1}


def _powers_of(p, exps):
    """p ** exps elementwise, exact for any size."""
    exps = np.asarray(exps)
    if p ** int(exps.max(initial=0)) < 2 ** 62:
        return np.power(np.int64(p), exps.astype(np.int64))
    return np.array([p ** int(e) for e in exps.ravel()], dtype=object).reshape(exps.shape)


class Series:
    __slots__ = ("ring", "coeffs", "prec")

    def __init__(self, ring, coeffs, prec=None):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim not in (2, 3) or coeffs.shape[-1] != ring.width:
            raise PadicError(f"coefficient array of shape {coeffs.shape} does not fit {ring}")
        shape = coeffs.shape[:-1]
        if prec is None:
            prec = np.full(shape, ring.M, dtype=np.int64)
        prec = np.clip(np.broadcast_to(np.asarray(prec, dtype=np.int64), shape), 0, ring.M)
        q = _powers_of(ring.p, prec)[..., None]
        self.ring = ring
        self.coeffs = (coeffs.astype(object) % q).astype(ring.dtype) if ring.dtype is object \
            else (coeffs.astype(np.int64) % q)
        self.prec = prec.copy()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_table(cls, ring, table, prec=None):
        """Build from nested lists; leaves are ints or tuples of q-coefficients."""
        def leaf(x):
            return list(ring.vector(x if isinstance(x, (int, np.integer)) else tuple(x)))

        def walk(x):
            if isinstance(x, list):
                return [walk(y) for y in x]
            return leaf(x)

        return cls(ring, ring.array(walk(list(table))), prec)

    @classmethod
    def zero(cls, ring, orders):
        return cls(ring, ring.zeros(_shape(orders)))

    @classmethod
    def one(cls, ring, orders):
        c = ring.zeros(_shape(orders))
        c[(0,) * c.ndim] = 1
        return cls(ring, c)

    @classmethod
    def variable(cls, ring, orders, name="S"):
        c = ring.zeros(_shape(orders))
        idx = [0] * (c.ndim - 1)
        idx[VARS[name]] = 1
        c[tuple(idx) + (0,)] = 1
        return cls(ring, c)

    # -- shape --------------------------------------------------------------

    @property
    def arity(self):
        return self.prec.ndim

    @property
    def orders(self):
        return tuple(n - 1 for n in self.prec.shape)

    @property
    def N(self):
        return self.orders[0]

    def _axis(self, var):
        ax = VARS[var]
        if ax >= self.arity:
            raise PadicError(f"series has no variable {var}")
        return ax

    # -- access -------------------------------------------------------------

    def coefficient(self, *idx):
        return RingElement(self.ring, tuple(self.coeffs[idx]), int(self.prec[idx]))

    def residues(self):
        """Nested int lists of the q^0 residues (the whole payload for the plain ring)."""
        return self.coeffs[..., 0].astype(object).tolist()

    def is_zero(self):
        """True iff every coefficient is zero modulo its precision."""
        return not self.coeffs.any()

    def effective_precision(self):
        return int(self.prec.min())

    def valid_order(self, target=None):
        """Largest total degree d with every coefficient of degree <= d known to ``target`` digits."""
        target = self.ring.M if target is None else target
        deg = _total_degree(self.prec.shape)
        bad = deg[self.prec < target]
        top = int(deg.max())
        return top if bad.size == 0 else int(bad.min()) - 1

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if other.ring != self.ring or other.prec.shape != self.prec.shape:
            raise PadicError("series live over different rings or truncation orders")

    def __add__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        self._check(other)
        return Series(self.ring, (self.coeffs + other.coeffs) % self.ring.modulus,
                      np.minimum(self.prec, other.prec))

    def __neg__(self):
        return Series(self.ring, (-self.coeffs) % self.ring.modulus, self.prec)

    def __sub__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Series):
            return _series_product(self, other)
        if isinstance(other, RingElement):
            return self.times_element(other)
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, n):
        """Multiplication by an integer; multiplying by p**v gains v digits up to M."""
        ring = self.ring
        if n % ring.modulus == 0:
            return Series.zero(ring, self.orders)
        v = vp(n, ring.p)
        c = (self.coeffs * (n % ring.modulus)) % ring.modulus
        return Series(ring, c, np.minimum(ring.M, self.prec + v))

    def times_element(self, c):
        ring = self.ring
        cv = ring.vector(c.value)
        vc = min(vp(int(x), ring.p, ring.M) for x in cv) if any(cv) else ring.M
        prod = ring.mul_arrays(self.coeffs, cv.reshape((1,) * self.arity + (-1,)))
        vcoef = vp_array(self.coeffs, ring.p, ring.M).min(axis=-1)
        prec = np.minimum(np.minimum(self.prec + vc, c.prec + vcoef), ring.M)
        return Series(ring, prod, prec)

    def frobenius(self):
        return Series(self.ring, self.ring.frobenius_array(self.coeffs), self.prec)

    # -- change of shape / ring ---------------------------------------------

    def reduce(self, M):
        """Same series over the ring of precision M (<= current)."""
        ring = self.ring.with_precision(min(M, self.ring.M))
        return Series(ring, ring.array(self.coeffs), np.minimum(self.prec, ring.M))

    def to_ring(self, ring):
        """Embed a series into another ring with the same prime and precision (q^0 slot)."""
        if (ring.p, ring.M) != (self.ring.p, self.ring.M):
            raise PadicError("embedding requires matching prime and precision")
        if ring == self.ring:
            return self
        c = ring.zeros(self.prec.shape)
        w = min(ring.width, self.ring.width)
        c[..., :w] = self.coeffs[..., :w]
        return Series(ring, c, self.prec)

    def padded(self, order, var="S"):
        """Extend the truncation order with unknown (precision 0) coefficients."""
        ax = self._axis(var)
        n = self.orders[ax]
        if order <= n:
            return self.truncated(order, var)
        extra = list(self.prec.shape)
        extra[ax] = order - n
        c = np.concatenate([self.coeffs, self.ring.zeros(extra)], axis=ax)
        a = np.concatenate([self.prec, np.zeros(extra, dtype=np.int64)], axis=ax)
        return Series(self.ring, c, a)

    def truncated(self, order, var="S"):
        ax = self._axis(var)
        sl = [slice(None)] * self.arity
        sl[ax] = slice(0, order + 1)
        return Series(self.ring, self.coeffs[tuple(sl)], self.prec[tuple(sl)])

    def at_zero(self, var="S"):
        """Set ``var`` to 0: a Series in the remaining variable, or a RingElement."""
        ax = self._axis(var)
        if self.arity == 1:
            return self.coefficient(0)
        c = np.take(self.coeffs, 0, axis=ax)
        a = np.take(self.prec, 0, axis=ax)
        return Series(self.ring, c, a)

    def slice_T(self, j):
        """Coefficient of T^j of a two-variable series, as a series in S."""
        return Series(self.ring, self.coeffs[:, j], self.prec[:, j])

    @classmethod
    def stack_T(cls, columns):
        c = np.stack([s.coeffs for s in columns], axis=1)
        a = np.stack([s.prec for s in columns], axis=1)
        return cls(columns[0].ring, c, a)

    # -- comparison ---------------------------------------------------------

    def compare(self, other, target=None):
        return compare(self, other, target)

    def agrees(self, other):
        """Equal modulo the precision of every coefficient."""
        return compare(self, other).valuation is None

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.agrees(other)

    __hash__ = None

    def __repr__(self):
        return f"Series({self.ring.tag()}, p={self.ring.p}, M={self.ring.M}, orders={self.orders}, " \
               f"residues={self.residues()}, prec={self.prec.tolist()})"


def _shape(orders):
    if isinstance(orders, (int, np.integer)):
        return (int(orders) + 1,)
    return tuple(int(n) + 1 for n in orders)


def _total_degree(shape):
    grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
    return sum(grids)


def _series_product(f, g):
    f._check(g)
    ring = f.ring
    shape = f.prec.shape
    out = ring.zeros(shape)
    for idx in np.ndindex(*shape):
        fv = f.coeffs[idx]
        if not fv.any():
            continue
        dest = tuple(slice(i, None) for i in idx)
        src = tuple(slice(0, n - i) for i, n in zip(idx, shape))
        out[dest] = (out[dest] + ring.mul_arrays(fv, g.coeffs[src])) % ring.modulus
    pf, pg = f.prec, g.prec
    for ax in range(f.arity):
        pf = np.minimum.accumulate(pf, axis=ax)
        pg = np.minimum.accumulate(pg, axis=ax)
    return Series(ring, out, np.minimum(pf, pg))


@dataclass(frozen=True)
class Comparison:
    """Outcome of comparing two series coefficientwise.

    ``valuation`` is the smallest valuation of a difference coefficient that is
    certainly nonzero (None when there is none); ``order`` is the largest total
    degree up to which both sides are known to ``target`` digits.
    """
    valuation: object
    order: int
    target: int

    @property
    def ok(self):
        return (self.valuation is None or self.valuation >= self.target) and self.order >= 0


def compare(a, b, target=None):
    a._check(b)
    diff = a - b
    target = a.ring.M if target is None else target
    nz = diff.coeffs.any(axis=-1)
    if nz.any():
        v = vp_array(diff.coeffs, a.ring.p, a.ring.M).min(axis=-1)
        valuation = int(v[nz].min())
    else:
        valuation = None
    return Comparison(valuation, diff.valid_order(target), target)


def agree(a, b):
    return compare(a, b).valuation is None


# -- integer tables ------------------------------------------------------------


@lru_cache(maxsize=None)
def p_series_coeffs(p, N):
    """[p](S) = (1+S)^p - 1 truncated at degree N, as exact integers."""
    return tuple(comb(p, m) if 1 <= m <= p else 0 for m in range(N + 1))


@lru_cache(maxsize=None)
def _p_series_powers(p, N):
    """Exact integer matrix P[j, m] = coefficient of S^m in [p](S)^j, and its valuations."""
    base = p_series_coeffs(p, N)
    rows = [[1] + [0] * N]
    for _ in range(N):
        prev = rows[-1]
        nxt = [0] * (N + 1)
        for i, c in enumerate(prev):
            if c:
                for k in range(1, N + 1 - i):
                    if base[k]:
                        nxt[i + k] += c * base[k]
        rows.append(nxt)
    P = np.array(rows, dtype=object)
    V = np.array([[vp(c, p, INF) for c in row] for row in rows], dtype=np.int64)
    return P, V


@lru_cache(maxsize=None)
def _psi_matrix(p, N):
    """L[j, m] = coefficient of X^j in psi(S^m), j <= N // p, m <= N, and valuations.

    psi(S^m) = sum over i divisible by p of C(m, i) (-1)^(m-i) (1+X)^(i/p).
    """
    K = N // p
    L = [[0] * (N + 1) for _ in range(K + 1)]
    for m in range(N + 1):
        for y in range(m // p + 1):
            c = comb(m, p * y) * (-1) ** (m - p * y)
            for j in range(min(y, K) + 1):
                L[j][m] += c * comb(y, j)
    Lm = np.array(L, dtype=object)
    V = np.array([[vp(c, p, INF) for c in row] for row in L], dtype=np.int64)
    return Lm, V


@lru_cache(maxsize=None)
def _vp_range(p, n):
    """(v_p(m) for m = 0..n) with v_p(0) = INF."""
    return np.array([vp(m, p, INF) for m in range(n + 1)], dtype=np.int64)


def _apply_matrix(ring, A, coeffs, ax):
    """out[m] = sum_j A[m, j] * coeffs[j] along axis ``ax``, reduced mod p^M."""
    A = ring.array(A)
    moved = np.moveaxis(coeffs, ax, 0)
    out = np.tensordot(A, moved, axes=([1], [0])) % ring.modulus
    return np.moveaxis(out.astype(ring.dtype), 0, ax)


def _min_plus(a, V, ax):
    """out[m] = min_j (a[j] + V[j, m]) along axis ``ax``."""
    moved = np.moveaxis(a, ax, 0)
    extra = (1,) * (moved.ndim - 1)
    stacked = moved[:, None, ...] + V.reshape(V.shape + extra)
    return np.moveaxis(stacked.min(axis=0), 0, ax)


# -- operations ------------------------------------------------------------------


def p_series(ring, N):
    return Series.from_table(ring, list(p_series_coeffs(ring.p, N)))


def _derive_step_prec(a, vm, vm1, M):
    nxt = np.concatenate([a[1:], np.zeros((1,) + a.shape[1:], dtype=np.int64)])
    extra = (slice(None),) + (None,) * (a.ndim - 1)
    return np.minimum(np.minimum(a + vm[extra], nxt + vm1[extra]), M)


def inv_derive(f, var="S"):
    """(1 + var) d/d(var).  The top coefficient loses what the unknown tail contributes."""
    ax = f._axis(var)
    ring = f.ring
    N = f.orders[ax]
    m = np.arange(N + 1)
    c = np.moveaxis(f.coeffs, ax, 0)
    extra = (slice(None),) + (None,) * (c.ndim - 1)
    nxt = np.concatenate([c[1:], np.zeros((1,) + c.shape[1:], dtype=c.dtype)])
    out = (m[extra].astype(c.dtype) * c + (m + 1)[extra].astype(c.dtype) * nxt) % ring.modulus
    vr = _vp_range(ring.p, N + 1)
    a = _derive_step_prec(np.moveaxis(f.prec, ax, 0), vr[:-1], vr[1:], ring.M)
    return Series(ring, np.moveaxis(out, 0, ax), np.moveaxis(a, 0, ax))


@lru_cache(maxsize=256)
def _derive_matrix_power(p, M, N, e):
    """Matrix of the e-th power of (1+S)d/dS on series truncated at N, mod p^M."""
    mod = p ** M
    dtype = np.int64 if mod < 2 ** 26 else object
    D = np.zeros((N + 1, N + 1), dtype=dtype)
    for m in range(N + 1):
        D[m, m] = m % mod
        if m + 1 <= N:
            D[m, m + 1] = (m + 1) % mod
    R = np.eye(N + 1, dtype=dtype)
    while e:
        if e & 1:
            R = (R @ D) % mod
        D = (D @ D) % mod
        e >>= 1
    return R


def _derive_power_prec(a, p, M, e):
    """Iterate the derivative precision rule e times, short-cutting the eventual cycle."""
    N = a.shape[0] - 1
    vr = _vp_range(p, N + 1)
    vm, vm1 = vr[:-1], vr[1:]
    seen = {}
    step = 0
    while step < e:
        key = a.tobytes()
        if key in seen:
            period = step - seen[key]
            remaining = (e - step) % period
            for _ in range(remaining):
                a = _derive_step_prec(a, vm, vm1, M)
            return a
        seen[key] = step
        a = _derive_step_prec(a, vm, vm1, M)
        step += 1
    return a


def inv_derive_power(f, e, var="S"):
    """e-fold (1+var)d/d(var) by binary powering of its matrix; e may be huge."""
    if e < 0:
        raise PadicError("exponent must be nonnegative")
    if e == 0:
        return f
    ax = f._axis(var)
    ring = f.ring
    N = f.orders[ax]
    R = _derive_matrix_power(ring.p, ring.M, N, int(e))
    out = _apply_matrix(ring, R, f.coeffs, ax)
    a = _derive_power_prec(np.moveaxis(f.prec, ax, 0), ring.p, ring.M, int(e))
    return Series(ring, out, np.moveaxis(a, 0, ax))


def substitute_p(f, var="S", order=None):
    """f with ``var`` replaced by [p](var).

    ``order`` sets the output truncation; coefficients of f beyond its own
    order count as unknown, and their contribution is bounded by the
    valuations of the powers of [p].
    """
    ax = f._axis(var)
    ring = f.ring
    N = f.orders[ax] if order is None else order
    f = f.padded(N, var)
    P, V = _p_series_powers(ring.p, N)
    out = _apply_matrix(ring, P.T, f.coeffs, ax)
    a = np.minimum(_min_plus(f.prec, V, ax), ring.M)
    return Series(ring, out, a)


def psi(f):
    """Left inverse of substitute_p: g_0 in f = sum_i (1+S)^i g_i([p](S)).

    Computed from the exact Mahler-type matrix of psi on monomials.  A
    coefficient S^m of the unknown tail (m > N) reaches X^j only with valuation
    at least floor(m/p) - j, which bounds the output precision.  Acts per
    T-coefficient on two-variable series; output order is N // p in S.
    """
    ring = f.ring
    N = f.N
    L, V = _psi_matrix(ring.p, N)
    out = _apply_matrix(ring, L, f.coeffs, 0)
    a = _min_plus(f.prec, V.T, 0)
    K = N // ring.p
    tail = (N + 1) // ring.p - np.arange(K + 1)
    tail = tail.reshape((K + 1,) + (1,) * (f.arity - 1))
    a = np.clip(np.minimum(np.minimum(a, tail), ring.M), 0, None)
    return Series(ring, out, a)


def psi_decompose(f):
    """All of g_0..g_{p-1} for the truncated system, by digit extraction and Newton lifting.

    Works on the first p*K coefficients (K = (N+1) // p) with each g_i
    truncated at degree K-1: a square system, unimodular mod p because
    [p](S) = S^p mod p.  Each round reads one p-adic digit of the residual,
    solves the mod-p block system and lifts.  Returns p one-variable series.
    """
    ring = f.ring
    if f.arity != 1:
        raise PadicError("psi_decompose expects a one-variable series")
    p, M = ring.p, ring.M
    K = (f.N + 1) // p
    if K == 0:
        raise PrecisionError("truncation order too small for a single block")
    n = p * K
    target = np.moveaxis(f.coeffs[:n].astype(object), -1, 0)  # (w, pK)
    width = target.shape[0]
    G = np.zeros((p, width, K), dtype=object)
    for t in range(M):
        residual = (target - _recompose(G, p, n)) % ring.modulus
        digit = (residual // p ** t) % p
        blocks = digit.reshape(width, K, p)
        D = np.zeros((p, width, K), dtype=object)
        # degree p*j + r of sum_i (1+S)^i D_i(S^p) is sum_{i >= r} C(i, r) D_i[j]
        for r in reversed(range(p)):
            acc = blocks[:, :, r].copy()
            for i in range(r + 1, p):
                acc = acc - comb(i, r) * D[i]
            D[r] = acc % p
        G = G + p ** t * D
    a = int(f.prec[:n].min())
    return [Series(ring, ring.array(np.moveaxis(G[i], 0, -1)), a) for i in range(p)]


def psi_recompose(gs, order):
    """sum_i (1+S)^i g_i([p](S)) truncated at ``order``."""
    ring = gs[0].ring
    p = ring.p
    K = gs[0].N + 1
    arr = np.stack([np.moveaxis(g.coeffs.astype(object), -1, 0) for g in gs])
    out = _recompose(arr, p, order + 1)
    a = np.full(order + 1, min(g.effective_precision() for g in gs), dtype=np.int64)
    if order >= K:
        # the unknown tails of the g_i enter through [p](S)^j, j >= K, and (1+S)^i only raises degree
        _, V = _p_series_powers(p, order)
        tail = np.minimum.accumulate(V[K:].min(axis=0))
        a = np.minimum(a, tail)
    return Series(ring, ring.array(np.moveaxis(out, 0, -1)), a)


def _recompose(gs, p, n):
    """sum_i (1+S)^i g_i([p](S)) truncated at n terms; gs has shape (p, w, K)."""
    width, K = gs.shape[1], gs.shape[2]
    P, _ = _p_series_powers(p, max(n - 1, K - 1))
    P = P[:K, :n]
    out = np.zeros((width, n), dtype=object)
    for i in range(p):
        sub = gs[i].dot(P)
        binom = np.array([comb(i, r) for r in range(n)], dtype=object)
        for w in range(width):
            out[w] += np.convolve(sub[w], binom)[:n]
    return out


def binomial_exp(x, N, M):
    """(1+S)^x truncated at N, each coefficient correct mod p^M.

    x must carry G = v_p(N!) guard digits beyond M: the binomial polynomial
    C(., m) maps p^(M+G)-close arguments to p^M-close values.
    """
    p = x.p
    G = vp_factorial(N, p)
    if x.M_eff < M + G:
        raise PrecisionError(f"binomial_exp needs {M + G} digits of the exponent, got {x.M_eff}")
    X = x.r
    ring = Ring.plain(p, M)
    return Series.from_table(ring, [comb(X, m) for m in range(N + 1)])


def moment_extract(f, var, k):
    if k > f.orders[f._axis(var)]:
        raise PadicError(f"moment order {k} exceeds truncation order")
    for _ in range(k):
        f = inv_derive(f, var)
    return f.at_zero(var)


def integrate_trace_zero(f):
    """The solution F of (1+S)F' = f with psi(F) = 0.

    Coefficient recursion F_{m+1} = (f_m - m F_m)/(m+1) from F_0 = 0, then the
    constant fixed by psi.  Division by m+1 costs v_p(m+1) digits, so inputs
    should carry v_p(N!) guard digits.  Requires psi(f) = 0.
    """
    if f.arity != 1:
        raise PadicError("integrate_trace_zero expects a one-variable series")
    ring = f.ring
    p, M, N = ring.p, ring.M, f.N
    c = f.coeffs.astype(object)
    F = np.zeros_like(c)
    aF = np.zeros(N + 1, dtype=np.int64)
    aF[0] = M
    for m in range(N):
        num = c[m] - m * F[m]
        a_num = min(int(f.prec[m]), int(aF[m]) + vp(m, p, INF))
        v = vp(m + 1, p)
        a_new = a_num - v
        if a_new <= 0:
            F[m + 1] = 0
            aF[m + 1] = 0
            continue
        if any(int(r) % p ** v for r in num % p ** a_num):
            raise PadicError("(1+S)F' = f has no integral solution: input is not trace-zero")
        unit = (m + 1) // p ** v
        q = p ** a_new
        F[m + 1] = ((num % p ** a_num) // p ** v) * pow(unit, -1, q) % q
        aF[m + 1] = a_new
    part = Series(ring, ring.array(F), aF)
    const = psi(part).coefficient(0)
    out = part.coeffs.copy()
    out[0] = ring.array(-np.array(const.value, dtype=object))
    prec = part.prec.copy()
    prec[0] = const.prec
    return Series(ring, out, prec)
