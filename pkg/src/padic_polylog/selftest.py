"""Invariant suite at small parameters, run by ``padic-polylog selftest``."""

import random
from math import comb, factorial

from .logsheaf import (
    basis_element, connection, dp_multiply, frobenius_inverse, frobenius_section,
    frobenius_structure, raise_level, rho_section, transition, verify_polylog,
)
from .measures import (
    amice, cyclotomic_trace, divide_by_x, is_unit_supported, moment, restrict_units, stabilize,
)
from .padic import Ring
from .polylog import cross_check, ode_orders, working_order
from .samples import random_dirac, random_eisenstein, random_psi_kernel, random_series
from .series import Series, inv_derive, substitute_p


def check_amice(rng):
    for p in (2, 3, 5):
        ring = Ring.plain(p, 4)
        d = random_dirac(rng, ring)
        m = amice(d, (6, 6))
        for k in range(4):
            for l in range(4):
                if moment(m, k, l) != d.brute_moment(k, l):
                    return False
    return True


def check_restrict(rng):
    for p in (2, 3, 5):
        ring = Ring.plain(p, 3)
        m = amice(random_dirac(rng, ring, arity=1), working_order(ring, 6, 0))
        r = restrict_units(m)
        if not (is_unit_supported(r) and restrict_units(r) == r):
            return False
    return True


def check_trace(rng):
    for p in (2, 3, 5):
        ring = Ring.plain(p, 3)
        f = random_psi_kernel(rng, ring, 3 * (p - 1) + p)
        for s0 in (0, p, p * p):
            t = cyclotomic_trace(f, s0)
            if not t.is_zero() or t.prec < ring.M:
                return False
    return True


def check_divide(rng):
    for p in (2, 3, 5):
        ring = Ring.plain(p, 3)
        m = restrict_units(amice(random_dirac(rng, ring, arity=1), working_order(ring, 6, 0)))
        if inv_derive(divide_by_x(m, 1)) != m:
            return False
    return True


def check_eisenstein(rng):
    for p in (2, 3, 5):
        for ring in (Ring.plain(p, 3), Ring.polyq(p, 3, 3)):
            _, th = random_eisenstein(rng, ring, 6, 2)
            if stabilize(th) != restrict_units(th):
                return False
    return True


def check_two_solvers(rng):
    for p in (2, 3, 5):
        ring = Ring.plain(p, 3)
        N, n = 5, 3
        N2, G = ode_orders(ring, N, n)
        d = random_dirac(rng, ring, units=True)
        big = Ring.plain(p, 3 + G)
        from .measures import dirac_combination
        d_big = dirac_combination(big, [(t.x.r, t.y.r, t.c.value) for t in d.terms])
        rep = cross_check(amice(d, (N2, n)), n, theta_ode=amice(d_big, (N2, n)), order=N)
        if not rep.passed:
            return False
    return True


def check_verify(rng):
    for p in (2, 3, 5):
        for ring in (Ring.plain(p, 3), Ring.polyq(p, 3, 2)):
            N, n = 5, 3
            _, th = random_eisenstein(rng, ring, N, n)
            for mode in ("restrict", "stabilize"):
                if not verify_polylog(th, n, mode, order=N).passed:
                    return False
    return True


def check_frobenius(rng):
    ring = Ring.plain(3, 4)
    for k in range(3):
        for l in range(3):
            b = basis_element(ring, 4, 4, k, l, 1)
            if frobenius_inverse(frobenius_structure(b)).series(k, l) != b.series(k, l):
                return False
    f = random_series(rng, ring, 8)
    sec = frobenius_section(basis_element(ring, 8, 2, 1, 0, f))
    return sec.series(1, 0) == substitute_p(f)


def check_divided_powers(rng):
    ring = Ring.plain(5, 4)
    for i, j, k, l in ((1, 0, 1, 0), (1, 1, 1, 1), (2, 1, 0, 3)):
        prod = dp_multiply(basis_element(ring, 2, i + j, i, j), basis_element(ring, 2, k + l, k, l))
        want = Series.one(ring, 2).scale(comb(i + k, i) * comb(j + l, j))
        if prod.series(i + k, j + l) != want:
            return False
    acc = basis_element(ring, 2, 1, 1, 0)
    for kk in range(2, 5):
        acc = dp_multiply(acc, basis_element(ring, 2, 1, 1, 0))
        if acc.series(kk, 0) != Series.one(ring, 2).scale(factorial(kk)):
            return False
    return True


def check_leibniz(rng):
    """connection = d on coefficients + multiplication by w^[0,1] (x) w, so
    connection(ab) + ab w^[0,1] = connection(a) b + a connection(b)."""
    ring = Ring.plain(3, 4)
    a = basis_element(ring, 6, 1, 1, 0, random_series(rng, ring, 6))
    a = a + basis_element(ring, 6, 1, 0, 1, random_series(rng, ring, 6))
    b = basis_element(ring, 6, 1, 0, 0, random_series(rng, ring, 6))
    b = b + basis_element(ring, 6, 1, 0, 1, random_series(rng, ring, 6))
    n = 2
    ab = dp_multiply(a, b)
    w01 = basis_element(ring, 6, 1, 0, 1, form=1)
    lhs = connection(ab, clip="drop") + dp_multiply(ab, w01, level=n)
    rhs = dp_multiply(connection(raise_level(a, n), clip="drop"), b, level=n) + \
        dp_multiply(raise_level(a, n), connection(raise_level(b, n), clip="drop"), level=n)
    return all(lhs.series(*kl) == rhs.series(*kl) for kl in lhs.cells() if lhs.get(*kl) is not None)


def check_transition(rng):
    ring = Ring.plain(2, 3)
    N, n = 4, 3
    d = random_dirac(rng, ring, units=True)
    th = amice(d, (working_order(ring, N, n), n))
    top = rho_section(th, n)
    low = rho_section(th, n - 1)
    down = transition(top)
    return all(down.series(*kl) == low.series(*kl) for kl in low.cells())


CHECKS = (
    ("amice round-trip", check_amice),
    ("restriction is a projection onto ker psi", check_restrict),
    ("psi-kernel series have zero cyclotomic trace", check_trace),
    ("divide_by_x inverts the invariant derivation", check_divide),
    ("stabilize = restrict on Eisenstein-like measures", check_eisenstein),
    ("closed form = ODE solution", check_two_solvers),
    ("connection(rho) = (1 - Phi)(l_n)", check_verify),
    ("Frobenius structure and lift", check_frobenius),
    ("divided-power product law", check_divided_powers),
    ("Leibniz rule for the connection", check_leibniz),
    ("grid transition", check_transition),
)


def run(seed=0):
    """Run every check; returns a list of (name, passed)."""
    rng = random.Random(seed)
    return [(name, bool(fn(rng))) for name, fn in CHECKS]
