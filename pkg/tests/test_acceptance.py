"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import os
import random
import sys
import time
from math import comb, factorial

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from padic_polylog import Ring, Series, make_scalar, unit_inverse
from padic_polylog.logsheaf import (
    basis_element, connection, dp_multiply, frobenius_inverse, frobenius_section,
    frobenius_structure, rho_section, rhs_one_minus_phi, verify_polylog,
)
from padic_polylog.measures import (
    amice, cyclotomic_trace, dirac_combination, divide_by_x, eisenstein_like, moment,
    restrict_units, stabilize,
)
from padic_polylog.polylog import (
    cross_check, g_series, moment_closed, moment_grid_closed, ode_orders, working_order,
)
from padic_polylog.samples import (
    random_dirac, random_eisenstein, random_psi_kernel, random_seed, random_series,
)
from padic_polylog.series import binomial_exp, inv_derive, p_series, psi, substitute_p
from oracles import compose_p

PRIMES = (2, 3, 5)


def announce(capsys, number, name, ok, detail=""):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else "")
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def _moment_table(m, top):
    """All moments with k + l <= top, sharing the derivation chains."""
    out = {}
    col = m
    for k in range(top + 1):
        t = col.at_zero("S") if m.arity == 2 else None
        for l in range(top + 1 - k):
            out[(k, l)] = t.coefficient(0)
            if l < top - k:
                t = inv_derive(t)
        col = inv_derive(col, "S")
    return out


def criterion_1(capsys=None):
    rng = random.Random(1)
    start = time.perf_counter()
    bad = 0
    for _ in range(500):
        p = rng.choice(PRIMES)
        M = rng.randint(1, 6)
        N = rng.randint(10, 48)
        ring = Ring.plain(p, M)
        d = random_dirac(rng, ring)
        m = amice(d, (N, 10))
        for (k, l), got in _moment_table(m, 10).items():
            want = sum(t.c.value[0] * t.x.r ** k * t.y.r ** l for t in d.terms) % ring.modulus
            if got.value != (want,) or got.prec != M:
                bad += 1
    elapsed = time.perf_counter() - start
    announce(capsys, 1, "Amice round-trip", bad == 0 and elapsed < 30,
             f"500 combinations, {bad} mismatches, {elapsed:.1f}s")


def criterion_2(capsys=None):
    rng = random.Random(2)
    ok = True
    for _ in range(60):
        p = rng.choice(PRIMES)
        ring = Ring.plain(p, rng.randint(1, 4))
        m = amice(random_dirac(rng, ring), (4 * p * ring.M, 3))
        r = restrict_units(m)
        ok &= psi(r).is_zero() and restrict_units(r) == r
        units = m - substitute_p(psi(m), order=m.N)
        ok &= r == units
    count = 0
    for i in range(100):
        p = PRIMES[i % 3]
        ring = Ring.plain(p, 3) if i % 2 else Ring.polyq(p, 3, 3)
        seed = random_seed(rng, ring)
        theta = eisenstein_like(seed, (12, 4))
        ok &= stabilize(theta) == restrict_units(theta) == amice(seed, (12, 4))
        count += 1
    announce(capsys, 2, "restriction: projection onto ker psi; stabilize = restrict on Eisenstein-like",
             ok, f"{count} Eisenstein-like measures")


def criterion_3(capsys=None):
    rng = random.Random(3)
    ok = True
    for i in range(100):
        p = PRIMES[i % 3]
        M = rng.randint(1, 4)
        N = M * (p - 1) + rng.randint(0, 3 * p)
        ring = Ring.plain(p, M)
        f = random_psi_kernel(rng, ring, N)
        ok &= psi(f).is_zero()
        for s0 in (0, p, p * p):
            t = cyclotomic_trace(f, s0)
            ok &= t.is_zero() and t.prec == M
    announce(capsys, 3, "psi-kernel series have vanishing cyclotomic trace", ok, "100 series, 3 points")


def criterion_4(capsys=None):
    rng = random.Random(4)
    ok = True
    for i in range(200):
        p = PRIMES[i % 3]
        M = rng.randint(1, 4)
        n = rng.randint(0, 6)
        N = 5
        ring = Ring.plain(p, M)
        d = random_dirac(rng, ring, units=True)
        N2, G = ode_orders(ring, N, n)
        big = ring.with_precision(M + G)
        lift = dirac_combination(big, [(t.x, t.y, t.c.value) for t in d.terms])
        report = cross_check(amice(d, (N2, n)), n, theta_ode=amice(lift, (N2, n)), order=N)
        ok &= report.passed
    announce(capsys, 4, "closed form = ODE solution with trace-zero normalization", ok, "200 thetas")


def criterion_5(capsys=None):
    rng = random.Random(5)
    ok = True
    runs = 0
    N = 4
    for p in PRIMES:
        for n in range(7):
            for ring in (Ring.plain(p, 3), Ring.polyq(p, 3, 3)):
                th = amice(dirac_combination(ring, [(1, 1, 1)]), (working_order(ring, N, n), n))
                ok &= verify_polylog(th, n, order=N).passed
                d = random_dirac(rng, ring, units=True)
                th = amice(d, (working_order(ring, N, n), n))
                ok &= verify_polylog(th, n, order=N).passed
                _, th = random_eisenstein(rng, ring, N, n)
                a = verify_polylog(th, n, "restrict", order=N)
                b = verify_polylog(th, n, "stabilize", order=N)
                ok &= a.passed and b.passed and a.to_text() == b.to_text()
                runs += 4
    # a perturbed rho fails exactly in the coefficient of w^[0,1] (x) w
    ring = Ring.plain(3, 4)
    th = amice(random_dirac(rng, ring, units=True), (working_order(ring, N, 3), 3))
    rho = rho_section(th, 3)
    bumped = rho + basis_element(ring, rho.order, 3, 0, 0, 1)
    failed = [(r.k, r.l) for r in verify_polylog(th, 3, rho=bumped, order=N).failures()]
    ok &= failed == [(0, 1)]
    announce(capsys, 5, "connection(rho_n) = (1 - Phi)(l_n)", ok,
             f"{runs} verifications, perturbation fails at {failed}")


def criterion_6(capsys=None):
    rng = random.Random(6)
    ok = True
    for ring in (Ring.plain(2, 4), Ring.plain(3, 4), Ring.polyq(5, 3, 4)):
        n = 5
        for k in range(n + 1):
            for l in range(n + 1 - k):
                b = basis_element(ring, 3, n, k, l, 1)
                ok &= frobenius_inverse(frobenius_structure(b)).equals(b)
                ok &= frobenius_structure(frobenius_inverse(b)).equals(b)
    for i in range(100):
        p = PRIMES[i % 3]
        ring = Ring.plain(p, rng.randint(1, 5))
        f = random_series(rng, ring, 12)
        got = frobenius_section(basis_element(ring, 12, 1, 1, 0, f)).series(1, 0)
        want = compose_p([int(c) for c in f.coeffs[:, 0]], p, 12)
        ok &= got == Series.from_table(ring, want)
    announce(capsys, 6, "Frobenius structure inverse and lift f -> sigma(f)([p](S))", ok,
             "100 random series")


def criterion_7(capsys=None):
    ring = Ring.plain(7, 4)
    n = 6
    ok = True
    for i in range(n + 1):
        for j in range(n + 1 - i):
            for k in range(n + 1 - i - j):
                for l in range(n + 1 - i - j - k):
                    prod = dp_multiply(basis_element(ring, 1, i + j, i, j),
                                       basis_element(ring, 1, k + l, k, l), bound=n)
                    want = comb(i + k, i) * comb(j + l, j) % ring.modulus
                    ok &= prod.series(i + k, j + l).residues()[0] == want
    w10 = basis_element(ring, 1, 1, 1, 0)
    acc = w10
    for k in range(2, n + 1):
        acc = dp_multiply(acc, w10)
        ok &= acc.series(k, 0).residues()[0] == factorial(k) % ring.modulus
    announce(capsys, 7, "divided-power product law", ok, f"all indices up to level {n}")


def _exact(series, N, want):
    s = series.truncated(N)
    res = [r[0] if isinstance(r, list) else r for r in s.residues()]
    return res == want and s.effective_precision() == s.ring.M


def criterion_8(capsys=None):
    checks = {}
    checks["unit_inverse(3) = 11 mod 16"] = unit_inverse(make_scalar(2, 4, 3)).r == 11
    checks["[3](S) = 3S + 3S^2 + S^3"] = p_series(Ring.plain(3, 2), 4).residues() == [0, 3, 3, 1, 0]
    checks["(1+S)^(1/2), p=3, M=2"] = binomial_exp(make_scalar(3, 9, pow(2, -1, 3 ** 9)), 2, 2) \
        .residues() == [1, 5, 1]
    r52 = Ring.plain(5, 2)
    m = amice(dirac_combination(r52, [(3, 1)]), 4)
    checks["amice(d_3) and its 2nd moment"] = m.residues() == [1, 3, 3, 1, 0] and moment(m, 2).value == (9,)
    m2 = amice(dirac_combination(r52, [(2, 3, 1)]), (4, 4))
    checks["mixed moment of d_(2,3)"] = moment(m2, 1, 2).value == (18,)
    checks["total mass of 3 d_4"] = moment(amice(dirac_combination(r52, [(4, 3)]), 4), 0).value == (3,)
    r33 = Ring.plain(3, 3)
    W = working_order(r33, 6, 0)
    one = lambda pts, N: amice(dirac_combination(r33, pts), N)
    checks["restrict(d_1 + d_3) = 1+S"] = _exact(restrict_units(one([(1, 1), (3, 1)], W)), 6,
                                                 [1, 1, 0, 0, 0, 0, 0])
    checks["divide_by_x(d_2) = 14(1+S)^2"] = _exact(divide_by_x(one([(2, 1)], W)), 6,
                                                    [14, 1, 14, 0, 0, 0, 0])
    checks["divide_by_x(d_2 + d_4)"] = _exact(divide_by_x(one([(2, 1), (4, 1)], W)), 6,
                                              [21, 2, 2, 1, 7, 0, 0])
    r2 = Ring.plain(2, 3)
    checks["restrict(d_2) = 0 at p=2"] = restrict_units(
        amice(dirac_combination(r2, [(2, 1)]), working_order(r2, 6, 0))).is_zero()
    m5 = amice(dirac_combination(r52, [(2, 3, 1)]), (working_order(r52, 4, 2), 2))
    checks["e_(1,1) for d_(2,3), p=5"] = _exact(moment_closed(m5, 1, 1), 4, [18, 11, 18, 0, 0])
    m12 = amice(dirac_combination(r33, [(1, 2, 1)]), (working_order(r33, 4, 2), 2))
    checks["e_(1,2) for d_(1,2)"] = _exact(moment_closed(m12, 1, 2), 4, [4, 4, 0, 0, 0])
    checks["g_1 for d_(1,2)"] = _exact(g_series(m12, 1), 4, [2, 2, 0, 0, 0])
    ok_grid = True
    for p in PRIMES:
        ring = Ring.plain(p, 4)
        th = amice(dirac_combination(ring, [(1, 1, 1)]), (working_order(ring, 5, 6), 6))
        for (k, l), e in moment_grid_closed(th, 6).entries.items():
            c = (-1) ** l * factorial(l) % ring.modulus
            ok_grid &= _exact(e, 5, [c, c, 0, 0, 0, 0])
    checks["d_(1,1) grid e_(k,l) = (-1)^l l! (1+s)"] = ok_grid
    s = Series.variable(r33, 3)
    c = connection(basis_element(r33, 3, 1, 0, 0, s), clip="drop")
    checks["connection of s w^[0,0]"] = c.series(0, 0).residues() == [1, 1, 0, 0] and \
        c.series(0, 1).residues() == [0, 1, 0, 0]
    r24 = Ring.plain(2, 4)
    fr = frobenius_section(basis_element(r24, 4, 1, 1, 0, Series.variable(r24, 4)))
    checks["Frobenius of s w^[1,0] at p=2"] = fr.series(1, 0).residues() == [0, 2, 1, 0, 0]
    checks["dp: w^[1,1] w^[1,1] = 4 w^[2,2]"] = dp_multiply(
        basis_element(r52, 1, 2, 1, 1), basis_element(r52, 1, 2, 1, 1)).series(2, 2).residues()[0] == 4
    th = amice(dirac_combination(r33, [(1, 2, 1)]), (working_order(r33, 4, 1), 1))
    rhs = rhs_one_minus_phi(th, 1)
    checks["(1 - Phi)(l_1) for d_(1,2)"] = _exact(rhs.series(0, 0), 4, [1, 1, 0, 0, 0]) and \
        _exact(rhs.series(1, 0), 4, [2, 2, 0, 0, 0])
    partial = eisenstein_like(dirac_combination(r2, [(1, 0, 1)]), (7, 0), terms=4)
    checks["Eisenstein-like partial sum for d_(1,0)"] = \
        [r[0] for r in partial.residues()] == [4, 7, 3, 4, 7, 0, 4, 0]
    bad = [name for name, ok in checks.items() if not ok]
    announce(capsys, 8, "shipped example values reproduce exactly", not bad,
             f"{len(checks) - len(bad)}/{len(checks)} examples" + (f"; failing: {bad}" if bad else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(8)])
def test_acceptance(criterion, capsys):
    criterion(capsys)


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        try:
            crit()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
