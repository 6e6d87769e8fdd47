import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from padic_polylog import DivergentSeedError, NotUnitSupportedError, PrecisionError, Ring, Series
from padic_polylog.measures import (
    amice, cyclotomic_trace, dirac_combination, divide_by_x, divide_by_x_ode, eisenstein_like,
    euler_exponent, evaluate_at_primitive_root, is_unit_supported, moment, restrict_units,
    stabilize,
)
from padic_polylog.padic import make_scalar
from padic_polylog.polylog import working_order
from padic_polylog.samples import random_dirac, random_psi_kernel, random_seed
from padic_polylog.series import inv_derive, psi, substitute_p
from oracles import cyclotomic_sum, dirac_amice

primes = st.sampled_from([2, 3, 5])


def one_var(ring, pts, N):
    return amice(dirac_combination(ring, pts), N)


# -- examples ---------------------------------------------------------------------


def test_amice_of_a_point_and_its_moment():
    m = one_var(Ring.plain(5, 2), [(3, 1)], 4)
    assert m.residues() == [1, 3, 3, 1, 0]
    assert moment(m, 2).value == (9,)


def test_mixed_moment():
    m = amice(dirac_combination(Ring.plain(5, 2), [(2, 3, 1)]), (4, 4))
    assert moment(m, 1, 2).value == (18,)


def test_moment_of_s_and_total_mass():
    ring = Ring.plain(5, 2)
    assert moment(Series.variable(ring, 3), 1).value == (1,)
    assert moment(one_var(ring, [(4, 3)], 4), 0).value == (3,)


def test_duplicate_points_merge():
    ring = Ring.plain(3, 2)
    d = dirac_combination(ring, [(2, 1), (2, 4), (5, 3), (5, -3)])
    assert len(d.terms) == 1 and d.terms[0].c.value == (5,)


def test_guard_shortfall_is_an_error():
    ring = Ring.plain(2, 3)
    d = dirac_combination(ring, [(make_scalar(2, 4, 3), 1)])
    with pytest.raises(PrecisionError):
        amice(d, 6)


def test_restrict_examples():
    ring = Ring.plain(3, 3)
    N = 6
    W = working_order(ring, N, 0)
    r = restrict_units(one_var(ring, [(1, 1), (3, 1)], W)).truncated(N)
    assert r.residues() == [1, 1, 0, 0, 0, 0, 0] and r.effective_precision() == 3
    ring2 = Ring.plain(2, 3)
    assert restrict_units(one_var(ring2, [(2, 1)], working_order(ring2, N, 0))).is_zero()


def test_restrict_leaves_unit_supported_measures_alone():
    ring = Ring.plain(5, 3)
    m = one_var(ring, [(1, 2), (7, 3)], 30)
    assert restrict_units(m) == m


def test_stabilize_on_plain_ring_is_direct_substitution():
    ring = Ring.plain(3, 3)
    theta = amice(dirac_combination(ring, [(2, 1, 1)]), (8, 2))
    want = amice(dirac_combination(ring, [(2, 1, 1), (6, 1, -1)]), (8, 2))
    assert stabilize(theta) == want
    zero = Series.zero(ring, (8, 2))
    assert stabilize(zero).is_zero()


def test_unit_support():
    ring = Ring.plain(3, 3)
    assert is_unit_supported(one_var(ring, [(1, 1)], 12))
    assert not is_unit_supported(one_var(ring, [(3, 1)], 12))


def test_divide_by_x_examples():
    ring = Ring.plain(3, 3)
    N = 6
    W = working_order(ring, N, 0)
    out = divide_by_x(one_var(ring, [(2, 1)], W)).truncated(N)
    assert out == one_var(ring, [(2, 14)], N) and out.effective_precision() == 3
    out = divide_by_x(one_var(ring, [(2, 1), (4, 1)], W)).truncated(N)
    assert out == one_var(ring, [(2, 14), (4, 7)], N) and out.effective_precision() == 3
    one = one_var(ring, [(1, 1)], W)
    assert divide_by_x(one, 5).truncated(N) == one.truncated(N)


def test_divide_by_x_rejects_mass_on_p():
    ring = Ring.plain(3, 3)
    with pytest.raises(NotUnitSupportedError):
        divide_by_x(one_var(ring, [(3, 1)], 12))


@pytest.mark.parametrize("p, M, times", [(2, 1, 1), (2, 5, 3), (3, 4, 2), (5, 3, 7)])
def test_euler_exponent(p, M, times):
    e = euler_exponent(p, M, times)
    assert e >= M
    for x in range(1, 60):
        if x % p:
            assert pow(x, e + times, p ** M) == 1


def test_eisenstein_seed_with_mass_at_y_zero_diverges():
    ring = Ring.plain(2, 3)
    seed = dirac_combination(ring, [(1, 0, 1)])
    with pytest.raises(DivergentSeedError):
        eisenstein_like(seed, (7, 0))
    partial = eisenstein_like(seed, (7, 0), terms=4)
    # (1+S) + (1+S)^2 + (1+S)^4 + (1+S)^8 mod 8
    want = [sum(comb(2 ** j, m) for j in range(4)) % 8 for m in range(8)]
    assert partial.residues() == [[w] for w in want]
    assert stabilize(partial) != amice(seed, (7, 0))


def test_eisenstein_of_empty_seed_is_zero():
    ring = Ring.plain(3, 2)
    assert eisenstein_like(dirac_combination(ring, []), (6, 2)).is_zero()


def test_eisenstein_rejects_non_unit_seed():
    ring = Ring.plain(3, 2)
    with pytest.raises(NotUnitSupportedError):
        eisenstein_like(dirac_combination(ring, [(3, 1, 1)]), (6, 2))


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("kind", ["plain", "polyq"])
def test_stabilize_recovers_the_seed(p, kind):
    rng = random.Random(p)
    ring = Ring.plain(p, 3) if kind == "plain" else Ring.polyq(p, 3, 4)
    for _ in range(5):
        seed = random_seed(rng, ring)
        theta = eisenstein_like(seed, (10, 3))
        assert stabilize(theta) == amice(seed, (10, 3))
        assert restrict_units(theta) == stabilize(theta)


def test_cyclotomic_trace_examples():
    ring = Ring.plain(3, 3)
    for a in (1, 2, 4, 5):
        t = cyclotomic_trace(one_var(ring, [(a, 1)], 8), 0)
        assert t.is_zero() and t.prec == 3
    t = cyclotomic_trace(one_var(ring, [(3, 1)], 8), 0)
    assert t.rational() == (3,)


def test_cyclotomic_trace_needs_enough_terms():
    ring = Ring.plain(5, 3)
    with pytest.raises(PrecisionError):
        cyclotomic_trace(one_var(ring, [(1, 1)], 8), 0)


def test_primitive_root_value_of_zeta():
    # (1+S) at S = zeta - 1 is zeta
    ring = Ring.plain(5, 2)
    z = evaluate_at_primitive_root(one_var(ring, [(1, 1)], 8), 0)
    assert z.coords[1] == (1,) and not any(any(c) for i, c in enumerate(z.coords) if i != 1)


@settings(max_examples=40, deadline=None)
@given(primes, st.integers(1, 4), st.integers(0, 40), st.integers(0, 3), st.data())
def test_cyclotomic_trace_against_root_sum(p, M, extra, j, data):
    ring = Ring.plain(p, M)
    N = M * (p - 1) + extra
    coeffs = data.draw(st.lists(st.integers(0, ring.modulus - 1), min_size=N + 1, max_size=N + 1))
    f = Series.from_table(ring, coeffs)
    s0 = p ** j if j else 0
    t = cyclotomic_trace(f, s0)
    q = p ** t.prec
    assert t.rational()[0] % q == cyclotomic_sum(coeffs, s0, p, ring.modulus) % q


@settings(max_examples=40, deadline=None)
@given(primes, st.integers(1, 4), st.integers(0, 2 ** 32))
def test_psi_kernel_has_zero_trace(p, M, seed):
    ring = Ring.plain(p, M)
    f = random_psi_kernel(random.Random(seed), ring, M * (p - 1) + p)
    for s0 in (0, p, p * p):
        t = cyclotomic_trace(f, s0)
        assert t.is_zero() and t.prec == M


# -- properties -------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(primes, st.integers(1, 5), st.integers(0, 2 ** 32))
def test_amice_round_trip(p, M, seed):
    rng = random.Random(seed)
    ring = Ring.plain(p, M)
    d = random_dirac(rng, ring)
    m = amice(d, (6, 6))
    terms = [(t.x.r, t.y.r, t.c.value[0]) for t in d.terms]
    assert m.residues() == dirac_amice(terms, (6, 6), ring.modulus)
    for k in range(5):
        for l in range(5 - k):
            want = sum(c * x ** k * y ** l for x, y, c in terms) % ring.modulus
            assert moment(m, k, l).value == (want,)


@settings(max_examples=40, deadline=None)
@given(primes, st.integers(1, 4), st.integers(0, 2 ** 32))
def test_restriction_is_a_projection_onto_ker_psi(p, M, seed):
    ring = Ring.plain(p, M)
    d = random_dirac(random.Random(seed), ring)
    m = amice(d, (4 * p * M, 2))
    r = restrict_units(m)
    assert psi(r).is_zero()
    assert restrict_units(r) == r
    # and it removes exactly the mass on pZ_p
    units = dirac_combination(ring, [(t.x, t.y, t.c.value) for t in d.terms if t.x.is_unit()])
    assert r == amice(units, (4 * p * M, 2))


@settings(max_examples=40, deadline=None)
@given(primes, st.integers(1, 4), st.integers(0, 2 ** 32))
def test_inv_derive_multiplies_by_x(p, M, seed):
    ring = Ring.plain(p, M)
    m = amice(random_dirac(random.Random(seed), ring, arity=1), 12)
    d = inv_derive(m)
    for k in range(8):
        assert moment(d, k) == moment(m, k + 1)


@settings(max_examples=40, deadline=None)
@given(primes, st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32))
def test_divide_by_x_against_dirac_oracle_and_ode(p, M, times, seed):
    rng = random.Random(seed)
    ring = Ring.plain(p, M)
    N = 6
    d = random_dirac(rng, ring, arity=1, units=True)
    W = working_order(ring, N, times)
    m = amice(d, W)
    out = divide_by_x(m, times)
    assert inv_derive_times(out, times).truncated(N) == m.truncated(N)
    want = dirac_combination(ring, [(t.x, pow(t.x.r, -times, ring.modulus) * t.c.value[0])
                                    for t in d.terms])
    assert out.truncated(N) == amice(want, N)
    assert out.truncated(N).effective_precision() == M
    # the recursion oracle, run with guard digits
    from padic_polylog.padic import vp_factorial
    G = times * vp_factorial(W, p) + M
    big = ring.with_precision(M + G)
    m_big = amice(dirac_combination(big, [(t.x, t.c.value) for t in d.terms]), W)
    ode = divide_by_x_ode(m_big, times).reduce(M)
    assert ode.truncated(N) == out.truncated(N)


def inv_derive_times(f, n):
    for _ in range(n):
        f = inv_derive(f)
    return f


@settings(max_examples=30, deadline=None)
@given(primes, st.integers(0, 2 ** 32))
def test_substitution_is_amice_of_multiplication_by_p(p, seed):
    ring = Ring.plain(p, 3)
    d = random_dirac(random.Random(seed), ring, arity=1)
    N = 10
    pd = dirac_combination(ring, [(p * t.x.r, t.c.value) for t in d.terms])
    assert substitute_p(amice(d, N)) == amice(pd, N)
