"""Random measures for property checks: Dirac combinations, unit-supported
thetas and convergent Eisenstein-like seeds."""

from .measures import amice, dirac_combination, eisenstein_like
from .polylog import working_order
from .series import Series, psi_recompose


def _unit(rng, p, hi=500):
    while True:
        x = rng.randrange(1, hi)
        if x % p:
            return x


def _coeff(rng, ring, hi=None):
    hi = hi or ring.modulus
    return [rng.randrange(hi) for _ in range(ring.width)]


def random_dirac(rng, ring, terms=None, arity=2, units=False, hi=500):
    """Up to 8 terms with points in [0, hi) (units only if asked)."""
    n = rng.randint(1, 8) if terms is None else terms
    out = []
    for _ in range(n):
        x = _unit(rng, ring.p, hi) if units else rng.randrange(hi)
        pt = (x,) if arity == 1 else (x, rng.randrange(hi))
        out.append(pt + (_coeff(rng, ring),))
    return dirac_combination(ring, out)


def random_seed(rng, ring, pairs=None, hi=500):
    """Unit-supported seed whose y-marginal dies under sigma: pairs c(d_(x1,y) - d_(x2,y)),
    plus, for poly-q rings, terms with no q^0 part."""
    n = rng.randint(1, 4) if pairs is None else pairs
    terms = []
    for _ in range(n):
        y = rng.randrange(hi)
        c = _coeff(rng, ring)
        x1 = _unit(rng, ring.p, hi)
        x2 = _unit(rng, ring.p, hi)
        terms += [(x1, y, c), (x2, y, [-v for v in c])]
    if ring.width > 1:
        for _ in range(rng.randint(0, 2)):
            c = [0] + _coeff(rng, ring)[1:]
            terms.append((_unit(rng, ring.p, hi), rng.randrange(hi), c))
    return dirac_combination(ring, terms)


def random_unit_theta(rng, ring, N, n, mode="restrict"):
    """Two-variable Amice transform of a unit-supported Dirac combination at the
    working order for (N, n); returns (dirac, theta)."""
    d = random_dirac(rng, ring, units=True)
    return d, amice(d, (working_order(ring, N, n, mode), n))


def random_eisenstein(rng, ring, N, n):
    order = max(working_order(ring, N, n, "restrict"), working_order(ring, N, n, "stabilize"))
    seed = random_seed(rng, ring)
    return seed, eisenstein_like(seed, (order, n))


def random_series(rng, ring, orders):
    return Series(ring, ring.array(
        [[rng.randrange(ring.modulus) for _ in range(ring.width)] for _ in range((orders + 1))]))


def random_psi_kernel(rng, ring, N):
    """Exact element of ker psi: sum_{i=1}^{p-1} (1+S)^i g_i([p](S)), truncated at N."""
    K = N // ring.p + 1
    gs = [Series.zero(ring, K - 1)] + [random_series(rng, ring, K - 1) for _ in range(ring.p - 1)]
    return psi_recompose(gs, N)
