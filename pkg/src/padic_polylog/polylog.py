"""Moment functions e_(k,l)(s) = (-1)^l l! int y^k x^-(l+1) (1+s)^x dmu.

Two routes: the closed form (exact powers of the invariant derivation) and
the differential system solved coefficientwise with the trace-zero
normalization.  ``check_grid`` re-verifies the system on any grid.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

from .errors import PadicError
from .measures import MeasureSeries, divide_by_x, restrict_units, stabilize
from .padic import vp_factorial
from .report import Report, record
from .series import Series, integrate_trace_zero, inv_derive, moment_extract, psi

MODES = ("restrict", "stabilize")


@dataclass(frozen=True)
class MomentGrid:
    level: int
    entries: dict = field(hash=False)  # (k, l) -> one-variable Series, k + l <= level
    provenance: str = "closed"
    source: str = ""

    def __getitem__(self, kl):
        return self.entries[kl]

    def cells(self):
        return grid_cells(self.level)

    def truncated(self, order):
        """Same grid with every entry truncated in S."""
        return MomentGrid(self.level, {kl: e.truncated(order) for kl, e in self.entries.items()},
                          self.provenance, self.source)

    def transition(self):
        """The level n-1 grid: drop the entries with k + l = n."""
        if self.level < 1:
            raise PadicError("no transition below level 0")
        keep = {kl: e for kl, e in self.entries.items() if sum(kl) < self.level}
        return MomentGrid(self.level - 1, keep, self.provenance, self.source)

    def reduce(self, M):
        return MomentGrid(self.level, {kl: e.reduce(M) for kl, e in self.entries.items()},
                          self.provenance, self.source)

    def effective_precision(self):
        return min(e.effective_precision() for e in self.entries.values())


def grid_cells(n):
    return [(k, l) for k in range(n + 1) for l in range(n + 1 - k)]


def _check_mode(mode):
    if mode not in MODES:
        raise PadicError(f"mode must be one of {MODES}, got {mode!r}")


def restricted(theta, mode="restrict"):
    _check_mode(mode)
    if theta.arity != 2:
        raise PadicError("theta must be a two-variable series")
    return restrict_units(theta) if mode == "restrict" else stabilize(theta)


def g_series(theta, k, mode="restrict"):
    """int y^k (1+s)^x over the restricted measure."""
    return moment_extract(restricted(theta, mode), "T", k)


def g_columns(theta, n, mode="restrict"):
    r = restricted(theta, mode)
    return [moment_extract(r, "T", k) for k in range(n + 1)]


def _closed_from_g(g, l):
    sign = -1 if l % 2 else 1
    return divide_by_x(g, l + 1).scale(sign * factorial(l))


def moment_closed(theta, k, l, mode="restrict"):
    return _closed_from_g(g_series(theta, k, mode), l)


def _closed_column(args):
    g, n, k = args
    return [_closed_from_g(g, l) for l in range(n - k + 1)]


def _ode_column(args):
    g, n, k = args
    col = [integrate_trace_zero(g)]
    for l in range(1, n - k + 1):
        col.append(integrate_trace_zero(col[-1].scale(-l)))
    return col


def _grid(theta, n, mode, column, provenance, workers):
    if n < 0:
        raise PadicError("level must be >= 0")
    gs = g_columns(theta, n, mode)
    jobs = [(gs[k], n, k) for k in range(n + 1)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            cols = list(pool.map(column, jobs))
    else:
        cols = [column(j) for j in jobs]
    entries = {(k, l): MeasureSeries.wrap(e, provenance) for k, col in enumerate(cols)
               for l, e in enumerate(col)}
    return MomentGrid(n, entries, provenance, getattr(theta, "provenance", ""))


def moment_grid_closed(theta, n, mode="restrict", workers=1):
    return _grid(theta, n, mode, _closed_column, "closed", workers)


def moment_grid_ode(theta, n, mode="restrict", workers=1):
    """Solve the differential system column by column.

    Every integration divides by m+1, so theta should carry v_p(N!) guard
    digits per integration (see ``ode_guard``); reduce the result afterwards.
    """
    return _grid(theta, n, mode, _ode_column, "ode", workers)


def check_grid(grid, theta, mode="restrict", target=None):
    """Re-verify the system on a grid: (a) de_(k,0) = g_k, (b) de_(k,l) = -l e_(k,l-1), (c) psi(e) = 0."""
    n = grid.level
    gs = g_columns(theta, n, mode)
    records = []
    for k, l in grid.cells():
        e = grid[k, l]
        lhs = inv_derive(e)
        if l == 0:
            records.append(record(k, l, "a", lhs, gs[k], target))
        else:
            records.append(record(k, l, "b", lhs, grid[k, l - 1].scale(-l), target))
        ps = psi(e)
        records.append(record(k, l, "c", ps, Series.zero(ps.ring, ps.orders), target))
    return Report("differential system and trace-zero", _target(grid, target), tuple(records))


def compare_grids(a, b, target=None):
    records = tuple(record(k, l, "agree", a[k, l], b[k, l], target) for k, l in a.cells())
    return Report(f"{a.provenance} vs {b.provenance}", _target(a, target), records)


def _target(grid, target):
    return next(iter(grid.entries.values())).ring.M if target is None else target


def cross_check(theta, n, mode="restrict", theta_ode=None, order=None, workers=1):
    """Closed form against the ODE solution, plus conditions (a)-(c) on the closed form.

    ``theta_ode`` is the same measure over a ring with guard digits (defaults
    to theta itself); ``order`` truncates both grids before comparing.
    """
    closed = moment_grid_closed(theta, n, mode, workers)
    ode = moment_grid_ode(theta if theta_ode is None else theta_ode, n, mode, workers)
    M = theta.ring.M
    ode = ode.reduce(M)
    report = check_grid(closed, theta, mode)
    if order is not None:
        closed, ode = closed.truncated(order), ode.truncated(order)
    return compare_grids(closed, ode) + report


def _dry_theta(ring, N, n):
    return MeasureSeries(ring, ring.zeros((N + 1, n + 1)))


@lru_cache(maxsize=None)
def working_order(ring, N, n, mode="restrict"):
    """Smallest S-order N' >= N (stepping by p) at which g_k and the closed-form grid
    are exact up to degree N.

    Every precision rule is value independent, so a run on the zero series
    predicts the precision profile of any input.
    """
    p, M = ring.p, ring.M
    N2 = N
    while True:
        g = g_series(_dry_theta(ring, N2, n), 0, mode)
        col = [g] + _closed_column((g, n, 0))
        if all(int(e.prec[:N + 1].min()) >= M for e in col):
            return N2
        N2 += p


@lru_cache(maxsize=None)
def ode_orders(ring, N, n, mode="restrict"):
    """(S-order, guard digits) at which the ODE grid is exact mod p^M up to degree N."""
    p, M = ring.p, ring.M
    N2 = working_order(ring, N, n, mode)
    while True:
        G = vp_factorial(N2, p)
        for G in range(G, G + M + n + 2):
            big = ring.with_precision(M + G)
            col = _ode_column((g_series(_dry_theta(big, N2, n), 0, mode), n, 0))
            if all(int(e.prec[:N + 1].min()) >= M for e in col):
                return N2, G
        N2 += p
