"""Measure description files and canonical output tables.

A description is line oriented; ``#`` starts a comment::

    prime 3
    precision 4
    orders 8 3          # N_S [N_T]
    ring plain          # or: ring polyq 4
    level 3             # optional
    mode restrict       # optional
    dirac 1 2 5         # x [y] c ; c may be q-coefficients "1,0,2"
    coeff 0 1 7         # or a raw table: i [j] value

Either Dirac terms or coefficient lines, not both.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MalformedInputError
from .padic import Ring, is_prime

FIELDS = ("prime", "precision", "orders", "ring", "level", "mode", "dirac", "coeff")


@dataclass
class Description:
    prime: object = None
    precision: object = None
    orders: object = None
    ring: object = None  # (kind, degree)
    level: object = None
    mode: object = None
    dirac: list = field(default_factory=list)  # tuples of ints, last entry a coefficient tuple
    coeffs: list = field(default_factory=list)  # (index tuple, coefficient tuple)


def _int(tok, lineno, what):
    try:
        return int(tok)
    except ValueError:
        raise MalformedInputError(f"line {lineno}: {what} {tok!r} is not a decimal integer") from None


def _coeff(tok, lineno):
    return tuple(_int(c, lineno, "coefficient") for c in tok.split(","))


def parse_description(text):
    d = Description()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        key, args = line[0].lower(), line[1:]
        if key not in FIELDS:
            raise MalformedInputError(f"line {lineno}: unknown field {line[0]!r}")
        if key in ("prime", "precision", "level"):
            if len(args) != 1:
                raise MalformedInputError(f"line {lineno}: {key} takes one integer")
            setattr(d, key, _int(args[0], lineno, key))
        elif key == "orders":
            if len(args) not in (1, 2):
                raise MalformedInputError(f"line {lineno}: orders takes N_S [N_T]")
            d.orders = tuple(_int(a, lineno, "order") for a in args)
        elif key == "ring":
            if not args or args[0] not in ("plain", "polyq") or len(args) != (1 if args[0] == "plain" else 2):
                raise MalformedInputError(f"line {lineno}: ring is 'plain' or 'polyq D'")
            d.ring = (args[0], _int(args[1], lineno, "q-degree") if args[0] == "polyq" else 0)
        elif key == "mode":
            if len(args) != 1:
                raise MalformedInputError(f"line {lineno}: mode takes one word")
            d.mode = args[0]
        elif key == "dirac":
            if len(args) not in (2, 3):
                raise MalformedInputError(f"line {lineno}: dirac takes x [y] c")
            pts = tuple(_int(a, lineno, "point") for a in args[:-1])
            d.dirac.append(pts + (_coeff(args[-1], lineno),))
        else:
            if len(args) not in (2, 3):
                raise MalformedInputError(f"line {lineno}: coeff takes i [j] value")
            idx = tuple(_int(a, lineno, "index") for a in args[:-1])
            if min(idx) < 0:
                raise MalformedInputError(f"line {lineno}: negative index")
            d.coeffs.append((idx, _coeff(args[-1], lineno)))
    if d.dirac and d.coeffs:
        raise MalformedInputError("give either dirac terms or a coefficient table, not both")
    for rows, what in ((d.dirac, "dirac"), (d.coeffs, "coeff")):
        if len({len(r) if what == "dirac" else len(r[0]) for r in rows}) > 1:
            raise MalformedInputError(f"{what} lines mix one and two variables")
    return d


def validate(prime, precision, orders, ring, level, mode):
    """Fail fast on bad numeric parameters; every message starts with the field name."""
    if prime is None or not isinstance(prime, int) or not is_prime(prime):
        raise ConfigError(f"prime: {prime!r} is not a prime")
    if precision is None or not isinstance(precision, int) or precision < 1:
        raise ConfigError(f"precision: {precision!r} must be an integer >= 1")
    if orders is None or not 1 <= len(orders) <= 2 or any(n < 0 for n in orders):
        raise ConfigError(f"orders: {orders!r} must be one or two integers >= 0")
    if ring is None or ring[0] not in ("plain", "polyq") or ring[1] < 0:
        raise ConfigError(f"ring: {ring!r} must be plain or polyq:D with D >= 0")
    if level is not None and level < 0:
        raise ConfigError(f"level: {level!r} must be >= 0")
    if mode is not None and mode not in ("restrict", "stabilize"):
        raise ConfigError(f"mode: {mode!r} must be restrict or stabilize")
    kind, degree = ring
    return Ring(prime, precision, kind, degree if kind == "polyq" else 0)


def coefficient_array(ring, orders, entries):
    """Dense coefficient array from (index, q-coefficients) lines."""
    arr = np.zeros(tuple(n + 1 for n in orders) + (ring.width,), dtype=object)
    for idx, c in entries:
        if len(idx) != len(orders):
            raise MalformedInputError(f"coefficient index {idx} does not match orders {orders}")
        if any(i > n for i, n in zip(idx, orders)):
            raise MalformedInputError(f"coefficient index {idx} beyond truncation orders {orders}")
        arr[idx] += np.array(ring.vector(c), dtype=object)
    return ring.array(arr)


def _residue(ring, vec):
    return ",".join(str(int(c)) for c in vec) if ring.width > 1 else str(int(vec[0]))


def _header(kind, ring, M_eff, orders, extra=""):
    n = ",".join(str(o) for o in orders)
    return f"# {kind} p={ring.p} M={ring.M} M_eff={M_eff} N={n} ring={ring.tag()}{extra}"


def series_table(series, kind):
    ring = series.ring
    lines = [_header(kind, ring, series.effective_precision(), series.orders)]
    names = ["i", "j"][:series.arity]
    lines.append("# " + " ".join(names) + " residue precision")
    for idx in np.ndindex(*series.prec.shape):
        lines.append(" ".join(str(i) for i in idx) + f" {_residue(ring, series.coeffs[idx])} "
                     f"{int(series.prec[idx])}")
    return "\n".join(lines) + "\n"


def moments_table(ring, orders, values):
    """values: dict (k, l) -> RingElement."""
    M_eff = min((v.prec for v in values.values()), default=ring.M)
    lines = [_header("moments", ring, M_eff, orders), "# k l value precision"]
    for (k, l), v in sorted(values.items()):
        lines.append(f"{k} {l} {_residue(ring, v.value)} {v.prec}")
    return "\n".join(lines) + "\n"


def grid_table(grid):
    entries = grid.entries
    first = next(iter(entries.values()))
    ring = first.ring
    lines = [_header(f"moment-grid {grid.provenance}", ring, grid.effective_precision(), first.orders,
                     f" level={grid.level}"),
             "# k l i residue precision"]
    for (k, l) in grid.cells():
        e = entries[(k, l)]
        for i in range(e.N + 1):
            lines.append(f"{k} {l} {i} {_residue(ring, e.coeffs[i])} {int(e.prec[i])}")
    return "\n".join(lines) + "\n"
