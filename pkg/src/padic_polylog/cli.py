"""Command-line front end.

Exit status: 0 success, 1 verification failed, 9 I/O error, otherwise the
exit code carried by the library error (2 config, 3 malformed input,
4 precision, 5 clipped coefficient, 6 not invertible, 7 not unit-supported,
8 divergent seed, 10 other).
"""

import argparse
import sys
from dataclasses import dataclass

from .errors import ConfigError, PadicError
from .formats import (
    coefficient_array, grid_table, moments_table, parse_description, series_table, validate,
)
from .logsheaf import verify_polylog
from .measures import MeasureSeries, amice, dirac_combination, moment, restrict_units, stabilize
from .polylog import moment_grid_closed, working_order
from . import selftest

COMMANDS = ("amice", "moments", "restrict", "stabilize", "polylog", "verify", "selftest")
EXIT_FAIL = 1
EXIT_IO = 9


@dataclass(frozen=True)
class JobConfig:
    command: str
    input: object
    output: object
    ring: object
    orders: tuple
    level: int
    mode: str
    workers: int


@dataclass(frozen=True)
class Measure:
    """What a description file defines: Dirac terms (extendable to any order) or a fixed table."""
    dirac: object
    table: object

    @property
    def arity(self):
        return self.dirac.arity if self.dirac is not None else self.table.arity

    def series(self, orders):
        if self.dirac is not None:
            return amice(self.dirac, orders)
        have = self.table.orders
        if len(orders) != len(have):
            raise ConfigError(f"orders: {len(have)}-variable table cannot be read at {orders}")
        out = self.table
        for var, (want, n) in zip("ST", zip(orders, have)):
            out = out.padded(want, var) if want > n else out.truncated(want, var)
        return MeasureSeries.wrap(out, self.table.provenance)


def _ring_arg(text):
    if text == "plain":
        return ("plain", 0)
    kind, _, deg = text.partition(":")
    if kind != "polyq" or not deg.lstrip("-").isdigit():
        raise argparse.ArgumentTypeError("ring must be 'plain' or 'polyq:D'")
    return ("polyq", int(deg))


def build_parser():
    ap = argparse.ArgumentParser(prog="padic-polylog",
                                 description="p-adic measures, moment functions and polylogarithm checks")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="measure description file ('-' for stdin)")
    ap.add_argument("--output", help="output file (default stdout)")
    ap.add_argument("--prime", type=int)
    ap.add_argument("--precision", type=int, help="M: digits carried")
    ap.add_argument("--orders", type=int, nargs="+", metavar="N", help="truncation orders N_S [N_T]")
    ap.add_argument("--level", type=int, help="level n of the grid / section")
    ap.add_argument("--mode", choices=("restrict", "stabilize"))
    ap.add_argument("--ring", type=_ring_arg, help="plain or polyq:D")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0, help="selftest random seed")
    return ap


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc


class _IOFailure(Exception):
    pass


def configure(args):
    """Merge flags over the description file and validate everything up front."""
    desc = parse_description(_read(args.input)) if args.input else None
    pick = (lambda flag, key: flag if flag is not None else (getattr(desc, key) if desc else None))
    orders = tuple(args.orders) if args.orders else (desc.orders if desc else None)
    ring_spec = args.ring or (desc.ring if desc else None) or ("plain", 0)
    level = pick(args.level, "level")
    mode = pick(args.mode, "mode") or "restrict"
    if args.workers < 1:
        raise ConfigError(f"workers: {args.workers} must be >= 1")
    ring = validate(pick(args.prime, "prime"), pick(args.precision, "precision"), orders,
                    ring_spec, level, mode)
    if args.command in ("polylog", "verify", "moments") and level is None:
        raise ConfigError("level: required for this command")
    if desc is None:
        raise ConfigError("input: a measure description is required for this command")
    if desc.dirac:
        d = dirac_combination(ring, [t[:-1] + (t[-1],) for t in desc.dirac])
        measure = Measure(d, None)
        if len(orders) != d.arity:
            raise ConfigError(f"orders: {d.arity}-variable measure needs {d.arity} orders")
    else:
        arr = coefficient_array(ring, orders, desc.coeffs)
        measure = Measure(None, MeasureSeries(ring, arr, provenance="table"))
    cfg = JobConfig(args.command, args.input, args.output, ring, orders, level, mode, args.workers)
    return cfg, measure


def _need_two(measure, cmd):
    if measure.arity != 2:
        raise ConfigError(f"input: {cmd} needs a two-variable measure")


def run(cfg, measure):
    """Returns (text, passed)."""
    ring, orders, n = cfg.ring, cfg.orders, cfg.level
    cmd = cfg.command
    if cmd == "amice":
        return series_table(measure.series(orders), "amice"), True
    if cmd == "moments":
        grid_orders = tuple(max(o, n) for o in orders)
        m = measure.series(grid_orders) if measure.dirac is not None else measure.series(orders)
        ls = range(n + 1) if measure.arity == 2 else (0,)
        vals = {(k, l): moment(m, k, l) for k in range(min(n, m.orders[0]) + 1) for l in ls
                if measure.arity == 1 or l <= m.orders[1]}
        return moments_table(ring, m.orders, vals), True
    if cmd in ("restrict", "stabilize"):
        if cmd == "stabilize":
            _need_two(measure, cmd)
        N = orders[0]
        work = (working_order(ring, N, 0, cfg.mode),) + orders[1:] if measure.dirac is not None else orders
        m = measure.series(work)
        out = restrict_units(m) if cmd == "restrict" else stabilize(m)
        return series_table(out.truncated(N), cmd), True
    _need_two(measure, cmd)
    N = orders[0]
    if measure.dirac is not None:
        theta = measure.series((working_order(ring, N, n, cfg.mode), n))
    else:
        theta = measure.series((N, max(orders[1], n)))
    if cmd == "polylog":
        grid = moment_grid_closed(theta, n, cfg.mode, cfg.workers).truncated(N)
        return grid_table(grid), True
    report = verify_polylog(theta, n, cfg.mode, order=N, workers=cfg.workers)
    return report.to_text(), report.passed


def _emit(text, path):
    if not path:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            results = selftest.run(args.seed)
            lines = [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in results]
            passed = all(ok for _, ok in results)
            lines.append(f"{'PASS' if passed else 'FAIL'} selftest: "
                         f"{sum(ok for _, ok in results)}/{len(results)} checks")
            _emit("\n".join(lines) + "\n", args.output)
            return 0 if passed else EXIT_FAIL
        cfg, measure = configure(args)
        text, passed = run(cfg, measure)
        _emit(text, cfg.output)
        return 0 if passed else EXIT_FAIL
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PadicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
