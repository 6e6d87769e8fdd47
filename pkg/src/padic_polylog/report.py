"""Per-coefficient verification reports."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Record:
    k: int
    l: int
    check: str
    valuation: object  # None: no certified discrepancy
    precision: int
    order: int
    ok: bool

    def row(self):
        v = "-" if self.valuation is None else str(self.valuation)
        return f"{self.k}\t{self.l}\t{self.check}\t{v}\t{self.precision}\t{self.order}\t" \
               f"{'ok' if self.ok else 'FAIL'}"


def record(k, l, check, a, b, target=None):
    """Compare two series and keep the outcome for cell (k, l)."""
    c = a.compare(b, target)
    prec = int(min(a.prec.min(), b.prec.min()))
    return Record(k, l, check, c.valuation, prec, c.order, c.ok)


@dataclass(frozen=True)
class Report:
    title: str
    target: int
    records: tuple

    @property
    def passed(self):
        return all(r.ok for r in self.records)

    def failures(self):
        return [r for r in self.records if not r.ok]

    def summary(self):
        bad = len(self.failures())
        status = "PASS" if not bad else "FAIL"
        return f"{status} {self.title}: {len(self.records) - bad}/{len(self.records)} records ok " \
               f"at target precision {self.target}"

    def to_text(self):
        lines = [f"# {self.title}", "k\tl\tcheck\tvaluation\tprecision\torder\tstatus"]
        lines += [r.row() for r in self.records]
        lines.append(self.summary())
        return "\n".join(lines) + "\n"

    def __add__(self, other):
        return Report(f"{self.title}; {other.title}", min(self.target, other.target),
                      self.records + other.records)
