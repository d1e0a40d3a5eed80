"""Ascending sequences with provenance, merging, and limit-gap reports.

A limit gap is a liminf and cannot be computed from finitely many terms, so
reports give the global minimum, the minimum over tail windows, and the
trend of those minima.  No limit value is ever claimed.
"""

from __future__ import annotations

import csv
import functools
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import iv, mp

from ._numeric import certified_sign, certify, format_interval, midpoint, to_interval, workprec
from .errors import CertificationError, PreconditionError
from .quadratic import QuadraticInteger


@dataclass(frozen=True)
class ExpValue:
    """The norm ``e^L`` of a geodesic of exact length ``L``."""

    log: Fraction

    def interval(self):
        return iv.exp(to_interval(self.log))


def _interval(v):
    return v.interval() if hasattr(v, "interval") else to_interval(v)


def compare(x, y) -> int:
    """Exact three-way comparison where possible, certified otherwise."""
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return (x > y) - (x < y)
    if isinstance(x, ExpValue) and isinstance(y, ExpValue):
        return (x.log > y.log) - (x.log < y.log)
    if isinstance(x, QuadraticInteger) and isinstance(y, QuadraticInteger) and x == y:
        return 0
    if x is y:
        return 0
    try:
        return certified_sign(lambda: _interval(x) - _interval(y), max_bits=4096)
    except CertificationError as exc:
        raise CertificationError(f"cannot order {x} and {y}; equal values need exact types") from exc


@dataclass
class AscendingSequence:
    """Strictly increasing values, each with the list of sources it came from."""

    values: list = field(default_factory=list)
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.values) != len(self.provenance):
            raise PreconditionError("values and provenance differ in length")
        for i in range(len(self.values) - 1):
            if compare(self.values[i], self.values[i + 1]) >= 0:
                raise PreconditionError(f"sequence is not strictly ascending at index {i}")

    @classmethod
    def of(cls, values: Iterable, tag=None, tags: Sequence | None = None) -> "AscendingSequence":
        values = list(values)
        if tags is None:
            tags = [tag] * len(values)
        return cls(values, [[t] for t in tags])

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(zip(self.values, self.provenance))

    def intervals(self) -> list:
        with workprec():
            return [_interval(v) for v in self.values]


def merge(*seqs) -> AscendingSequence:
    """Sorted union of ascending sequences.

    Equal values are merged and their provenance lists concatenated in input
    order.  Plain lists are accepted and tagged with their argument index.
    """
    items = []
    for i, s in enumerate(seqs):
        if not isinstance(s, AscendingSequence):
            s = AscendingSequence.of(s, tag=i)
        for j, (v, prov) in enumerate(s):
            items.append((v, i, j, list(prov)))
    items.sort(key=functools.cmp_to_key(lambda p, q: compare(p[0], q[0]) or (p[1] - q[1]) or (p[2] - q[2])))
    values, provenance = [], []
    for v, _, _, prov in items:
        if values and compare(values[-1], v) == 0:
            provenance[-1].extend(prov)
        else:
            values.append(v)
            provenance.append(prov)
    return AscendingSequence(values, provenance)


@dataclass
class LimitGapReport:
    count: int
    global_min: object
    argmin: int
    window_minima: list
    window_bounds: list
    trend: str
    verdict: str
    gaps: list = field(repr=False, default_factory=list)

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "globalMin": _fmt(self.global_min),
            "argmin": self.argmin,
            "windowMinima": [_fmt(w) for w in self.window_minima],
            "windows": [list(b) for b in self.window_bounds],
            "trend": self.trend,
            "verdict": self.verdict,
        }


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return format_interval(x, 20)


def _gap(x, y):
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return Fraction(y - x)
    if isinstance(x, ExpValue) and isinstance(y, ExpValue) and x.log == y.log:
        return Fraction(0)
    return certify(lambda: _interval(y) - _interval(x), 12)


def _key(g):
    if isinstance(g, Fraction):
        return mp.mpf(g.numerator) / g.denominator
    return midpoint(g)


def _short(g) -> str:
    with mp.workprec(64):
        return f"{float(_key(g)):.3g}"


def adjacent_gaps(seq) -> list:
    if not isinstance(seq, AscendingSequence):
        seq = AscendingSequence.of(seq)
    with workprec():
        return [_gap(x, y) for x, y in zip(seq.values, seq.values[1:])]


def limit_gap_report(seq, tail_windows: int = 4, eps=Fraction(1, 10**6), M=10**6, growth=None) -> LimitGapReport:
    """Global and tail-window minima of adjacent gaps with a desk-scale verdict.

    The gaps are split into ``tail_windows`` consecutive windows.  The verdict
    is ``"gaps diverging"`` when the last window's minimum exceeds ``M`` or
    exceeds the global minimum by more than ``growth`` (default ``e``) with
    increasing window minima, ``"gaps vanishing"`` when it is below ``eps``,
    and ``"bounded"`` otherwise (with the approached value when the minima
    decrease).
    """
    if not isinstance(seq, AscendingSequence):
        seq = AscendingSequence.of(seq)
    if len(seq) < 3:
        raise PreconditionError("limit_gap_report needs at least three values")
    if not isinstance(tail_windows, int) or tail_windows < 1:
        raise PreconditionError("tail_windows must be a positive integer")
    gaps = adjacent_gaps(seq)
    w = min(tail_windows, len(gaps))
    cuts = [round(i * len(gaps) / w) for i in range(w + 1)]
    bounds = [(cuts[i], cuts[i + 1]) for i in range(w)]
    with workprec():
        keys = [_key(g) for g in gaps]
        argmin = min(range(len(gaps)), key=lambda i: (keys[i], i))
        window_idx = [min(range(a, b), key=lambda i: (keys[i], i)) for a, b in bounds]
        mins = [keys[i] for i in window_idx]
        tol = mp.mpf(10) ** -12
        if all(abs(x - mins[0]) <= tol * abs(mins[0]) for x in mins):
            trend = "flat"
        elif all(x < y for x, y in zip(mins, mins[1:])):
            trend = "increasing"
        elif all(x > y for x, y in zip(mins, mins[1:])):
            trend = "decreasing"
        else:
            trend = "mixed"
        last, gmin = mins[-1], keys[argmin]
        factor = mp.e if growth is None else mp.mpf(growth)
        if last > M or (trend == "increasing" and last > gmin * factor):
            verdict = "gaps diverging"
        elif last < _key(Fraction(eps)):
            verdict = "gaps vanishing"
        elif trend == "decreasing":
            verdict = f"bounded, min→{_short(gaps[window_idx[-1]])}⁺"
        else:
            verdict = "bounded"
    return LimitGapReport(
        len(seq), gaps[argmin], argmin, [gaps[i] for i in window_idx], bounds, trend, verdict, gaps
    )


def _prov(p) -> str:
    return ";".join(str(x) for x in p)


def to_csv(seq, digits: int = 20) -> str:
    """CSV text with columns value, gap_to_next, provenance."""
    if not isinstance(seq, AscendingSequence):
        seq = AscendingSequence.of(seq)
    gaps = adjacent_gaps(seq)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["value", "gap_to_next", "provenance"])
    with workprec():
        for i, (v, p) in enumerate(seq):
            val = str(v) if isinstance(v, (int, Fraction)) else format_interval(_interval(v), digits)
            gap = _fmt(gaps[i]) if i < len(gaps) else ""
            out.writerow([val, gap, _prov(p)])
    return buf.getvalue()


def report_json(report: LimitGapReport, **extra) -> str:
    doc = dict(extra)
    doc.update(report.as_dict())
    return json.dumps(doc, indent=2, ensure_ascii=False)
