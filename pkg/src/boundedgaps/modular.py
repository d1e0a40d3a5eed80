"""Length spectrum of the modular group.

Every hyperbolic class of PSL2(Z) with trace ``a >= 3`` has norm
``eps(a) = (a + sqrt(a^2 - 4))/2``, so the ascending sequence of distinct
norms is just ``eps(3) < eps(4) < ...``.  The number of classes sharing a trace
is the sum of narrow class numbers over the orders containing the unit.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from mpmath import iv, mp

from . import _factor
from ._numeric import certified_digits, certified_sign, certify, midpoint, workprec
from .errors import PreconditionError
from .quadratic import QuadraticInteger, class_number, count_units_below, unit_from_trace


@dataclass(frozen=True)
class SpectrumEntry:
    """One norm value ``eps(a)`` of the modular spectrum."""

    trace: int
    unit: QuadraticInteger
    multiplicity: int | None = field(default=None, compare=False)

    @property
    def b(self) -> int:
        return self.unit.b

    @property
    def D0(self) -> int:
        return self.unit.D

    @property
    def label(self):
        return self.trace

    def interval(self):
        return self.unit.interval()

    def value(self, bits: int | None = None):
        return self.unit.real(bits)

    def length(self, bits: int | None = None):
        """Geodesic length ``log eps(a)``."""
        with workprec(bits):
            return mp.log(self.unit.real())


@dataclass
class GapReport:
    """Adjacent differences of an ascending sequence.

    ``gaps[i]`` is an interval enclosing ``x[i+1] - x[i]``; ``labels`` names the
    sequence members (traces, words or pairs) so the argmin pair can be reported.
    """

    labels: list
    gaps: list
    running_min: list
    argmin: int

    @property
    def min_gap(self):
        return self.gaps[self.argmin]

    @property
    def argmin_pair(self):
        return self.labels[self.argmin], self.labels[self.argmin + 1]

    @property
    def index_range(self) -> tuple[int, int]:
        return 0, len(self.labels) - 1

    def rows(self):
        for i, g in enumerate(self.gaps):
            yield self.labels[i], self.labels[i + 1], g, self.running_min[i]


def trace_multiplicity(a: int) -> int:
    """Number of hyperbolic classes of trace ``a``.

    Sum of ``class_number(D)`` over ``a^2 - 4 = f^2 D`` with ``D`` a discriminant.
    """
    n = a * a - 4
    fac = _factor.merge(_factor.factorize(a - 2), _factor.factorize(a + 2))
    square_part = 1
    for p, e in fac.items():
        square_part *= p ** (e // 2)
    total = 0
    for f in _factor.divisors(square_part):
        D = n // (f * f)
        if D % 4 in (0, 1):
            total += class_number(D)
    return total


def _multiplicities(traces: Sequence[int]) -> list[int]:
    return [trace_multiplicity(a) for a in traces]


def spectrum(trace_max: int, multiplicity: bool = True, jobs: int = 1) -> list[SpectrumEntry]:
    """Distinct norms ``eps(3) < ... < eps(trace_max)`` of PSL2(Z).

    With ``multiplicity`` each entry carries its class count; ``jobs > 1``
    spreads that work over processes without changing the result.
    """
    if not isinstance(trace_max, int) or trace_max < 3:
        raise PreconditionError("trace_max must be an integer >= 3")
    traces = list(range(3, trace_max + 1))
    mults: list = [None] * len(traces)
    if multiplicity:
        if jobs > 1 and len(traces) > 64:
            chunk = -(-len(traces) // jobs)
            parts = [traces[i : i + chunk] for i in range(0, len(traces), chunk)]
            with ProcessPoolExecutor(jobs) as pool:
                mults = [m for part in pool.map(_multiplicities, parts) for m in part]
        else:
            mults = _multiplicities(traces)
    return [SpectrumEntry(a, unit_from_trace(a), m) for a, m in zip(traces, mults)]


def gap_scan(seq: Sequence, digits: int = 12) -> GapReport:
    """Adjacent gaps of an ascending sequence of items with ``interval()``.

    Each gap is certified positive and to ``digits`` significant digits,
    escalating precision where needed.
    """
    if len(seq) < 2:
        raise PreconditionError("gap_scan needs at least two entries")
    gaps = []
    with workprec():
        vals = [x.interval() for x in seq]
        for i in range(len(seq) - 1):
            g = vals[i + 1] - vals[i]
            if g.a <= 0 or certified_digits(g) < digits:
                lo, hi = seq[i], seq[i + 1]
                g = certify(lambda: hi.interval() - lo.interval(), digits)
                if g.a <= 0:
                    raise PreconditionError(f"sequence is not strictly ascending at index {i}")
            gaps.append(g)
        running, best, argmin = [], None, 0
        for i, g in enumerate(gaps):
            m = midpoint(g)
            if best is None or m < best:
                best, argmin = m, i
            running.append(best)
    return GapReport([x.label for x in seq], gaps, running, argmin)


@dataclass
class LimitGapEstimate:
    """Window minimum of the modular gaps plus the trend certificate.

    The limit gap is a liminf and cannot be computed; what is certified is
    that every gap in the window exceeds 1, that the gaps strictly decrease,
    and how close the last gap is to 1.
    """

    trace_max: int
    min_gap: object
    argmin_traces: tuple[int, int]
    all_above_one: bool
    strictly_decreasing: bool
    excess_bound_holds: bool
    first_violation: str | None = None

    @property
    def certified(self) -> bool:
        return self.all_above_one and self.strictly_decreasing and self.excess_bound_holds


def _gap_interval(a: int):
    # eps(a+1) - eps(a) = (1 + sqrt((a+1)^2 - 4) - sqrt(a^2 - 4)) / 2
    return (1 + iv.sqrt(iv.mpf((a + 1) ** 2 - 4)) - iv.sqrt(iv.mpf(a * a - 4))) / 2


def _positive(build) -> bool:
    x = build()
    if x.a > 0:
        return True
    if x.b < 0:
        return False
    return certified_sign(build) > 0


def limit_gap_estimate(trace_max: int, excess_constant: int = 3, excess_from: int = 10) -> LimitGapEstimate:
    """Certify the behaviour of the modular gaps for traces ``3..trace_max``.

    Checks, with rigorous interval arithmetic:

    * ``eps(a+1) - eps(a) > 1`` for every gap,
    * the gaps strictly decrease in ``a``,
    * ``gap(a) - 1 <= excess_constant / a^2`` for ``a >= excess_from``.
    """
    if not isinstance(trace_max, int) or trace_max < 4:
        raise PreconditionError("trace_max must be an integer >= 4")
    above = decreasing = excess = True
    violation = None
    with workprec():
        for a in range(3, trace_max):
            if above and not _positive(lambda a=a: _gap_interval(a) - 1):
                above, violation = False, violation or f"gap({a}) <= 1"
            if a > 3 and decreasing and not _positive(lambda a=a: _gap_interval(a - 1) - _gap_interval(a)):
                decreasing, violation = False, violation or f"gap({a}) >= gap({a - 1})"
            if a >= excess_from and excess:
                bound = lambda a=a: iv.mpf(excess_constant) / (a * a) - (_gap_interval(a) - 1)
                if not _positive(bound):
                    excess, violation = False, violation or f"gap({a}) - 1 > {excess_constant}/a^2"
        last = trace_max - 1
        min_gap = certify(lambda: _gap_interval(last), 12) if decreasing else None
    if min_gap is None:
        report = gap_scan(spectrum(trace_max, multiplicity=False))
        min_gap, arg = report.min_gap, report.argmin_pair
    else:
        arg = (last, last + 1)
    return LimitGapEstimate(trace_max, min_gap, arg, above, decreasing, excess, violation)


@dataclass(frozen=True)
class GeodesicCount:
    x: object
    count: int
    ratio: object
    traces: int


def count_geodesics(x, bits: int | None = None) -> GeodesicCount:
    """Hyperbolic classes with norm ``<= x`` and the ratio to ``x^2/log(x^2)``."""
    from .quadratic import _exact

    xe = _exact(x)
    if xe <= 1:
        raise PreconditionError("x must exceed 1")
    n_traces = count_units_below(xe)
    v = sum(trace_multiplicity(a) for a in range(3, 3 + n_traces))
    with workprec(bits):
        xm = mp.mpf(xe.numerator) / xe.denominator
        ratio = v / (xm**2 / mp.log(xm**2))
    return GeodesicCount(x, v, ratio, n_traces)


def is_subsequence(sub: Sequence, full: Sequence) -> bool:
    it = iter(full)
    return all(any(s.unit == f.unit for f in it) for s in sub)


def subgroup_monotonicity_check(sub: Sequence[SpectrumEntry], full: Sequence[SpectrumEntry]) -> bool:
    """Check ``min gap(sub) >= min gap(full)`` over the value range of ``sub``.

    A subsequence can only merge adjacent gaps, so this holds for any genuine
    subsequence; the check is exact (a tie is detected symbolically, otherwise
    the comparison is certified by interval arithmetic).
    """
    if len(sub) < 2:
        raise PreconditionError("subsequence needs at least two entries")
    if not is_subsequence(sub, full):
        raise PreconditionError("first argument is not a subsequence of the second")
    lo = next(i for i, f in enumerate(full) if f.unit == sub[0].unit)
    hi = next(i for i, f in enumerate(full) if f.unit == sub[-1].unit)
    window = list(full[lo : hi + 1])
    sub_report, full_report = gap_scan(sub), gap_scan(window)
    s_pair = sub_report.argmin_pair
    f_pair = full_report.argmin_pair
    if s_pair == f_pair:
        return True
    s_lo, s_hi = sub[sub_report.argmin], sub[sub_report.argmin + 1]
    f_lo, f_hi = window[full_report.argmin], window[full_report.argmin + 1]
    return certified_sign(lambda: (s_hi.interval() - s_lo.interval()) - (f_hi.interval() - f_lo.interval())) > 0
