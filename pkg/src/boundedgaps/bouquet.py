"""The two-loop bouquet ``Y_a``: one loop of length ``a``, one of length 1.

Closed geodesics traverse the short loop ``m`` times and the unit loop ``n``
times, so the length set is ``{a m + n}``.  For irrational ``a`` the length
determines ``(m, n)``.  Two norms differ by

    e^(am+n) - e^(ak+l) = (e^(a(m-k) + (n-l)) - 1) e^(ak+l),

which is small when ``(l - n)/(m - k)`` approximates ``a`` very well.  The
construction below builds such an ``a`` digit by digit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from mpmath import iv, mp

from ._numeric import format_interval, get_precision, to_interval, workprec
from .errors import BudgetExceededError, CertificationError, PreconditionError, VerificationError

DEFAULT_DIGIT_BUDGET = 10**6
_CHUNK = 4000  # stay below the interpreter's int <-> str digit limit


def _digits_to_int(s: str) -> int:
    n = 0
    for i in range(0, len(s), _CHUNK):
        part = s[i : i + _CHUNK]
        n = n * 10 ** len(part) + int(part)
    return n


@dataclass(frozen=True)
class DigitReal:
    """A number ``0.d1 d2 ... dn`` given by an explicit decimal digit string.

    With ``exact`` the number is the terminating decimal itself; otherwise the
    digits are a prefix of a longer expansion, and the number is only known to
    lie in ``[0.d1..dn, 0.d1..dn + 10^-n]``.
    """

    digits: str
    exact: bool = False

    def __post_init__(self):
        if not self.digits or not self.digits.isdigit() or not self.digits.isascii():
            raise PreconditionError(f"digit string {self.digits[:40]!r} is not a nonempty string of 0-9")
        if self.digits.strip("0") == "":
            raise PreconditionError("value must lie in (0, 1): all digits are zero")

    @classmethod
    def parse(cls, text: str) -> "DigitReal":
        """Read ``0.ddd`` (exact) or ``0.ddd...`` (a prefix)."""
        s = text.strip()
        exact = not s.endswith("...")
        s = s.rstrip(".") if not exact else s
        if s.startswith("0."):
            s = s[2:]
        elif s.startswith("."):
            s = s[1:]
        else:
            raise PreconditionError(f"expected a decimal in (0, 1) written as 0.ddd, got {text[:40]!r}")
        return cls(s, exact)

    @classmethod
    def from_fraction(cls, x: Fraction, digits: int) -> "DigitReal":
        """The first ``digits`` decimals of ``x``, as a prefix."""
        x = Fraction(x)
        if not 0 < x < 1:
            raise PreconditionError("value must lie in (0, 1)")
        n = (x * 10**digits).__floor__()
        return cls(_pad(n, digits))

    def __len__(self) -> int:
        return len(self.digits)

    @property
    def numerator(self) -> int:
        return _digits_to_int(self.digits)

    @property
    def value(self) -> Fraction:
        """Exact value of the prefix, with denominator ``10^len``."""
        return Fraction(self.numerator, 10 ** len(self.digits))

    def bounds(self) -> tuple[Fraction, Fraction]:
        lo = self.value
        return (lo, lo) if self.exact else (lo, lo + Fraction(1, 10 ** len(self.digits)))

    def extend(self, zeros: int, digit: str = "1") -> "DigitReal":
        return DigitReal(self.digits + "0" * zeros + digit, self.exact)

    def interval(self):
        lo, hi = self.bounds()
        return iv.mpf([to_interval(lo).a, to_interval(hi).b])

    def __str__(self) -> str:
        return "0." + self.digits + ("" if self.exact else "...")


def _pad(n: int, width: int) -> str:
    # str(n) would trip the int->str limit for huge n
    parts = []
    for _ in range(0, width, _CHUNK):
        n, r = divmod(n, 10**_CHUNK)
        parts.append(str(r).zfill(_CHUNK))
    return "".join(reversed(parts))[-width:]


def _a_bounds(a) -> tuple[Fraction, Fraction]:
    """Rational enclosure ``[lo, hi]`` of ``a``; point inputs give ``lo == hi``."""
    if isinstance(a, DigitReal):
        lo, hi = a.bounds()
    elif isinstance(a, str):
        return _a_bounds(DigitReal.parse(a))
    elif isinstance(a, (int, Fraction)):
        lo = hi = Fraction(a)
    elif isinstance(a, float) or hasattr(a, "_mpf_"):
        from .quadratic import _exact

        lo = hi = _exact(a)
    elif hasattr(a, "_mpi_"):
        from .quadratic import _exact

        lo, hi = _exact(mp.mpf(a.a)), _exact(mp.mpf(a.b))
    else:
        raise PreconditionError(f"cannot interpret {a!r} as a real number")
    if not (0 < lo < 1 and hi <= 1):
        raise PreconditionError("a must lie in (0, 1)")
    return lo, hi


def _check_pair(m: int, n: int) -> None:
    if not (isinstance(m, int) and isinstance(n, int)) or m < 0 or n < 0:
        raise PreconditionError(f"(m, n) = ({m}, {n}) must be nonnegative integers")
    if m == 0 and n == 0:
        raise PreconditionError("(m, n) = (0, 0) is not a closed geodesic")


def length(m: int, n: int, a):
    """Length ``a m + n`` of the geodesic running ``m`` short and ``n`` unit loops.

    A point value of ``a`` gives an ``mpf``; a digit prefix gives an interval.
    """
    _check_pair(m, n)
    if isinstance(a, DigitReal) and not a.exact:
        with workprec():
            return a.interval() * m + n
    lo, _ = _a_bounds(a)
    if isinstance(a, (float,)) or hasattr(a, "_mpf_"):
        return mp.mpf(a) * m + n
    with workprec():
        return mp.mpf(lo.numerator) / lo.denominator * m + n


@dataclass(frozen=True)
class GeodesicPair:
    """Two geodesics ``(m, n)`` and ``(k, l)`` with a certified norm gap.

    ``gap`` encloses ``|e^(am+n) - e^(ak+l)|`` and ``scale`` encloses
    ``e^(ak+l)`` over every admissible ``a``; ``log_scale`` bounds the
    exponent ``ak + l`` exactly.
    """

    mn: tuple[int, int]
    kl: tuple[int, int]
    gap: object
    scale: object
    log_scale: tuple[Fraction, Fraction]

    def __post_init__(self):
        _check_pair(*self.mn)
        _check_pair(*self.kl)
        if self.mn == self.kl:
            raise PreconditionError("a pair needs two distinct geodesics")

    @property
    def gap_upper(self):
        return mp.mpf(self.gap.b)

    def as_dict(self) -> dict:
        with mp.workprec(iv.prec):
            return {
                "mn": list(self.mn),
                "kl": list(self.kl),
                "gapLower": mp.nstr(mp.mpf(self.gap.a), 15, strip_zeros=False),
                "gapUpper": mp.nstr(mp.mpf(self.gap.b), 15, strip_zeros=False),
                "scaleLower": mp.nstr(mp.mpf(self.scale.a), 15, strip_zeros=False),
                "scaleUpper": mp.nstr(mp.mpf(self.scale.b), 15, strip_zeros=False),
            }


def _expm1_bounds(x_lo: Fraction, x_hi: Fraction):
    """Enclosure of ``|e^x - 1|`` for ``x`` in ``[x_lo, x_hi]`` not containing 0.

    Uses ``|x| e^-|x| <= |e^x - 1| <= |x| e^|x|`` for tiny ``x`` (where the
    direct evaluation cancels) and ``expm1`` otherwise.
    """
    small, big = sorted((abs(x_lo), abs(x_hi)))
    s, b = to_interval(small), to_interval(big)
    if big < Fraction(1, 10**6):
        return iv.mpf([(s * iv.exp(-s)).a, (b * iv.exp(b)).b])
    if x_lo > 0:
        return iv.mpf([iv.expm1(s).a, iv.expm1(b).b])
    return iv.mpf([(-iv.expm1(-s)).a, (-iv.expm1(-b)).b])


def pair_gap(a, mn: tuple[int, int], kl: tuple[int, int]) -> GeodesicPair:
    """Certify the norm gap of two geodesics for every ``a`` in its enclosure.

    The exponent ``x = a(m-k) + (n-l)`` is bounded exactly in rationals, so a
    zero-free enclosure proves the two lengths differ.
    """
    _check_pair(*mn)
    _check_pair(*kl)
    lo, hi = _a_bounds(a)
    (m, n), (k, l) = mn, kl
    dm, dn = m - k, n - l
    x_lo, x_hi = sorted((lo * dm + dn, hi * dm + dn))
    if x_lo <= 0 <= x_hi:
        raise CertificationError(f"lengths of {mn} and {kl} are not separated for a in [{float(lo)}, {float(hi)}]")
    e = _expm1_bounds(x_lo, x_hi)
    s_lo, s_hi = sorted((lo * k + l, hi * k + l))
    scale = iv.mpf([iv.exp(to_interval(s_lo)).a, iv.exp(to_interval(s_hi)).b])
    return GeodesicPair(tuple(mn), tuple(kl), e * scale, scale, (s_lo, s_hi))


def _separated(prev: GeodesicPair, nxt: GeodesicPair) -> bool:
    """Exact check that ``nxt`` has at least ``e`` times the scale of ``prev``."""
    return nxt.log_scale[0] >= prev.log_scale[1] + 1


class MinGap(NamedTuple):
    gap: object
    pair: GeodesicPair
    values: int


def min_gap_scan(a, m_max: int, n_max: int) -> MinGap:
    """Smallest norm gap among geodesics with ``m <= m_max`` and ``n <= n_max``.

    Lengths are sorted and every adjacent pair is certified distinct; the
    minimum over adjacent norm gaps is then the minimum over all pairs.
    Raises :class:`CertificationError` when the enclosure of ``a`` is too
    wide to separate the lengths or to single out the argmin (extend the
    prefix).  Ties are broken by the lexicographically smallest pair.
    """
    if not (isinstance(m_max, int) and isinstance(n_max, int)) or m_max < 1 or n_max < 1:
        raise PreconditionError("bounds must be integers >= 1")
    lo, hi = _a_bounds(a)
    boxes = [(m, n) for m in range(m_max + 1) for n in range(n_max + 1) if m or n]
    boxes.sort(key=lambda p: (lo * p[0] + p[1], p))
    for p, q in zip(boxes, boxes[1:]):
        if hi * p[0] + p[1] >= lo * q[0] + q[1]:
            raise CertificationError(f"lengths of {p} and {q} are not separated; extend the prefix of a")
    with workprec():
        pairs = [pair_gap(a, q, p) for p, q in zip(boxes, boxes[1:])]
        best = min(range(len(pairs)), key=lambda i: (pairs[i].gap.a, i))
        g = pairs[best].gap
        rivals = [i for i, pr in enumerate(pairs) if i != best and pr.gap.a <= g.b]
        if rivals and not (lo == hi and all(pairs[i].gap == g for i in rivals)):
            raise CertificationError("argmin gap not certified at the available precision; extend the prefix of a")
    return MinGap(g, pairs[best], len(boxes))


class Construction(NamedTuple):
    a: DigitReal
    pairs: list
    digits_used: int


def _stage_bound(p: int, q: int, t: int, delta: Fraction):
    # upper bound on e^(tp) * |e^(tq d) - 1| for 0 < d <= delta
    x = to_interval(t * q * delta)
    return iv.exp(iv.mpf(t * p)) * x * iv.exp(x)


def _zeros_needed(p: int, d: int, t: int, C: Fraction) -> int:
    """Fewest zeros ``z`` so that any tail after ``d + z`` digits keeps stage ``t``."""
    q = 10**d
    Ci = to_interval(C)
    with workprec():
        est = (t * p + mp.log(t * q) - mp.log(mp.mpf(C.numerator) / C.denominator)) / mp.log(10) - d
        z = max(0, int(mp.floor(est)) - 2)
        while not (_stage_bound(p, q, t, Fraction(1, 10 ** (d + z))) < Ci):
            z += 1
    return z


def _positive_fraction(C) -> Fraction:
    try:
        C = Fraction(str(C)) if not isinstance(C, Fraction) else C
    except ValueError as exc:
        raise PreconditionError(f"C = {C!r} is not a number") from exc
    if C <= 0:
        raise PreconditionError("C must be positive")
    return C


def liouville_construct(
    seed,
    C,
    stages: int,
    budget: int = DEFAULT_DIGIT_BUDGET,
    mode: str = "multiples",
) -> Construction:
    """Extend ``seed`` by zero runs and single 1s so ``Y_a`` has small norm gaps.

    With the seed prefix ``p/q`` (``q = 10^d``) the pair for stage ``t`` is
    ``(m, n) = (t q, 0)`` against ``(k, l) = (0, t p)``, with norm gap
    ``e^(tp) |e^(t q delta) - 1|`` where ``delta = a - p/q``.  The first zero
    run is long enough that ``delta`` keeps every stage below ``C`` whatever
    digits follow; later runs are each one longer than the last.  Scales
    ``e^(tp)`` grow by ``e^p >= e`` per stage.

    ``mode="prefix"`` instead re-reads the whole current prefix as the next
    approximation.  Its zero runs grow like a tower of exponentials, so it
    stops with :class:`BudgetExceededError` (``achieved`` = finished stages)
    once ``budget`` digits would be exceeded.

    Every returned pair is re-certified for the final digit stream.
    """
    if not isinstance(stages, int) or stages < 1:
        raise PreconditionError("stages must be an integer >= 1")
    C = _positive_fraction(C)
    if isinstance(seed, str):
        seed = DigitReal.parse(seed)
    if not isinstance(seed, DigitReal):
        raise PreconditionError("seed must be a DigitReal or a decimal string")
    seed = DigitReal(seed.digits.rstrip("0") or seed.digits)
    if mode == "multiples":
        a, targets = _construct_multiples(seed, C, stages, budget)
    elif mode == "prefix":
        a, targets = _construct_prefix(seed, C, stages, budget)
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    pairs = []
    with workprec():
        Ci = to_interval(C)
        for mn, kl in targets:
            pr = pair_gap(a, mn, kl)
            if not pr.gap < Ci:
                raise VerificationError(f"pair {mn}, {kl} has gap {pr.gap} not below C")
            if pairs and not _separated(pairs[-1], pr):
                raise VerificationError("scales do not grow by a factor e")
            pairs.append(pr)
    return Construction(a, pairs, len(a))


def _construct_multiples(seed: DigitReal, C: Fraction, stages: int, budget: int):
    d, p = len(seed), seed.numerator
    q = 10**d
    z = _zeros_needed(p, d, stages, C)
    if d + stages * (z + 1) + stages * (stages - 1) // 2 > budget:
        raise BudgetExceededError(f"construction needs more than {budget} digits", achieved=0)
    a = seed
    for j in range(stages):
        a = a.extend(z + j)
    return a, [((t * q, 0), (0, t * p)) for t in range(1, stages + 1)]


def _construct_prefix(seed: DigitReal, C: Fraction, stages: int, budget: int):
    a, targets, last_z = seed, [], -1
    for j in range(stages):
        d, p = len(a), a.numerator
        # beyond this p the required zero run alone exceeds the budget
        if p > 3 * budget:
            raise BudgetExceededError(
                f"stage {j + 1} needs more than {budget} digits (approximation numerator has {d} digits)",
                achieved=j,
            )
        z = max(_zeros_needed(p, d, 1, C), last_z + 1)
        if d + z + 1 > budget:
            raise BudgetExceededError(f"stage {j + 1} needs {d + z + 1} digits > budget {budget}", achieved=j)
        targets.append(((10**d, 0), (0, p)))
        a, last_z = a.extend(z), z
    return a, targets


def _convergents(x: Fraction, limit: int = 64):
    h0, h1, k0, k1 = 0, 1, 1, 0
    for _ in range(limit):
        q = x.numerator // x.denominator
        h0, h1 = h1, q * h1 + h0
        k0, k1 = k1, q * k1 + k0
        yield h1, k1
        frac = x - q
        if frac == 0:
            return
        x = 1 / frac


def verify_small_gaps(a, C, count: int, scale_floor=1, max_multiple: int = 64) -> list[GeodesicPair]:
    """Find ``count`` certified pairs with norm gap ``< C`` at separated scales.

    Candidates are ``(tQ, 0)`` against ``(0, tP)`` for the continued-fraction
    convergents ``P/Q`` of the prefix of ``a``.  Pairs are taken greedily by
    increasing scale, each at least ``e`` times the previous and at least
    ``scale_floor``.  A terminating (exact) ``a`` never certifies: its best
    approximations give equal lengths.
    """
    if not isinstance(count, int) or count < 0:
        raise PreconditionError("count must be a nonnegative integer")
    C = _positive_fraction(C)
    if count == 0:
        return []
    if isinstance(a, str):
        a = DigitReal.parse(a)
    if isinstance(a, (int, Fraction)) or (isinstance(a, DigitReal) and a.exact):
        v = Fraction(a.value if isinstance(a, DigitReal) else a)
        raise CertificationError(
            f"a = {v} is rational: ({v.denominator}, 0) and (0, {v.numerator}) have the same length, "
            "so lengths do not determine geodesics"
        )
    lo, hi = _a_bounds(a)
    found, collisions = [], 0
    with workprec():
        Ci = to_interval(C)
        for P, Q in _convergents(lo):
            if P < 1:
                continue
            for t in range(1, max_multiple + 1):
                try:
                    pr = pair_gap(a, (t * Q, 0), (0, t * P))
                except CertificationError:
                    collisions += 1
                    break
                if not pr.gap < Ci:
                    break
                found.append(pr)
        found.sort(key=lambda pr: (pr.scale.a, pr.mn))
        chosen = []
        floor = to_interval(_positive_fraction(scale_floor)) if scale_floor else iv.mpf(0)
        for pr in found:
            if not pr.scale.a >= floor.b:
                continue
            if chosen and not _separated(chosen[-1], pr):
                continue
            chosen.append(pr)
            if len(chosen) == count:
                return chosen
    raise CertificationError(
        f"only {len(chosen)} of {count} pairs certified below C={C} "
        f"({len(found)} candidates, {collisions} with unseparated lengths); "
        "a may be rational or its prefix too short"
    )


class DensityPoint(NamedTuple):
    target: Fraction
    a: DigitReal
    distance: Fraction
    construction: Construction


def _seed_for(target: Fraction) -> DigitReal:
    d = 1
    while (target * 10**d).__floor__() == 0:
        d += 1
    return DigitReal.from_fraction(target, d)


def density_demo(targets, C, stages: int, budget: int = DEFAULT_DIGIT_BUDGET) -> list[DensityPoint]:
    """Build a small-gap ``a`` near each target from the target's leading digits.

    ``distance`` is an exact upper bound on ``|a - target|`` over all tails of
    the constructed prefix; it is below ``10^-d`` for a ``d``-digit seed.
    """
    out = []
    for raw in targets:
        t = Fraction(str(raw)) if not isinstance(raw, Fraction) else raw
        if not 0 < t < 1:
            raise PreconditionError(f"target {raw} is not in (0, 1)")
        seed = _seed_for(t)
        res = liouville_construct(seed, C, stages, budget)
        lo, hi = res.a.bounds()
        dist = max(abs(lo - t), abs(hi - t))
        if dist >= Fraction(1, 10 ** len(seed)):
            raise VerificationError(f"constructed a is {float(dist)} from target {t}")
        out.append(DensityPoint(t, res.a, dist, res))
    return out


def pairs_to_json(pairs, a: DigitReal | None = None, **extra) -> str:
    doc = dict(extra)
    if a is not None:
        doc["a"] = str(a)
        doc["digits"] = len(a)
    doc["precisionBits"] = get_precision()
    doc["pairs"] = [pr.as_dict() for pr in pairs]
    return json.dumps(doc, indent=2)


def describe_gap(g) -> str:
    return format_interval(g)
