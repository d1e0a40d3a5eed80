"""Exact arithmetic in real quadratic orders.

An order of discriminant ``D`` (``D > 0``, ``D = 0, 1 mod 4``, not a square) is
``O_D = {(a + b*sqrt(D))/2 : a = b*D mod 2}``.  This module provides its
elements, its fundamental norm-one unit, the narrow class number of primitive
forms of discriminant ``D``, and the map from a hyperbolic trace ``a`` to the
unit ``(a + sqrt(a^2 - 4))/2``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from mpmath import iv, mp

from . import _factor
from ._numeric import certified_sign, to_interval, workprec
from .errors import PreconditionError


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def is_discriminant(D) -> bool:
    """True iff ``D`` is a positive non-square integer congruent to 0 or 1 mod 4."""
    if not isinstance(D, int) or isinstance(D, bool):
        return False
    return D > 0 and D % 4 in (0, 1) and not is_square(D)


def _check_discriminant(D) -> None:
    if not is_discriminant(D):
        raise PreconditionError(f"{D!r} is not a discriminant (positive, 0/1 mod 4, non-square)")


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in _factor.factorize(n).values())


def is_fundamental(D: int) -> bool:
    """True iff ``D`` is a fundamental discriminant."""
    if not is_discriminant(D):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    return (D // 4) % 4 in (2, 3) and _squarefree(D // 4)


def _decompose_factored(n: int, fac: dict[int, int]) -> tuple[int, int]:
    m, delta = 1, 1
    for p, e in fac.items():
        m *= p ** (e // 2)
        if e % 2:
            delta *= p
    if delta % 4 == 1:
        return m, delta
    # delta = 2, 3 mod 4 forces m even because n = 0 mod 4
    return m // 2, 4 * delta


def fundamental_decompose(n: int) -> tuple[int, int]:
    """Write ``n = f**2 * D0`` with ``D0`` a fundamental discriminant.

    >>> fundamental_decompose(320)
    (8, 5)
    """
    if not is_discriminant(n):
        raise PreconditionError(f"{n!r} must be a non-square integer = 0, 1 mod 4")
    return _decompose_factored(n, _factor.factorize(n))


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class QuadraticInteger:
    """The element ``(a + b*sqrt(D))/2`` of the order ``O_D``."""

    a: int
    b: int
    D: int

    def __post_init__(self):
        _check_discriminant(self.D)
        if (self.a - self.b * self.D) % 2:
            raise PreconditionError(f"a = {self.a} and b*D = {self.b * self.D} differ in parity")

    @property
    def trace(self) -> int:
        return self.a

    @property
    def norm(self) -> int:
        return (self.a * self.a - self.b * self.b * self.D) // 4

    def conjugate(self) -> "QuadraticInteger":
        return QuadraticInteger(self.a, -self.b, self.D)

    def __mul__(self, other: "QuadraticInteger") -> "QuadraticInteger":
        if not isinstance(other, QuadraticInteger):
            return NotImplemented
        if other.D != self.D:
            raise PreconditionError("cannot multiply elements of different orders")
        a = (self.a * other.a + self.b * other.b * self.D) // 2
        b = (self.a * other.b + other.a * self.b) // 2
        return QuadraticInteger(a, b, self.D)

    def __pow__(self, k: int) -> "QuadraticInteger":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = QuadraticInteger(2, 0, self.D)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def canonical(self) -> tuple[int, int, int]:
        """``(a, b', D0)`` with the same real value and ``D0`` fundamental."""
        f, D0 = fundamental_decompose(self.D)
        return self.a, self.b * f, D0

    def __eq__(self, other):
        if not isinstance(other, QuadraticInteger):
            return NotImplemented
        x, y = self.canonical(), other.canonical()
        if x[1] == 0 and y[1] == 0:
            return x[0] == y[0]
        return x == y

    def __hash__(self):
        a, b, D0 = self.canonical()
        return hash((a, 0, 0) if b == 0 else (a, b, D0))

    def __lt__(self, other):
        if not isinstance(other, QuadraticInteger):
            return NotImplemented
        if self == other:
            return False
        return certified_sign(lambda: other.interval() - self.interval()) > 0

    def interval(self):
        """Enclosure of the real value at the current interval precision."""
        return (iv.mpf(self.a) + self.b * iv.sqrt(iv.mpf(self.D))) / 2

    def real(self, bits: int | None = None):
        with workprec(bits):
            return (mp.mpf(self.a) + self.b * mp.sqrt(self.D)) / 2

    def __float__(self):
        return float(self.real(64))

    def __str__(self):
        return f"({self.a} + {self.b}*sqrt({self.D}))/2"


@dataclass(frozen=True)
class FundamentalUnit:
    """Smallest norm-one unit ``> 1`` of ``O_D`` with a real evaluation."""

    unit: QuadraticInteger
    real_value: mp.mpf = field(compare=False)

    @property
    def D(self) -> int:
        return self.unit.D


def _period_unit(D: int) -> tuple[Fraction, Fraction]:
    # Product of the complete quotients over one period of the purely periodic
    # expansion of (P0 + sqrt(D))/2, which generates O_D.
    s = isqrt(D)
    P0 = s if (s - D) % 2 == 0 else s - 1
    P, Q = P0, 2
    x, y, den = 1, 0, 1
    while True:
        x, y = x * P + y * D, x + y * P
        den *= Q
        q = (P + s) // Q
        P = q * Q - P
        Q = (D - P * P) // Q
        if (P, Q) == (P0, 2):
            break
    g = gcd(gcd(x, y), den)
    return Fraction(x // g, den // g), Fraction(y // g, den // g)


@functools.lru_cache(maxsize=4096)
def fundamental_unit(D: int) -> FundamentalUnit:
    """Fundamental norm-(+1) unit of ``O_D``.

    When the order has a unit of norm -1 its square is returned, so ``D = 5``
    gives ``(3 + sqrt 5)/2`` and not the golden ratio.
    """
    _check_discriminant(D)
    x, y = _period_unit(D)
    a, b = 2 * x, 2 * y
    if a.denominator != 1 or b.denominator != 1:
        raise AssertionError(f"period product for D={D} is not in O_D")
    u = QuadraticInteger(int(a), int(b), D)
    if u.norm == -1:
        u = u * u
    if u.norm != 1:
        raise AssertionError(f"period product for D={D} has norm {u.norm}")
    return FundamentalUnit(u, u.real())


def unit_from_trace(a: int) -> QuadraticInteger:
    """The unit ``(a + sqrt(a^2-4))/2`` written as ``(a + b*sqrt(D0))/2``.

    ``D0`` is fundamental and ``a^2 - 4 = b^2 * D0``.  Traces ``a <= 2`` are
    parabolic or elliptic and have no closed geodesic.
    """
    if not isinstance(a, int) or a < 3:
        raise PreconditionError(f"trace {a!r} is not hyperbolic (need a >= 3)")
    fac = _factor.merge(_factor.factorize(a - 2), _factor.factorize(a + 2))
    b, D0 = _decompose_factored(a * a - 4, fac)
    return QuadraticInteger(a, b, D0)


@dataclass(frozen=True, order=True)
class FormClass:
    """Representative ``A x^2 + B x y + C y^2`` of a proper equivalence class."""

    A: int
    B: int
    C: int

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """Primitive reduced forms of discriminant ``D``.

    A form is reduced when ``0 < B < sqrt(D)`` and
    ``sqrt(D) - B < 2|A| < sqrt(D) + B``.
    """
    _check_discriminant(D)
    s = isqrt(D)
    out = []
    for B in range(2 - D % 2, s + 1, 2):
        m = (D - B * B) // 4
        lo, hi = s + 1 - B, s + B
        for d in _factor.divisors(m):
            if 2 * d < lo:
                continue
            if 2 * d > hi:
                break
            if gcd(gcd(d, B), m // d) != 1:
                continue
            out.append((d, B, -(m // d)))
            out.append((-d, B, m // d))
    return out


def rho(form: tuple[int, int, int], D: int) -> tuple[int, int, int]:
    """One proper reduction step ``(A, B, C) -> (C, B', C')`` for a reduced form."""
    A, B, C = form
    s = isqrt(D)
    two_c = 2 * abs(C)
    B2 = s - (s + B) % two_c
    return C, B2, (B2 * B2 - D) // (4 * C)


@functools.lru_cache(maxsize=1 << 16)
def form_cycles(D: int) -> tuple[tuple[tuple[int, int, int], ...], ...]:
    """Reduction cycles of primitive forms; one cycle per proper class."""
    forms = set(reduced_forms(D))
    cycles = []
    for f in sorted(forms):
        if f not in forms:
            continue
        cycle = []
        g = f
        while g in forms:
            forms.discard(g)
            cycle.append(g)
            g = rho(g, D)
        if g != f:
            raise AssertionError(f"reduction of {f} left the reduced set at D={D}")
        cycles.append(tuple(cycle))
    return tuple(cycles)


def form_classes(D: int) -> list[FormClass]:
    return [FormClass(*min(c)) for c in form_cycles(D)]


def class_number(D: int) -> int:
    """Number of proper (SL2) classes of primitive forms of discriminant ``D``."""
    return len(form_cycles(D))


def count_units_below(x, fundamental_only: bool = False) -> int:
    """Count traces ``a >= 3`` whose unit ``(a + sqrt(a^2-4))/2`` is ``<= x``.

    The unit is ``<= x`` exactly when ``a <= x + 1/x``, which is the integer
    comparison ``(2x - a)^2 >= a^2 - 4`` with ``2x >= a`` rearranged.
    With ``fundamental_only`` a trace counts only if ``a^2 - 4`` is itself a
    fundamental discriminant.
    """
    x = _exact(x)
    if x <= 1:
        raise PreconditionError("x must exceed 1")
    a_max = (x + 1 / x).__floor__()
    if not fundamental_only:
        return max(0, a_max - 2)
    return sum(1 for a in range(3, a_max + 1) if unit_from_trace(a).b == 1)


def _exact(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if hasattr(x, "_mpf_"):
        man, exp = x.man, x.exp
        return Fraction(int(man)) * (Fraction(2) ** int(exp))
    return Fraction(str(x))
