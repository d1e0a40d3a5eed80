"""Witness progressions for congruence subgroups and quaternion unit groups.

For the principal congruence subgroup Gamma(N) the traces ``a = 2 + c N^4``
each carry an explicit matrix of Gamma(N) whose norm is ``eps(a)``.  For the
norm-one units of a quaternion algebra ramified at the primes ``S`` the
traces ``a = 2 + 4 c R`` (``R`` the product of ``S``) give real quadratic
fields in which every ``p`` in ``S`` ramifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt, prod

from . import _factor
from .errors import PreconditionError, VerificationError
from .modular import GapReport, SpectrumEntry, gap_scan
from .quadratic import QuadraticInteger, unit_from_trace

Matrix = tuple[tuple[int, int], tuple[int, int]]


def _det(M: Matrix) -> int:
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def _is_prime(p: int) -> bool:
    return isinstance(p, int) and p >= 2 and _factor.factorize(p) == {p: 1}


@dataclass(frozen=True)
class WitnessMatrix:
    matrix: Matrix
    N: int
    a: int
    b: int
    D: int

    @property
    def trace(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def det(self) -> int:
        return _det(self.matrix)

    @property
    def unit(self) -> QuadraticInteger:
        return QuadraticInteger(self.a, self.b, self.D)

    def failures(self) -> list[str]:
        """Names of the witness invariants that do not hold (empty when valid)."""
        (p, q), (r, s) = self.matrix
        N = self.N
        out = []
        if self.det != 1:
            out.append(f"det = {self.det}")
        if self.trace != self.a:
            out.append(f"trace {self.trace} != {self.a}")
        if (p - 1) % N or (s - 1) % N or q % N or r % N:
            out.append("not congruent to I mod N")
        if self.b % N:
            out.append("N does not divide b")
        if self.a * self.a - 4 != self.b * self.b * self.D:
            out.append("a^2 - 4 != b^2 D")
        return out


def gamma_n_witness(N: int, c: int) -> WitnessMatrix:
    """Matrix of Gamma(N) with trace ``a = 2 + c N^4``.

    With ``a^2 - 4 = b^2 D`` and ``D`` fundamental the matrix is
    ``[[(a + bD)/2, bD(1 - D)/4], [b, (a - bD)/2]]``.  Its determinant is
    ``(a^2 - b^2 D^2)/4 + b^2 D (D - 1)/4 = 1``.  Every invariant is checked
    before returning.
    """
    if not isinstance(N, int) or N < 2:
        raise PreconditionError("level N must be an integer >= 2")
    if not isinstance(c, int) or c < 1:
        raise PreconditionError("c must be >= 1 (c = 0 gives the parabolic trace 2)")
    a = 2 + c * N**4
    u = unit_from_trace(a)
    b, D = u.b, u.D
    M = (((a + b * D) // 2, b * D * (1 - D) // 4), (b, (a - b * D) // 2))
    w = WitnessMatrix(M, N, a, b, D)
    bad = w.failures()
    if bad:
        raise VerificationError(f"Gamma({N}) witness for c={c} failed: {', '.join(bad)}")
    return w


def gamma_n_membership(M, N: int) -> bool:
    """True iff the determinant-one integer matrix ``M`` is +-I modulo ``N``."""
    M = tuple(tuple(int(x) for x in row) for row in M)
    if _det(M) != 1:
        raise PreconditionError(f"matrix has determinant {_det(M)}, expected 1")
    if N < 1:
        raise PreconditionError("level must be positive")
    (p, q), (r, s) = M
    if q % N or r % N:
        return False
    return ((p - 1) % N == 0 and (s - 1) % N == 0) or ((p + 1) % N == 0 and (s + 1) % N == 0)


def congruence_sequence(N: int, c_max: int) -> list[SpectrumEntry]:
    if not isinstance(N, int) or N < 2:
        raise PreconditionError("level N must be an integer >= 2")
    return [SpectrumEntry(a, unit_from_trace(a)) for a in (2 + c * N**4 for c in range(1, c_max + 1))]


def congruence_gap_scan(N: int, c_max: int) -> GapReport:
    """Gaps of ``eps(2 + c N^4)`` for ``c = 1..c_max``; they decrease to ``N^4``."""
    if not isinstance(N, int) or N < 2:
        raise PreconditionError("level N must be an integer >= 2")
    if c_max < 2:
        raise PreconditionError("c_max must be >= 2 to have a gap")
    return gap_scan(congruence_sequence(N, c_max))


@dataclass(frozen=True)
class PrimeCheck:
    p: int
    ramified: bool
    exact_divisor: bool  # p divides disc exactly once
    conductor_maximal: bool

    @property
    def discrepancy(self) -> bool:
        # the maximality argument asserts all three for every p in S
        return not (self.ramified and self.exact_divisor and self.conductor_maximal)


@dataclass(frozen=True)
class QuaternionReport:
    S: tuple[int, ...]
    R: int
    c: int
    a: int
    D: int
    delta: int
    disc: int
    conductor: int
    per_prime: tuple[PrimeCheck, ...] = field(default=())

    @property
    def unit(self) -> QuadraticInteger:
        return unit_from_trace(self.a)

    @property
    def discrepancies(self) -> list[int]:
        return [pc.p for pc in self.per_prime if pc.discrepancy]

    def as_dict(self) -> dict:
        return {
            "S": list(self.S),
            "R": self.R,
            "c": self.c,
            "a": self.a,
            "D": self.D,
            "Delta": self.delta,
            "disc": self.disc,
            "conductor": self.conductor,
            "perPrime": [
                {
                    "p": pc.p,
                    "ramified": pc.ramified,
                    "exactDivisor": pc.exact_divisor,
                    "conductorMaximal": pc.conductor_maximal,
                    "discrepancy": pc.discrepancy,
                }
                for pc in self.per_prime
            ],
        }


def _check_primes(S) -> tuple[int, ...]:
    S = tuple(sorted(set(int(p) for p in S)))
    if len(S) < 2:
        raise PreconditionError("S must contain at least two primes")
    bad = [p for p in S if not _is_prime(p)]
    if bad:
        raise PreconditionError(f"not prime: {bad}")
    return S


def quaternion_witness(S, c: int) -> QuaternionReport:
    """Ramification and maximality data for ``a = 2 + 4cR``.

    ``D = a^2 - 4 = 16 c R (1 + c R)`` is split as ``m^2 Delta`` with
    ``Delta`` square-free; ``disc`` is the field discriminant and
    ``conductor`` the index ``f`` with ``D = f^2 disc``.  For odd ``p`` in ``S``
    ramification and ``p^2 ∤ disc`` are guaranteed and verified; ``p = 2`` is
    reported as computed, and a mismatch with the conductor test is flagged.
    """
    S = _check_primes(S)
    R = prod(S)
    if not isinstance(c, int) or c < 1 or gcd(c, 2 * R) != 1:
        raise PreconditionError(f"c = {c} must be a positive integer coprime to 2R = {2 * R}")
    a = 2 + 4 * c * R
    D = a * a - 4
    if D != 16 * c * R * (1 + c * R):
        raise VerificationError("a^2 - 4 != 16cR(1 + cR)")
    fac = _factor.merge(_factor.factorize(c * R), _factor.factorize(1 + c * R), {2: 4})
    delta = prod(p for p, e in fac.items() if e % 2)
    disc = delta if delta % 4 == 1 else 4 * delta
    f = isqrt(D // disc)
    if f * f * disc != D:
        raise VerificationError(f"D = {D} is not f^2 * disc with disc = {disc}")
    checks = []
    for p in S:
        ram = disc % p == 0
        pc = PrimeCheck(p, ram, ram and disc % (p * p) != 0, f % p != 0)
        if p % 2 and not (pc.ramified and pc.exact_divisor):
            raise VerificationError(f"odd prime {p} not ramified/maximal for c={c}")
        checks.append(pc)
    return QuaternionReport(S, R, c, a, D, delta, disc, f, tuple(checks))


def admissible_c(S, c_max: int) -> list[int]:
    R = prod(_check_primes(S))
    return [c for c in range(1, c_max + 1) if gcd(c, 2 * R) == 1]


def quaternion_sequence(S, c_values) -> list[SpectrumEntry]:
    R = prod(_check_primes(S))
    out = []
    for c in c_values:
        if gcd(c, 2 * R) != 1 or c < 1:
            raise PreconditionError(f"c = {c} is not coprime to 2R")
        a = 2 + 4 * c * R
        out.append(SpectrumEntry(a, unit_from_trace(a)))
    return out


def quaternion_gap_scan(S, c_max: int | None = None, c_values=None) -> GapReport:
    """Gaps of ``eps(2 + 4cR)`` over admissible ``c`` (coprime to ``2R``).

    Either ``c_max`` (all admissible ``c <= c_max``) or an explicit increasing
    list ``c_values`` selects the progression.  A gap between ``c1 < c2`` is
    ``4R (c2 - c1)`` plus a correction below ``1/a1``.
    """
    if c_values is None:
        if c_max is None:
            raise PreconditionError("give c_max or c_values")
        c_values = admissible_c(S, c_max)
    c_values = list(c_values)
    if len(c_values) < 2:
        raise PreconditionError("fewer than two admissible c values")
    if any(x >= y for x, y in zip(c_values, c_values[1:])):
        raise PreconditionError("c_values must be strictly increasing")
    return gap_scan(quaternion_sequence(S, c_values))
