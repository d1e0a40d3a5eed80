"""Quick invariant suites run by ``boundedgaps <command> --selftest``."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Callable

from mpmath import mp

from ._numeric import workprec


def _quadratic() -> dict[str, Callable[[], bool]]:
    from .quadratic import class_number, count_units_below, fundamental_unit, unit_from_trace

    def units_have_norm_one():
        return all(fundamental_unit(D).unit.norm == 1 for D in range(5, 300) if D % 4 in (0, 1) and isqrt(D) ** 2 != D)

    def trace_decomposition():
        return all((u := unit_from_trace(a)).a ** 2 - 4 == u.b**2 * u.D for a in range(3, 300))

    def unit_count_matches_scan():
        for x in (Fraction(10), Fraction(77, 3), Fraction(500)):
            direct = sum(1 for a in range(3, 1000) if unit_from_trace(a).real() <= mp.mpf(x.numerator) / x.denominator)
            if count_units_below(x) != direct:
                return False
        return True

    def small_class_numbers():
        return [class_number(D) for D in (5, 8, 12, 40, 85)] == [1, 1, 2, 2, 2]

    return {
        "fundamental units have norm 1": units_have_norm_one,
        "a^2 - 4 = b^2 D0": trace_decomposition,
        "unit count equals direct scan": unit_count_matches_scan,
        "known class numbers": small_class_numbers,
    }


def _modular() -> dict[str, Callable[[], bool]]:
    from .modular import limit_gap_estimate, spectrum

    def gaps_certified():
        return limit_gap_estimate(300).certified

    def multiplicities_positive():
        return all(e.multiplicity >= 1 for e in spectrum(200))

    return {"gaps > 1, decreasing, excess <= 3/a^2": gaps_certified, "every trace has a class": multiplicities_positive}


def _arithmetic() -> dict[str, Callable[[], bool]]:
    from .arithmetic import congruence_gap_scan, gamma_n_membership, gamma_n_witness, quaternion_witness, admissible_c

    def witnesses():
        return all(
            not gamma_n_witness(N, c).failures() and gamma_n_membership(gamma_n_witness(N, c).matrix, N)
            for N in range(2, 6)
            for c in range(1, 11)
        )

    def congruence_gaps():
        r = congruence_gap_scan(2, 10)
        return all(g.a > 16 for g in r.gaps)

    def odd_primes_ramify():
        return not any(
            pc.discrepancy for c in admissible_c((3, 5), 30) for pc in quaternion_witness((3, 5), c).per_prime
        )

    return {
        "Gamma(N) witnesses valid": witnesses,
        "congruence gaps exceed N^4": congruence_gaps,
        "odd ramified primes maximal": odd_primes_ramify,
    }


def _sequences() -> dict[str, Callable[[], bool]]:
    from .sequences import limit_gap_report, merge

    a, b, c = [1, 4, 9], [2, 4, 10], [Fraction(1, 2), 9]

    def commutative():
        return merge(a, b).values == merge(b, a).values

    def associative():
        return merge(merge(a, b), c).values == merge(a, merge(b, c)).values

    def min_is_brute():
        xs = sorted(set(a + b))
        return limit_gap_report(xs).global_min == min(y - x for x, y in zip(xs, xs[1:]))

    return {"merge commutative": commutative, "merge associative": associative, "report min = brute min": min_is_brute}


def _graphs() -> dict[str, Callable[[], bool]]:
    from . import graphs as g

    def trace_identity():
        with workprec():
            return all(g.trace_identity_residual(mg, 1, n) < mp.mpf(10) ** -30 for mg in (g.bouquet(1, 1), g.theta_graph()) for n in (1, 3, 5))

    def euler_product():
        with workprec():
            mg = g.bouquet(1, 1)
            return abs(g.zeta_product(mg, 4, 10) - g.zeta_det(mg, 4)) < mp.mpf(10) ** -12

    def polynomial():
        with workprec():
            mg = g.bouquet(1, 1)
            _, coeffs = g.zeta_polynomial(mg)
            u = mp.exp(-mp.mpf(2))
            return abs(sum(c * u**i for i, c in enumerate(coeffs)) - g.zeta_det(mg, 2)) < mp.mpf(10) ** -40

    def rational_gaps():
        return g.rational_gap_check(g.theta_graph(), 1, 8).ok

    return {
        "trace identity": trace_identity,
        "Euler product matches determinant": euler_product,
        "exact zeta polynomial": polynomial,
        "rational graph gaps grow": rational_gaps,
    }


def _bouquet() -> dict[str, Callable[[], bool]]:
    from . import bouquet as b

    def construct_verify():
        res = b.liouville_construct("0.3", Fraction(1, 1000), 3)
        return len(b.verify_small_gaps(res.a, Fraction(1, 1000), 3)) == 3

    def linearization():
        res = b.liouville_construct("0.7", 1, 2)
        lo, hi = res.a.bounds()
        with workprec():
            for pr in res.pairs:
                (m, n), (k, l) = pr.mn, pr.kl
                x = max(abs(lo * (m - k) + n - l), abs(hi * (m - k) + n - l))
                xm = mp.mpf(x.numerator) / x.denominator
                if not pr.gap.b <= xm * mp.exp(xm) * pr.scale.b * (1 + mp.mpf(10) ** -50):
                    return False
        return True

    def pair_symmetric():
        with workprec():
            a = mp.log(2)
            x, y = b.pair_gap(a, (3, 1), (1, 2)).gap, b.pair_gap(a, (1, 2), (3, 1)).gap
            return x.a <= y.b and y.a <= x.b

    return {
        "constructed pairs re-verify": construct_verify,
        "gap within linearization bound": linearization,
        "gap symmetric in the pair": pair_symmetric,
    }


SUITES = {
    "classnum": _quadratic,
    "spectrum": _modular,
    "congruence": _arithmetic,
    "quaternion": _arithmetic,
    "gaps": _sequences,
    "graph": _graphs,
    "bouquet": _bouquet,
}


def run(command: str, out) -> bool:
    ok = True
    for name, check in SUITES[command]().items():
        try:
            passed = bool(check())
        except Exception as exc:  # a crashing check is a failure, not an abort
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {command}: {name}", file=out)
    return ok
