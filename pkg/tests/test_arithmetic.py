from math import gcd, isqrt

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from boundedgaps._numeric import midpoint, workprec
from boundedgaps.arithmetic import (
    admissible_c,
    congruence_gap_scan,
    gamma_n_membership,
    gamma_n_witness,
    quaternion_gap_scan,
    quaternion_witness,
)
from boundedgaps.errors import PreconditionError

from oracles import squarefree_part


def _eps(a):
    return (a + mp.sqrt(a * a - 4)) / 2


def _check_matrix(M, N, a):
    (p, q), (r, s) = M
    assert p * s - q * r == 1
    assert p + s == a
    assert (p - 1) % N == 0 and (s - 1) % N == 0 and q % N == 0 and r % N == 0


def test_gamma_two_witness_example():
    w = gamma_n_witness(2, 1)
    assert (w.a, w.b, w.D) == (18, 8, 5)
    assert w.matrix == ((29, -40), (8, -11))
    _check_matrix(w.matrix, 2, 18)


def test_gamma_three_witness_example():
    w = gamma_n_witness(3, 1)
    assert (w.a, w.b, w.D) == (83, 9, 85)
    assert w.matrix == ((424, -16065), (9, -341))
    _check_matrix(w.matrix, 3, 83)


def test_witness_rejects_bad_arguments():
    with pytest.raises(PreconditionError):
        gamma_n_witness(2, 0)
    with pytest.raises(PreconditionError):
        gamma_n_witness(1, 3)


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6, 7])
def test_witnesses_independently_checked(N):
    for c in range(1, 41):
        w = gamma_n_witness(N, c)
        _check_matrix(w.matrix, N, 2 + c * N**4)
        assert w.b % N == 0
        assert w.a**2 - 4 == w.b**2 * w.D


def test_membership_examples():
    assert gamma_n_membership(((29, -40), (8, -11)), 2)
    assert gamma_n_membership(((1, 0), (0, 1)), 5)
    assert not gamma_n_membership(((1, 1), (0, 1)), 2)
    assert gamma_n_membership(((-1, 0), (0, -1)), 3)
    with pytest.raises(PreconditionError):
        gamma_n_membership(((2, 0), (0, 1)), 2)


def test_congruence_gap_examples():
    with workprec(200):
        r = congruence_gap_scan(2, 2)
        assert abs(float(midpoint(r.gaps[0])) - 16.026) < 1e-3
        r = congruence_gap_scan(2, 50)
        assert all(16 < g.a and g.b < 16.03 for g in r.gaps)
        assert all(y.b < x.a for x, y in zip(r.gaps, r.gaps[1:]))
    with pytest.raises(PreconditionError):
        congruence_gap_scan(1, 5)


def test_congruence_gaps_against_direct_evaluation():
    with workprec(300):
        r = congruence_gap_scan(3, 20)
        for c, g in zip(range(1, 20), r.gaps):
            direct = _eps(2 + (c + 1) * 81) - _eps(2 + c * 81)
            assert abs(midpoint(g) - direct) < mp.mpf(10) ** -40


def _quaternion_oracle(S, c):
    R = 1
    for p in S:
        R *= p
    a = 2 + 4 * c * R
    D = a * a - 4
    delta = squarefree_part(D)
    disc = delta if delta % 4 == 1 else 4 * delta
    f = isqrt(D // disc)
    assert f * f * disc == D
    return a, D, delta, disc, f


def test_quaternion_examples():
    r = quaternion_witness((3, 5), 1)
    assert (r.a, r.D, r.delta, r.disc, r.conductor) == (62, 3840, 15, 60, 8)
    assert not r.discrepancies
    r = quaternion_witness((2, 3), 1)
    assert (r.a, r.D, r.delta, r.disc, r.conductor) == (26, 672, 42, 168, 2)
    two = r.per_prime[0]
    assert two.p == 2 and two.ramified and not two.conductor_maximal and two.discrepancy
    with pytest.raises(PreconditionError):
        quaternion_witness((7,), 1)
    with pytest.raises(PreconditionError):
        quaternion_witness((3, 5), 3)
    with pytest.raises(PreconditionError):
        quaternion_witness((4, 5), 1)


@pytest.mark.parametrize("S", [(3, 5), (3, 7), (5, 7, 11), (2, 3), (2, 5)])
def test_quaternion_matches_factorization_oracle(S):
    for c in admissible_c(S, 60):
        r = quaternion_witness(S, c)
        assert (r.a, r.D, r.delta, r.disc, r.conductor) == _quaternion_oracle(S, c)
        for pc in r.per_prime:
            assert pc.ramified == (r.disc % pc.p == 0)
            assert pc.conductor_maximal == (r.conductor % pc.p != 0)
            if pc.p % 2:
                assert pc.ramified and pc.exact_divisor and pc.conductor_maximal


def test_quaternion_json_keys():
    d = quaternion_witness((3, 5), 1).as_dict()
    assert set(d) == {"S", "R", "c", "a", "D", "Delta", "disc", "conductor", "perPrime"}
    assert d["perPrime"][0]["p"] == 3


def test_quaternion_gap_examples():
    with workprec(200):
        r = quaternion_gap_scan((3, 5), c_values=[1, 7])
        assert abs(float(midpoint(r.gaps[0])) - 360.0) < 0.05
        r = quaternion_gap_scan((3, 5), c_values=[11, 13])
        assert abs(float(midpoint(r.gaps[0])) - 120.0) < 0.01
    with pytest.raises(PreconditionError):
        quaternion_gap_scan((3, 5), c_max=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(1, 10**4))
def test_witness_property(N, c):
    w = gamma_n_witness(N, c)
    _check_matrix(w.matrix, N, 2 + c * N**4)
    assert gamma_n_membership(w.matrix, N)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 5), (3, 7), (5, 7), (3, 5, 7), (11, 13)]), st.integers(1, 10**5))
def test_odd_primes_always_ramify(S, c):
    R = 1
    for p in S:
        R *= p
    if gcd(c, 2 * R) != 1:
        c = 1
    r = quaternion_witness(S, c)
    for p in S:
        assert r.disc % p == 0 and r.disc % (p * p) != 0 and r.conductor % p != 0
