from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from boundedgaps.errors import PreconditionError
from boundedgaps.quadratic import (
    QuadraticInteger,
    class_number,
    count_units_below,
    form_cycles,
    fundamental_decompose,
    fundamental_unit,
    is_discriminant,
    is_fundamental,
    reduced_forms,
    unit_from_trace,
)

from oracles import form_classes_bfs, pell_scan, squarefree_part

DISCS = [D for D in range(5, 501) if is_discriminant(D)]


def test_is_discriminant_examples():
    assert is_discriminant(5)
    assert not is_discriminant(4)
    assert not is_discriminant(7)
    assert not is_discriminant(0)
    assert not is_discriminant(-3)


@pytest.mark.parametrize("n, expected", [(320, (8, 5)), (12, (1, 12)), (672, (2, 168))])
def test_fundamental_decompose_examples(n, expected):
    assert fundamental_decompose(n) == expected


def test_fundamental_decompose_rejects_bad_input():
    for n in (16, 7, 2):
        with pytest.raises(PreconditionError):
            fundamental_decompose(n)


@pytest.mark.parametrize("D", DISCS)
def test_fundamental_decompose_against_squarefree_part(D):
    f, D0 = fundamental_decompose(D)
    assert f * f * D0 == D
    assert is_fundamental(D0)
    core = squarefree_part(D)
    assert D0 in (core, 4 * core)


@pytest.mark.parametrize("D, ab", [(5, (3, 1)), (8, (6, 2)), (12, (4, 1))])
def test_fundamental_unit_examples(D, ab):
    u = fundamental_unit(D).unit
    assert (u.a, u.b) == ab


@pytest.mark.parametrize("D", DISCS)
def test_fundamental_unit_matches_pell_scan(D):
    u = fundamental_unit(D).unit
    found = pell_scan(D)
    if found is None:
        assert u.b > 2 * 10**5
    else:
        assert (u.a, u.b) == found
    assert u.norm == 1


def test_fundamental_unit_real_value():
    mp.prec = 200
    assert abs(fundamental_unit(5).real_value - (3 + mp.sqrt(5)) / 2) < mp.mpf(10) ** -50


@pytest.mark.parametrize("D, h", [(5, 1), (8, 1), (40, 2), (12, 2), (21, 2), (85, 2)])
def test_class_number_examples(D, h):
    assert class_number(D) == h


@pytest.mark.parametrize("D", [D for D in DISCS if D <= 200])
def test_class_number_matches_bfs(D):
    assert class_number(D) == form_classes_bfs(D, box=4 * isqrt(D) + 4)


@pytest.mark.parametrize("D", [13, 40, 85, 136, 229])
def test_cycles_partition_reduced_forms(D):
    forms = [f for c in form_cycles(D) for f in c]
    assert sorted(forms) == sorted(reduced_forms(D))
    s = D**0.5
    for A, B, C in forms:
        assert B * B - 4 * A * C == D
        assert 0 < B < s and s - B < 2 * abs(A) < s + B


@pytest.mark.parametrize("a, b, D0", [(3, 1, 5), (6, 2, 8)])
def test_unit_from_trace_examples(a, b, D0):
    u = unit_from_trace(a)
    assert (u.b, u.D) == (b, D0)


def test_unit_from_trace_values():
    assert abs(float(unit_from_trace(3)) - 2.6180339887) < 1e-9
    assert abs(float(unit_from_trace(6)) - 5.8284271247) < 1e-9


@pytest.mark.parametrize("a", [2, 1, 0, -5])
def test_unit_from_trace_rejects_non_hyperbolic(a):
    with pytest.raises(PreconditionError):
        unit_from_trace(a)


@pytest.mark.parametrize("x, n", [(2, 0), (3, 1), (10, 8)])
def test_count_units_below_examples(x, n):
    assert count_units_below(x) == n


def test_count_units_below_rejects_small_x():
    with pytest.raises(PreconditionError):
        count_units_below(1)


def test_parity_condition_enforced():
    with pytest.raises(PreconditionError):
        QuadraticInteger(1, 0, 5)
    with pytest.raises(PreconditionError):
        QuadraticInteger(1, 1, 8)


def test_equality_across_orders():
    # (6 + 2 sqrt 8)/2 and (6 + 4 sqrt 2)/2 are the same real number
    assert unit_from_trace(6) == fundamental_unit(8).unit
    assert hash(unit_from_trace(6)) == hash(fundamental_unit(8).unit)


def _direct_count(x: Fraction) -> int:
    mp.prec = 128
    xm = mp.mpf(x.numerator) / x.denominator
    n, a = 0, 3
    while unit_from_trace(a).real() <= xm:
        n += 1
        a += 1
    return n


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=Fraction(101, 100), max_value=400))
def test_count_units_below_matches_direct_scan(x):
    assert count_units_below(x) == _direct_count(x)


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 5000))
def test_trace_unit_identity(a):
    u = unit_from_trace(a)
    assert u.a**2 - 4 == u.b**2 * u.D
    assert u.norm == 1
    assert is_fundamental(u.D)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DISCS), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_norm_is_multiplicative(D, a1, b1, a2, b2):
    a1 += (a1 - b1 * D) % 2
    a2 += (a2 - b2 * D) % 2
    x, y = QuadraticInteger(a1, b1, D), QuadraticInteger(a2, b2, D)
    assert (x * y).norm == x.norm * y.norm
    assert (x * y).trace == (x.a * y.a + x.b * y.b * D) // 2


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 400), st.integers(3, 400))
def test_order_agrees_with_trace(a, b):
    # eps is increasing in the trace
    x, y = unit_from_trace(a), unit_from_trace(b)
    assert (x < y) == (a < b)
    assert (x == y) == (a == b)
