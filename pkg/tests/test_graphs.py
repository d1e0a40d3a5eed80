import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from boundedgaps import graphs as g
from boundedgaps._numeric import workprec
from boundedgaps.errors import MalformedInputError, PreconditionError

from oracles import cyclic_classes, ihara_bass, nb_closed_walks

TEST_GRAPHS = {
    "loop": lambda: g.single_loop(),
    "bouquet": lambda: g.bouquet(1, 1),
    "theta": lambda: g.theta_graph(),
    "x1": lambda: g.x_graph(1),
}


def _brute_classes(mg, n):
    oe = g.orient(mg.graph)
    return cyclic_classes(nb_closed_walks([k.source for k in oe], [k.target for k in oe], n))


def test_orient_examples():
    oe = g.orient(g.single_loop().graph)
    assert len(oe) == 2 and oe[0].opposite == 1 and oe[1].opposite == 0
    assert len(g.orient(g.theta_graph().graph)) == 6
    assert g.orient(g.Graph(("v",), ())) == []


@pytest.mark.parametrize("name", TEST_GRAPHS)
def test_orientation_involution(name):
    oe = g.orient(TEST_GRAPHS[name]().graph)
    for k in oe:
        back = oe[k.opposite]
        assert back.opposite == k.index and back.index != k.index
        assert (back.source, back.target) == (k.target, k.source)


def test_enumerate_examples():
    loop = g.enumerate_geodesics(g.single_loop(), 2)
    assert sorted((c.combinatorial_length, c.period) for c in loop) == [(1, 1), (1, 1), (2, 1), (2, 1)]
    assert len(g.enumerate_geodesics(g.bouquet(1, 1), 1)) == 4
    assert g.enumerate_geodesics(g.path_graph(4), 6) == []
    with pytest.raises(PreconditionError):
        g.enumerate_geodesics(g.single_loop(), 0)


@pytest.mark.parametrize("name", TEST_GRAPHS)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_enumeration_matches_brute_force(name, n):
    mg = TEST_GRAPHS[name]()
    got = {c.word: c.period for c in g.enumerate_geodesics(mg, n) if c.combinatorial_length == n}
    assert got == _brute_classes(mg, n)


@pytest.mark.parametrize("name", TEST_GRAPHS)
def test_marked_path_count_equals_trace(name):
    mg = TEST_GRAPHS[name]()
    B = g.nonbacktracking_matrix(mg.graph)
    geos = g.enumerate_geodesics(mg, 8)
    P = np.eye(B.shape[0], dtype=np.int64)
    for n in range(1, 9):
        P = P @ B
        assert sum(c.period for c in geos if c.combinatorial_length == n) == np.trace(P)


def test_transfer_matrix_examples():
    with workprec(128):
        s = mp.mpc(1, 1)
        T = g.transfer_matrix(g.single_loop(), s).matrix
        u = mp.exp(-s)
        assert abs(T[0, 0] - u) < 1e-30 and abs(T[1, 1] - u) < 1e-30 and T[0, 1] == 0
        T = g.transfer_matrix(g.bouquet(1, 1), s).to_numpy()
        J_minus_S = np.ones((4, 4)) - np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        assert np.allclose(T, complex(u) * J_minus_S)
        assert g.transfer_matrix(g.MetricGraph(g.Graph(("v",), ()), ()), s).size == 0


def test_zeta_det_closed_forms():
    with workprec(200):
        for s in (mp.mpc(1, 0), mp.mpc(2, 1), mp.mpc(-1, 3)):
            u = mp.exp(-s)
            assert abs(g.zeta_det(g.single_loop(), s) - (1 - u) ** 2) < mp.mpf(10) ** -50
            assert abs(g.zeta_det(g.bouquet(1, 1), s) - (1 - 3 * u) * (1 + u) * (1 - u) ** 2) < mp.mpf(10) ** -50
        assert abs(g.zeta_det(g.theta_graph(), 60) - 1) < mp.mpf(10) ** -40


@pytest.mark.parametrize("name", ["bouquet", "theta", "x1"])
def test_zeta_det_matches_ihara_bass(name):
    mg = TEST_GRAPHS[name]()
    verts = list(mg.graph.vertices)
    A = np.zeros((len(verts), len(verts)))
    for _, ends in mg.graph.edges:
        if len(ends) == 1:
            i = verts.index(ends[0])
            A[i, i] += 2
        else:
            i, j = verts.index(ends[0]), verts.index(ends[1])
            A[i, j] += 1
            A[j, i] += 1
    for s in (0.7 + 0.2j, 1.5, 2 - 1j):
        u = np.exp(-s)
        expected = ihara_bass(A, len(mg.graph.edges), u)
        with workprec(128):
            assert abs(complex(g.zeta_det(mg, s)) - expected) < 1e-10


def test_zeta_polynomial_bouquet():
    theta, coeffs = g.zeta_polynomial(g.bouquet(1, 1))
    assert theta == 1
    # (1 - 3u)(1 + u)(1 - u)^2 expanded
    assert coeffs == [1, -4, 2, 4, -3]


def test_zeta_product_examples():
    with workprec(128):
        s = mp.mpf(2)
        assert abs(g.zeta_product(g.single_loop(), s, 3) - (1 - mp.exp(-s)) ** 2) < mp.mpf(10) ** -30
        assert g.zeta_product(g.path_graph(3), s, 5) == 1
        for name in TEST_GRAPHS:
            mg = TEST_GRAPHS[name]()
            assert abs(g.zeta_product(mg, mp.mpc(4, 1), 14) - g.zeta_det(mg, mp.mpc(4, 1))) < mp.mpf(10) ** -12
    with pytest.raises(PreconditionError):
        g.zeta_product(g.single_loop(), 2, 0)


def test_trace_identity_examples():
    with workprec():
        assert g.trace_identity_residual(g.single_loop(), 1, 3) < mp.mpf(10) ** -60
        assert g.trace_identity_residual(g.bouquet(1, 1), 0, 1) < mp.mpf(10) ** -60
    with pytest.raises(PreconditionError):
        g.trace_identity_residual(g.single_loop(), 1, 0)


def test_log_det_series_converges():
    with workprec(128):
        mg = g.theta_graph((1, 2, 3))
        s = mp.mpc(2, 1)
        target = g.zeta_det(mg, s)
        errs = [abs(g.log_det_series(mg, s, n) - target) for n in (5, 10, 20)]
        assert errs[0] > errs[1] > errs[2]


def test_degenerations_match_figures():
    x = g.x_graph(1)
    c = g.degenerate(x, {"a": "contract"})
    assert set(c.graph.vertices) == {"M", "R"}
    assert dict(c.graph.edges) == {"l": ("M",), "r1": ("M", "R"), "r2": ("M", "R")}
    d = g.degenerate(x, {"a": "delete"})
    assert set(d.graph.vertices) == {"L", "M", "R"}
    assert dict(d.graph.edges) == {"l": ("L", "M"), "r1": ("M", "R"), "r2": ("M", "R")}
    assert g.degenerate(x, {}) == x
    with pytest.raises(PreconditionError):
        g.degenerate(g.single_loop(), {"e": "contract"})
    assert g.x_graph(0).limit() == c
    assert g.x_graph(g.INF).limit() == d


def test_convergence_probes():
    grid = [mp.mpc(re, im) for re in (-1.4, -0.7, 0, 0.7, 1.4) for im in (-1.4, -0.7, 0, 0.7, 1.4)]
    lim = g.degenerate(g.x_graph(1), {"a": "contract"})
    res = g.convergence_probe(g.x_graph, lim, grid, [Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)])
    assert res.strictly_decreasing
    same = g.convergence_probe(lambda a: lim, lim, grid[:3], [1, 2])
    assert all(r == 0 for row in same.residuals for r in row)


def test_rational_gap_examples():
    assert g.rational_gap_check(g.theta_graph(), 1, 12).ok
    assert g.rational_gap_check(g.bouquet(1, 2), 1, 10).ok
    mg = g.MetricGraph.from_edges({"e": (("v",), mp.sqrt(2))})
    with pytest.raises(PreconditionError):
        g.rational_gap_check(mg, 1, 10)


def test_graph_json_roundtrip(tmp_path):
    mg = g.MetricGraph.from_edges({"a": (("L", "M"), Fraction(3, 2)), "b": (("M",), 2)})
    path = tmp_path / "x.json"
    g.dump_graph(mg, path)
    data = json.loads(path.read_text())
    assert data["edges"][0]["length"] == "1.5"
    assert g.load_graph(path) == mg


@pytest.mark.parametrize(
    "doc",
    [
        {"vertices": ["v"]},
        {"vertices": ["v"], "edges": [{"id": "e", "ends": ["v", "w"], "length": "1"}]},
        {"vertices": ["v"], "edges": [{"id": "e", "ends": [], "length": "1"}]},
        {"vertices": ["v"], "edges": [{"id": "e", "ends": ["v"], "length": "abc"}]},
        {"vertices": ["v"], "edges": [{"id": "e", "ends": ["v"], "length": "1"}, {"id": "e", "ends": ["v"], "length": "1"}]},
    ],
)
def test_malformed_graphs(doc):
    with pytest.raises(MalformedInputError):
        g.graph_from_dict(doc)


lengths = st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4)


@settings(max_examples=20, deadline=None)
@given(st.lists(lengths, min_size=1, max_size=3), st.integers(1, 6))
def test_trace_identity_property(ls, n):
    mg = g.bouquet(*ls)
    with workprec(256):
        assert g.trace_identity_residual(mg, mp.mpc(1, 1), n) < mp.mpf(10) ** -40


@settings(max_examples=15, deadline=None)
@given(st.permutations(["e0", "e1", "e2"]))
def test_enumeration_independent_of_edge_order(order):
    base = {"e0": (("x", "y"), 1), "e1": (("x", "y"), 2), "e2": (("x",), 1)}
    mg = g.MetricGraph.from_edges({e: base[e] for e in order})
    lens = sorted((c.length, c.period, c.combinatorial_length) for c in g.enumerate_geodesics(mg, 5))
    ref = sorted((c.length, c.period, c.combinatorial_length) for c in g.enumerate_geodesics(g.MetricGraph.from_edges(base), 5))
    assert lens == ref


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=2, max_size=3))
def test_zeta_polynomial_matches_det(ls):
    mg = g.bouquet(*ls)
    theta, coeffs = g.zeta_polynomial(mg)
    with workprec(200):
        s = mp.mpc(0.5, 0.3)
        u = mp.exp(-s * theta)
        assert abs(sum(c * u**i for i, c in enumerate(coeffs)) - g.zeta_det(mg, s)) < mp.mpf(10) ** -40
