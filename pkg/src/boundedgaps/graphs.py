"""Finite metric graphs, closed geodesics and the Ihara zeta function.

A closed geodesic is a cyclic class of non-backtracking closed walks on
oriented edges.  Every edge, loops included, has two orientations that are
each other's opposite, so a loop can be run repeatedly in one direction.

The zeta function is evaluated two ways: as ``det(1 - T_s)`` for the weighted
non-backtracking operator ``T_s`` and as a truncated Euler product over
primitive geodesics found by enumeration.
"""

from __future__ import annotations

import functools
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from mpmath import iv, mp

from ._numeric import to_interval, workprec
from .errors import MalformedInputError, PreconditionError

INF = math.inf


@dataclass(frozen=True)
class Graph:
    """Vertex labels and edges ``(edge_id, ends)`` with one or two ends."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise MalformedInputError("duplicate vertex labels")
        ids = [e for e, _ in self.edges]
        if len(set(ids)) != len(ids):
            raise MalformedInputError("duplicate edge ids")
        for e, ends in self.edges:
            if len(ends) not in (1, 2):
                raise MalformedInputError(f"edge {e!r} must have one or two ends, got {ends!r}")
            if len(ends) == 2 and ends[0] == ends[1]:
                raise MalformedInputError(f"edge {e!r}: write a loop with a single end")
            missing = [v for v in ends if v not in vs]
            if missing:
                raise MalformedInputError(f"edge {e!r} has unknown ends {missing}")

    @property
    def edge_ids(self) -> tuple:
        return tuple(e for e, _ in self.edges)

    def ends(self, edge_id):
        return dict(self.edges)[edge_id]

    def is_loop(self, edge_id) -> bool:
        return len(self.ends(edge_id)) == 1

    def components(self) -> list[list]:
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for _, ends in self.edges:
            if len(ends) == 2:
                ru, rv = find(ends[0]), find(ends[1])
                if ru != rv:
                    parent[rv] = ru
        groups: dict = {}
        for v in self.vertices:
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())


class OrientedEdge(NamedTuple):
    index: int
    edge: object
    direction: int
    source: object
    target: object

    @property
    def opposite(self) -> int:
        return self.index ^ 1

    def __str__(self):
        return f"{self.edge}{'+' if self.direction > 0 else '-'}"


def orient(graph: Graph) -> list[OrientedEdge]:
    """Two orientations per edge; oriented edge ``k`` has opposite ``k ^ 1``."""
    out = []
    for i, (e, ends) in enumerate(graph.edges):
        u, v = (ends[0], ends[0]) if len(ends) == 1 else ends
        out.append(OrientedEdge(2 * i, e, 1, u, v))
        out.append(OrientedEdge(2 * i + 1, e, -1, v, u))
    return out


@functools.lru_cache(maxsize=256)
def _successors(graph: Graph) -> tuple[tuple[int, ...], ...]:
    oe = orient(graph)
    by_source: dict = {}
    for k in oe:
        by_source.setdefault(k.source, []).append(k.index)
    return tuple(tuple(j for j in by_source.get(k.target, ()) if j != k.opposite) for k in oe)


def _length(x):
    if isinstance(x, str):
        x = x.strip()
        if x.lower() in ("inf", "infinity"):
            return INF
        return Fraction(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float) and math.isinf(x):
        return INF
    return x


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


@dataclass(frozen=True)
class MetricGraph:
    """A graph with a length per edge (aligned with ``graph.edges``).

    Lengths are kept exact (``Fraction``) when given as integers, fractions or
    decimal strings.  A length of ``0`` or ``inf`` marks a boundary point of
    the moduli space; such graphs only support :meth:`limit`.
    """

    graph: Graph
    lengths: tuple

    def __post_init__(self):
        if len(self.lengths) != len(self.graph.edges):
            raise MalformedInputError("one length per edge is required")
        object.__setattr__(self, "lengths", tuple(_length(x) for x in self.lengths))
        for e, l in zip(self.graph.edge_ids, self.lengths):
            if not l >= 0:
                raise MalformedInputError(f"edge {e!r} has negative length {l!r}")

    @classmethod
    def from_edges(cls, edges: Mapping, vertices: Sequence | None = None) -> "MetricGraph":
        """Build from ``{edge_id: (ends, length)}``; vertices default to all ends."""
        if vertices is None:
            seen: dict = {}
            for ends, _ in edges.values():
                for v in ends:
                    seen.setdefault(v, None)
            vertices = tuple(seen)
        g = Graph(tuple(vertices), tuple((e, tuple(ends)) for e, (ends, _) in edges.items()))
        return cls(g, tuple(l for _, l in edges.values()))

    @property
    def is_interior(self) -> bool:
        return all(0 < l < INF for l in self.lengths)

    def length_of(self, edge_id):
        return self.lengths[self.graph.edge_ids.index(edge_id)]

    def with_length(self, edge_id, value) -> "MetricGraph":
        i = self.graph.edge_ids.index(edge_id)
        return MetricGraph(self.graph, self.lengths[:i] + (value,) + self.lengths[i + 1 :])

    def limit(self) -> "MetricGraph":
        """Replace length-0 edges by contraction and length-inf edges by deletion."""
        directives = {}
        for e, l in zip(self.graph.edge_ids, self.lengths):
            if l == 0:
                directives[e] = "contract"
            elif l == INF:
                directives[e] = "delete"
        return degenerate(self, directives)

    @property
    def is_connected(self) -> bool:
        return len(self.graph.components()) <= 1

    def oriented_lengths(self) -> list:
        return [l for l in self.lengths for _ in (0, 1)]


def _require_interior(mg: MetricGraph) -> None:
    if not mg.is_interior:
        raise PreconditionError("graph has boundary lengths (0 or inf); call limit() first")


@dataclass(frozen=True)
class ClosedGeodesic:
    """Cyclic class of a non-backtracking closed walk.

    ``word`` is the lexicographically least rotation of the oriented-edge
    indices; ``period`` is the length of the primitive geodesic it repeats.
    """

    word: tuple[int, ...]
    length: object
    period: int

    @property
    def combinatorial_length(self) -> int:
        return len(self.word)

    @property
    def is_primitive(self) -> bool:
        return self.period == len(self.word)

    def label(self, graph: Graph) -> str:
        oe = orient(graph)
        return " ".join(str(oe[k]) for k in self.word)


@functools.lru_cache(maxsize=64)
def _necklaces(graph: Graph, n_max: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    # Depth-first generation of prenecklaces (FKM order) restricted to
    # non-backtracking words; a word of length t whose Lyndon period p divides
    # t is the least rotation of its class and is emitted once.
    succ = _successors(graph)
    oe = orient(graph)
    m = len(oe)
    src = [k.source for k in oe]
    tgt = [k.target for k in oe]
    out = []
    word = [0] * (n_max + 1)

    def extend(t: int, p: int, first: int):
        last = word[t - 1]
        if t % p == 0 and tgt[last] == src[first] and first != (last ^ 1):
            out.append((tuple(word[:t]), p))
        if t == n_max:
            return
        ref = word[t - p]
        for x in succ[last]:
            if x < ref:
                continue
            word[t] = x
            extend(t + 1, p if x == ref else t + 1, first)

    for first in range(m):
        word[0] = first
        extend(1, 1, first)
    out.sort(key=lambda w: (len(w[0]), w[0]))
    return tuple(out)


def enumerate_geodesics(mg: MetricGraph, n_max: int) -> list[ClosedGeodesic]:
    """All closed geodesics with combinatorial length ``<= n_max``."""
    if not isinstance(n_max, int) or n_max < 1:
        raise PreconditionError("n_max must be an integer >= 1")
    lens = mg.oriented_lengths()
    words = _necklaces(mg.graph, n_max)
    if lens and all(isinstance(l, Fraction) for l in lens):
        theta = _common_measure(lens)
        units = [int(l / theta) for l in lens]
        return [ClosedGeodesic(w, theta * sum([units[k] for k in w]), p) for w, p in words]
    return [ClosedGeodesic(w, sum((lens[k] for k in w[1:]), lens[w[0]]), p) for w, p in words]


def nonbacktracking_matrix(graph: Graph) -> np.ndarray:
    """Unweighted ``B[k', k] = 1`` when ``k'`` may follow ``k``."""
    succ = _successors(graph)
    m = len(succ)
    B = np.zeros((m, m), dtype=np.int64)
    for k, nxt in enumerate(succ):
        for j in nxt:
            B[j, k] = 1
    return B


@dataclass(frozen=True)
class TransferMatrix:
    s: object
    matrix: object
    oriented: tuple

    @property
    def size(self) -> int:
        return len(self.oriented)

    def to_numpy(self) -> np.ndarray:
        n = self.size
        return np.array([[complex(self.matrix[i, j]) for j in range(n)] for i in range(n)], dtype=complex)


def transfer_matrix(mg: MetricGraph, s) -> TransferMatrix:
    """``T_s[k', k] = exp(-s l(k'))`` when ``k'`` starts where ``k`` ends and is not its reverse."""
    _require_interior(mg)
    succ = _successors(mg.graph)
    oe = orient(mg.graph)
    s = mp.mpc(s)
    weights = [mp.exp(-s * _to_mpf(l)) for l in mg.oriented_lengths()]
    T = mp.matrix(len(oe), len(oe))
    for k, nxt in enumerate(succ):
        for j in nxt:
            T[j, k] = weights[j]
    return TransferMatrix(s, T, tuple(oe))


def zeta_det(mg: MetricGraph, s, bits: int | None = None):
    """Ihara zeta ``det(1 - T_s)`` at the working precision."""
    with workprec(bits):
        T = transfer_matrix(mg, s)
        n = T.size
        if n == 0:
            return mp.mpc(1)
        return _det(mp.eye(n) - T.matrix)


def _det(A):
    # Gaussian elimination with partial pivoting; an all-zero pivot column
    # means the matrix is singular and the determinant is exactly 0.
    n = A.rows
    A = A.copy()
    det = mp.mpc(1)
    for j in range(n):
        p = max(range(j, n), key=lambda i: abs(A[i, j]))
        if A[p, j] == 0:
            return mp.mpc(0)
        if p != j:
            for k in range(n):
                A[p, k], A[j, k] = A[j, k], A[p, k]
            det = -det
        pivot = A[j, j]
        det *= pivot
        for i in range(j + 1, n):
            f = A[i, j] / pivot
            if f:
                for k in range(j + 1, n):
                    A[i, k] -= f * A[j, k]
    return det


def spectral_radius(mg: MetricGraph, sigma: float) -> float:
    """Spectral radius of ``T_sigma`` for real ``sigma`` (double precision)."""
    _require_interior(mg)
    n = 2 * len(mg.graph.edges)
    if n == 0:
        return 0.0
    w = np.array([math.exp(-sigma * float(l)) for l in mg.oriented_lengths()])
    B = nonbacktracking_matrix(mg.graph) * w[:, None]
    return float(max(abs(np.linalg.eigvals(B))))


def zeta_product(mg: MetricGraph, s, cutoff: int, geodesics: Iterable[ClosedGeodesic] | None = None):
    """Euler product over primitive geodesics with ``L(c0) <= cutoff``."""
    if not isinstance(cutoff, int) or cutoff < 1:
        raise PreconditionError("cutoff must be an integer >= 1")
    _require_interior(mg)
    s = mp.mpc(s)
    if spectral_radius(mg, float(s.real)) >= 1:
        raise PreconditionError(f"Re(s) = {float(s.real)} is not in the region of absolute convergence")
    if geodesics is None:
        geodesics = enumerate_geodesics(mg, cutoff) if mg.graph.edges else []
    counts = Counter(c.length for c in geodesics if c.is_primitive and c.combinatorial_length <= cutoff)
    with workprec():
        z = mp.mpc(1)
        for length, k in sorted(counts.items()):
            z *= (1 - mp.exp(-s * _to_mpf(length))) ** k
        return z


def trace_identity_residual(mg: MetricGraph, s, n: int) -> object:
    """``|tr(T_s^n) - sum_{L(c)=n} exp(-s l(c)) L(c0)|`` over closed geodesics."""
    if not isinstance(n, int) or n < 1:
        raise PreconditionError("n must be an integer >= 1")
    with workprec():
        T = transfer_matrix(mg, s)
        if T.size == 0:
            return mp.mpf(0)
        lhs = sum((T.matrix**n)[i, i] for i in range(T.size))
        rhs = mp.mpc(0)
        for c in enumerate_geodesics(mg, n):
            if c.combinatorial_length == n:
                rhs += mp.exp(-T.s * _to_mpf(c.length)) * c.period
        return abs(lhs - rhs)


def log_det_series(mg: MetricGraph, s, n_max: int):
    """``exp(-sum_{n<=n_max} tr(T_s^n)/n)``, which tends to ``det(1 - T_s)``."""
    with workprec():
        T = transfer_matrix(mg, s)
        acc, P = mp.mpc(0), mp.eye(T.size)
        for n in range(1, n_max + 1):
            P = P * T.matrix
            acc += sum(P[i, i] for i in range(T.size)) / n
        return mp.exp(-acc)


def zeta_polynomial(mg: MetricGraph):
    """Exact ``det(1 - T_s)`` as a polynomial in ``u = exp(-s*theta)``.

    Requires commensurable rational lengths; ``theta`` is their largest common
    measure.  Returns ``(theta, coeffs)`` with ``coeffs[i]`` the coefficient
    of ``u**i``.
    """
    import sympy

    _require_interior(mg)
    if not all(isinstance(l, Fraction) for l in mg.lengths):
        raise PreconditionError("zeta_polynomial needs rational edge lengths")
    if not mg.graph.edges:
        return Fraction(1), [1]
    theta = _common_measure(mg.lengths)
    u = sympy.Symbol("u")
    succ = _successors(mg.graph)
    exps = [int(l / theta) for l in mg.oriented_lengths()]
    n = len(succ)
    M = sympy.eye(n)
    for k, nxt in enumerate(succ):
        for j in nxt:
            M[j, k] -= u ** exps[j]
    poly = sympy.Poly(sympy.expand(M.det(method="berkowitz")), u)
    coeffs = [int(c) for c in reversed(poly.all_coeffs())]
    return theta, coeffs


def _common_measure(values: Iterable[Fraction]) -> Fraction:
    values = list(values)
    num = math.gcd(*(v.numerator for v in values))
    den = math.lcm(*(v.denominator for v in values))
    return Fraction(num, den)


DIRECTIVES = ("contract", "delete", "keep")


def degenerate(mg: MetricGraph, directives: Mapping) -> MetricGraph:
    """Boundary graph obtained by sending edge lengths to 0 or infinity.

    ``contract`` identifies the two ends of an edge and removes it (length to
    0), the merged vertex keeping the label of the higher-degree end; ``delete`` removes the edge (length to infinity); ``keep`` leaves it.
    Contracting a loop, or an edge that became a loop through earlier
    contractions, is rejected.  The result may be disconnected.
    """
    ids = mg.graph.edge_ids
    for e, d in directives.items():
        if e not in ids:
            raise PreconditionError(f"unknown edge {e!r}")
        if d not in DIRECTIVES:
            raise PreconditionError(f"unknown directive {d!r} for edge {e!r}")
    order = {v: i for i, v in enumerate(mg.graph.vertices)}
    degree = Counter()
    for _, ends in mg.graph.edges:
        degree.update(ends * (3 - len(ends)))
    parent = {v: v for v in mg.graph.vertices}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for e, ends in mg.graph.edges:
        if directives.get(e) != "contract":
            continue
        if len(ends) == 1:
            raise PreconditionError(f"cannot contract loop {e!r}")
        ru, rv = find(ends[0]), find(ends[1])
        if ru == rv:
            raise PreconditionError(f"edge {e!r} is a loop after earlier contractions")
        # the higher-degree end survives, ties go to the earlier vertex
        keep, drop = sorted((ru, rv), key=lambda v: (-degree[v], order[v]))
        parent[drop] = keep
    vertices = tuple(v for v in mg.graph.vertices if find(v) == v)
    edges, lengths = [], []
    for (e, ends), l in zip(mg.graph.edges, mg.lengths):
        if directives.get(e, "keep") != "keep":
            continue
        new = tuple(dict.fromkeys(find(v) for v in ends))
        edges.append((e, new))
        lengths.append(l)
    return MetricGraph(Graph(vertices, tuple(edges)), tuple(lengths))


@dataclass
class ProbeResult:
    """Residuals ``|Z_{X_a}(s) - Z_limit(s)|`` for each ``a`` and sample ``s``."""

    a_values: list
    s_samples: list
    residuals: list  # residuals[i][j] for a_values[i], s_samples[j]

    @property
    def max_residuals(self) -> list:
        return [max(row) if row else mp.mpf(0) for row in self.residuals]

    @property
    def strictly_decreasing(self) -> bool:
        m = self.max_residuals
        return all(y < x for x, y in zip(m, m[1:]))

    def envelope_constant(self, rate) -> object:
        """Smallest ``K`` with ``max residual(a) <= K exp(-rate * a)`` on the probe."""
        return max(r * mp.exp(rate * _to_mpf(a)) for a, r in zip(self.a_values, self.max_residuals))

    def rows(self):
        for a, row in zip(self.a_values, self.residuals):
            for s, r in zip(self.s_samples, row):
                yield a, s, r


def convergence_probe(
    family: Callable[[object], MetricGraph],
    limit: MetricGraph,
    s_samples: Sequence,
    a_values: Sequence,
) -> ProbeResult:
    """Compare zeta of ``family(a)`` with zeta of the declared limit graph."""
    with workprec():
        z_lim = [zeta_det(limit, s) for s in s_samples]
        table = []
        for a in a_values:
            g = family(a)
            table.append([abs(zeta_det(g, s) - zl) for s, zl in zip(s_samples, z_lim)])
    return ProbeResult(list(a_values), list(s_samples), table)


@dataclass
class RationalGapResult:
    ok: bool
    theta: Fraction
    rows: list  # (l, l_next, norm gap, theta*exp(l))
    violation: tuple | None = None


def _as_theta(theta) -> Fraction:
    try:
        t = Fraction(str(theta)) if not isinstance(theta, (int, Fraction)) else Fraction(theta)
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"theta {theta!r} is not rational") from exc
    if t <= 0:
        raise PreconditionError("theta must be positive")
    return t


def rational_gap_check(mg: MetricGraph, theta, length_cutoff) -> RationalGapResult:
    """Check ``N(c') - N(c) >= theta * N(c)`` for consecutive distinct norms.

    Every edge length must be a positive integer multiple of ``theta``.
    Norms are ``exp(l(c))`` over geodesics with ``l(c) <= length_cutoff``;
    lengths are compared exactly and the inequality is checked with interval
    arithmetic.
    """
    _require_interior(mg)
    theta = _as_theta(theta)
    for e, l in zip(mg.graph.edge_ids, mg.lengths):
        if not isinstance(l, Fraction) or (l / theta).denominator != 1:
            raise PreconditionError(f"length of {e!r} is not in theta*N")
    cutoff = Fraction(str(length_cutoff))
    rows: list = []
    if not mg.graph.edges:
        return RationalGapResult(True, theta, rows)
    n_max = int(cutoff / min(mg.lengths))
    if n_max < 1:
        return RationalGapResult(True, theta, rows)
    ls = sorted({c.length for c in enumerate_geodesics(mg, n_max) if c.length <= cutoff})
    with workprec():
        th = to_interval(theta)
        for l, l2 in zip(ls, ls[1:]):
            x, y = to_interval(l), to_interval(l2)
            gap = iv.exp(y) - iv.exp(x)
            bound = th * iv.exp(x)
            rows.append((l, l2, gap, bound))
            if not (gap - bound).a >= 0:
                return RationalGapResult(False, theta, rows, (l, l2))
    return RationalGapResult(True, theta, rows)


# -- graph files ---------------------------------------------------------------


def graph_from_dict(data: Mapping) -> MetricGraph:
    """Parse ``{"vertices": [...], "edges": [{"id", "ends", "length"}...]}``."""
    try:
        vertices = tuple(str(v) for v in data["vertices"])
        edges = {}
        for item in data["edges"]:
            eid = str(item["id"])
            if eid in edges:
                raise MalformedInputError(f"duplicate edge id {eid!r}")
            ends = tuple(str(v) for v in item["ends"])
            length = item["length"]
            if isinstance(length, (int, float)) and not isinstance(length, bool):
                length = str(length)
            if not isinstance(length, str):
                raise MalformedInputError(f"edge {eid!r}: length must be a decimal string")
            edges[eid] = (ends, _length(length))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, MalformedInputError):
            raise
        raise MalformedInputError(f"bad graph description: {exc}") from exc
    return MetricGraph.from_edges(edges, vertices)


def graph_to_dict(mg: MetricGraph) -> dict:
    def fmt(l):
        if l == INF:
            return "inf"
        if isinstance(l, Fraction):
            if l.denominator == 1:
                return str(l.numerator)
            return _fraction_decimal(l)
        return mp.nstr(mp.mpf(l), 30)

    return {
        "vertices": list(mg.graph.vertices),
        "edges": [
            {"id": e, "ends": list(ends), "length": fmt(l)} for (e, ends), l in zip(mg.graph.edges, mg.lengths)
        ],
    }


def _fraction_decimal(x: Fraction) -> str:
    for k in range(64):
        scaled = x * 10**k
        if scaled.denominator == 1:
            break
    else:
        return f"{x.numerator}/{x.denominator}"
    if k == 0:
        return str(scaled.numerator)
    digits = str(abs(scaled.numerator)).rjust(k + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def load_graph(path) -> MetricGraph:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
    return graph_from_dict(data)


def dump_graph(mg: MetricGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(mg), fh, indent=2)
        fh.write("\n")


# -- standard examples ---------------------------------------------------------


def single_loop(length=1) -> MetricGraph:
    return MetricGraph.from_edges({"e": (("v",), length)})


def bouquet(*lengths) -> MetricGraph:
    """One vertex with a loop of each given length."""
    return MetricGraph.from_edges({f"e{i}": (("v",), l) for i, l in enumerate(lengths)})


def theta_graph(lengths=(1, 1, 1)) -> MetricGraph:
    return MetricGraph.from_edges({f"e{i}": (("x", "y"), l) for i, l in enumerate(lengths)})


def x_graph(a) -> MetricGraph:
    """Three vertices; a double edge on each side of the middle, one of length ``a``."""
    return MetricGraph.from_edges(
        {
            "a": (("L", "M"), a),
            "l": (("L", "M"), 1),
            "r1": (("M", "R"), 1),
            "r2": (("M", "R"), 1),
        }
    )


def path_graph(n: int = 3) -> MetricGraph:
    return MetricGraph.from_edges({f"p{i}": ((f"v{i}", f"v{i + 1}"), 1) for i in range(n - 1)})
