"""Brute-force reference computations used to check the package.

Each function here solves its problem by direct search, sharing no code
with the package under test.
"""

from __future__ import annotations

import itertools
from math import gcd, isqrt

import numpy as np


def pell_scan(D: int, u_max: int = 2 * 10**5):
    """Smallest ``(t, u)`` with ``t^2 - D u^2 = 4``, ``u >= 1``, by scanning ``u``.

    Returns None when no solution has ``u <= u_max``.
    """
    for u in range(1, u_max + 1):
        t2 = 4 + D * u * u
        t = isqrt(t2)
        if t * t == t2:
            return t, u
    return None


def squarefree_part(n: int) -> int:
    out, p = 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            out *= p
        p += 1
    return out * n


def form_classes_bfs(D: int, primitive: bool = True, box: int | None = None) -> int:
    """Count SL2(Z) classes of forms of discriminant ``D`` by graph search.

    All forms with coefficients bounded by ``box`` are linked by the moves
    ``x -> x + y`` and ``(x, y) -> (-y, x)``; connected components are
    counted.  Each class meets the box in a reduced form, and cycles of
    reduced forms are connected by these moves inside the box.
    """
    box = box or 2 * D
    forms = set()
    for A in range(-box, box + 1):
        if A == 0:
            continue
        for B in range(-box, box + 1):
            if (B * B - D) % (4 * A):
                continue
            C = (B * B - D) // (4 * A)
            if abs(C) > box:
                continue
            if primitive and gcd(gcd(A, B), C) != 1:
                continue
            forms.add((A, B, C))
    parent = {f: f for f in forms}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for A, B, C in forms:
        for g in ((C, -B, A), (A, B + 2 * A, A + B + C), (A, B - 2 * A, A - B + C)):
            if g in parent:
                parent[find(g)] = find((A, B, C))
    return len({find(f) for f in forms})


def hyperbolic_classes_of_trace(a: int) -> int:
    """Conjugacy classes in SL2(Z) of trace ``a`` via all forms of disc ``a^2 - 4``.

    ``[[p, q], [r, s]]`` corresponds to the form ``(r, s - p, -q)``; non-primitive
    forms count too.
    """
    D = a * a - 4
    return form_classes_bfs(D, primitive=False)


def nb_closed_walks(adj_src, adj_tgt, n: int):
    """All non-backtracking closed walks of length ``n`` as tuples of oriented edges.

    Oriented edge ``k`` goes ``adj_src[k] -> adj_tgt[k]``; ``k ^ 1`` is its reverse.
    """
    m = len(adj_src)
    out = []
    for w in itertools.product(range(m), repeat=n):
        ok = True
        for i in range(n):
            x, y = w[i], w[(i + 1) % n]
            if adj_tgt[x] != adj_src[y] or y == (x ^ 1):
                ok = False
                break
        if ok:
            out.append(w)
    return out


def cyclic_classes(walks):
    """Group walks by rotation; returns ``{least rotation: primitive period}``."""
    out = {}
    for w in walks:
        n = len(w)
        rot = min(w[i:] + w[:i] for i in range(n))
        p = next(d for d in range(1, n + 1) if n % d == 0 and rot[:d] * (n // d) == rot)
        out[rot] = p
    return out


def ihara_bass(adjacency: np.ndarray, m_edges: int, u: complex) -> complex:
    """``(1 - u^2)^(m - n) det(I - uA + u^2 (D - I))`` for unit edge lengths."""
    n = adjacency.shape[0]
    deg = np.diag(adjacency.sum(axis=1))
    M = np.eye(n) - u * adjacency + u * u * (deg - np.eye(n))
    return (1 - u * u) ** (m_edges - n) * np.linalg.det(M)
