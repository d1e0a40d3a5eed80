"""Integer factorisation helpers.

Small arguments are served from a smallest-prime-factor table that grows on
demand; anything past ``SIEVE_CAP`` goes to :func:`sympy.factorint`.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

SIEVE_CAP = 1 << 24

_spf: list[int] = [0, 1]


def _grow(limit: int) -> None:
    global _spf
    size = max(limit + 1, 2 * len(_spf), 1 << 16)
    spf = np.zeros(size, dtype=np.int64)
    for p in range(2, int(size**0.5) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    _spf = spf.tolist()


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of a positive integer as ``{prime: exponent}``."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    if n > SIEVE_CAP:
        from sympy import factorint

        return {int(p): int(e) for p, e in factorint(n).items()}
    if n >= len(_spf):
        _grow(n)
    out: Counter[int] = Counter()
    while n > 1:
        p = _spf[n]
        n //= p
        out[p] += 1
    return dict(out)


def divisors(n: int) -> list[int]:
    """All positive divisors of ``n`` in ascending order."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    divs.sort()
    return divs


def merge(*factorizations: dict[int, int]) -> dict[int, int]:
    out: Counter[int] = Counter()
    for f in factorizations:
        out.update(f)
    return dict(out)
