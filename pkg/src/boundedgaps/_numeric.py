"""Working precision, interval helpers and certified comparisons.

All real-valued quantities in the package are evaluated with :mod:`mpmath`.
Point values use ``mp``; anything whose sign or ordering must be trusted goes
through the ``iv`` interval context, with precision escalation when an
interval is too wide to decide.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction

from mpmath import iv, mp

from .errors import CertificationError

DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64
MAX_ESCALATION_BITS = 1 << 16

_precision = None


def get_precision() -> int:
    """Return the package-wide working precision in bits.

    ``GG_PRECISION_BITS`` in the environment overrides the default until
    :func:`set_precision` is called explicitly.
    """
    if _precision is not None:
        return _precision
    env = os.environ.get("GG_PRECISION_BITS")
    if env:
        bits = int(env)
        if bits < MIN_PRECISION_BITS:
            raise ValueError(f"GG_PRECISION_BITS must be >= {MIN_PRECISION_BITS}")
        return bits
    return DEFAULT_PRECISION_BITS


def set_precision(bits: int | None) -> None:
    global _precision
    if bits is not None and bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be >= {MIN_PRECISION_BITS} bits")
    _precision = bits


@contextmanager
def workprec(bits: int | None = None):
    """Set both the point and the interval context to ``bits`` of precision."""
    bits = get_precision() if bits is None else bits
    old_mp, old_iv = mp.prec, iv.prec
    mp.prec = bits
    iv.prec = bits
    try:
        yield bits
    finally:
        mp.prec = old_mp
        iv.prec = old_iv


def to_interval(x):
    """Enclose an exact or floating value in an ``iv`` interval.

    Fractions, integers and decimal strings are enclosed rigorously.  A binary
    float or ``mpf`` is taken at face value.
    """
    if hasattr(x, "_mpi_") or hasattr(x, "_mpci_"):
        return x
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return iv.mpf(x)
    if isinstance(x, (str, Decimal)):
        x = Fraction(str(x))
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / x.denominator
    if hasattr(x, "_mpc_") or isinstance(x, complex):
        return iv.mpc(x)
    return iv.mpf(x)


def lower(x):
    with mp.workprec(iv.prec):
        return mp.mpf(x.a)


def upper(x):
    with mp.workprec(iv.prec):
        return mp.mpf(x.b)


def midpoint(x):
    with mp.workprec(iv.prec):
        return mp.mpf(x.mid)


def certified_sign(build, bits: int | None = None, max_bits: int = MAX_ESCALATION_BITS) -> int:
    """Return the sign (+1 or -1) of the interval produced by ``build()``.

    ``build`` is re-evaluated at doubling precision until the enclosure
    excludes zero.  A quantity that is exactly zero can never be certified and
    raises :class:`CertificationError` once ``max_bits`` is reached.
    """
    bits = get_precision() if bits is None else bits
    while bits <= max_bits:
        with workprec(bits):
            x = build()
            if x.a > 0:
                return 1
            if x.b < 0:
                return -1
        bits *= 2
    raise CertificationError("sign not decided up to %d bits (value may be zero)" % max_bits)


def certify(build, digits: int = 12, bits: int | None = None, max_bits: int = MAX_ESCALATION_BITS):
    """Evaluate ``build()`` until ``digits`` significant decimal digits are certified.

    Returns the final enclosure.  The enclosure must also exclude zero, so a
    relative width can be measured.
    """
    bits = get_precision() if bits is None else bits
    while bits <= max_bits:
        with workprec(bits):
            x = build()
            if certified_digits(x) >= digits:
                return x
        bits *= 2
    raise CertificationError(f"could not certify {digits} digits up to {max_bits} bits")


def certified_digits(x) -> int:
    """Number of significant decimal digits fixed by the enclosure ``x``."""
    if x.a <= 0 <= x.b:
        return 0
    with mp.workprec(iv.prec):
        lo, hi = mp.mpf(x.a), mp.mpf(x.b)
        mag = min(abs(lo), abs(hi))
        width = hi - lo
        if width == 0:
            return int(iv.prec * math.log10(2))
        return max(0, int(mp.floor(mp.log10(mag / width))))


def format_interval(x, digits: int | None = None) -> str:
    """Decimal string of the midpoint, truncated to the certified digits."""
    cd = certified_digits(x)
    if digits is not None:
        cd = min(cd, digits)
    cd = max(cd, 1)
    with mp.workprec(iv.prec):
        return mp.nstr(midpoint(x), cd)


def as_fraction(x) -> Fraction | None:
    """Exact rational value of ``x`` when it has one without rounding, else None."""
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, (str, Decimal)):
        try:
            return Fraction(str(x))
        except ValueError:
            return None
    return None
