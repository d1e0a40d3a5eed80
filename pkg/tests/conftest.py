import pytest
from mpmath import iv, mp

from boundedgaps import _numeric


@pytest.fixture(autouse=True)
def _restore_precision():
    old = mp.prec, iv.prec
    yield
    mp.prec, iv.prec = old
    _numeric.set_precision(None)
