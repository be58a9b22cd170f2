from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from limitmult.certified import CertifiedReal, cpi, czeta_even

finite = st.floats(-1e6, 1e6, allow_nan=False)
positive = st.floats(1e-6, 1e6, allow_nan=False)
errs = st.floats(0, 1e-3)


def test_exact_and_coerce():
    assert CertifiedReal.exact(3).abs_error == 0
    assert CertifiedReal.exact(Fraction(1, 3)).abs_error > 0
    assert CertifiedReal.coerce(2.5) == CertifiedReal(2.5, 0.0)


def test_negative_error_rejected():
    with pytest.raises(ValueError):
        CertifiedReal(1.0, -1.0)


def test_constants_enclose_truth():
    mpmath.mp.dps = 40
    assert cpi().contains(float(mpmath.pi))
    assert czeta_even(2).contains(float(mpmath.zeta(2)))
    assert czeta_even(4).contains(float(mpmath.zeta(4)))


@given(finite, errs, finite, errs)
def test_arithmetic_encloses_exact(a, ea, b, eb):
    x, y = CertifiedReal(a, ea), CertifiedReal(b, eb)
    fa, fb = Fraction(a), Fraction(b)
    for r, exact in ((x + y, fa + fb), (x - y, fa - fb), (x * y, fa * fb)):
        assert abs(Fraction(r.value) - exact) <= Fraction(r.abs_error)


@given(positive, positive)
def test_division_and_functions(a, b):
    x, y = CertifiedReal(a), CertifiedReal(b)
    mpmath.mp.dps = 40
    assert (x / y).contains(float(mpmath.mpf(a) / mpmath.mpf(b)))
    assert x.sqrt().contains(float(mpmath.sqrt(mpmath.mpf(a))))
    assert x.log().contains(float(mpmath.log(mpmath.mpf(a))))
    assert (x ** Fraction(3, 2)).contains(float(mpmath.mpf(a) ** 1.5))


def test_division_by_interval_around_zero():
    with pytest.raises(ZeroDivisionError):
        CertifiedReal(1.0) / CertifiedReal(0.0, 1e-3)


def test_le_is_lenient():
    assert CertifiedReal(1.0, 0.1).le(CertifiedReal(0.95))
    assert not CertifiedReal(1.0, 0.01).le(0.9)
