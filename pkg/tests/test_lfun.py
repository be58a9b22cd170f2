import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from limitmult.errors import DomainError, UnsupportedRegimeError
from limitmult.fields import IMAGINARY, REAL, kronecker_chi, list_fundamental_discriminants
from limitmult.lfun import (dirichlet_L, dirichlet_L_truncated, euler_product_L, residue_zeta_F, tail_bound,
                            truncation_point, zeta_F_at_2)

SMALL = list_fundamental_discriminants(-200, -1, IMAGINARY) + list_fundamental_discriminants(2, 200, REAL)


def hurwitz_L(D, s):
    # oracle: L(s, chi) = |D|^-s sum_a chi(a) zeta(s, a/|D|)
    mpmath.mp.dps = 30
    q = abs(D)
    return mpmath.mpf(q) ** (-s) * mpmath.fsum(kronecker_chi(D, a) * mpmath.zeta(s, mpmath.mpf(a) / q)
                                               for a in range(1, q + 1))


def digamma_L1(D):
    # oracle: L(1, chi) = -(1/|D|) sum_a chi(a) psi(a/|D|)
    mpmath.mp.dps = 30
    q = abs(D)
    return -mpmath.fsum(kronecker_chi(D, a) * mpmath.digamma(mpmath.mpf(a) / q) for a in range(1, q + 1)) / q


def test_catalan():
    assert dirichlet_L(-4, 2).contains(float(mpmath.catalan))


def test_l1_quarter_pi():
    assert dirichlet_L(-4, 1).contains(math.pi / 4)


def test_l2_chi5_closed_form():
    # 4 pi^2 / (25 sqrt 5)
    assert dirichlet_L(5, 2).contains(4 * math.pi ** 2 / (25 * math.sqrt(5)))


@pytest.mark.parametrize("D", SMALL[::3])
def test_l2_against_hurwitz(D):
    v = dirichlet_L(D, 2, 1e-10)
    assert abs(v.value - float(hurwitz_L(D, 2))) <= v.abs_error + 1e-15


@pytest.mark.parametrize("D", SMALL[::2])
def test_l1_against_digamma(D):
    v = dirichlet_L(D, 1)
    assert abs(v.value - float(digamma_L1(D))) <= v.abs_error + 1e-14


def test_l3_against_hurwitz():
    for D in (-3, -23, 13):
        v = dirichlet_L(D, 3, 1e-10)
        assert abs(v.value - float(hurwitz_L(D, 3))) <= v.abs_error + 1e-15


def test_regimes():
    with pytest.raises(UnsupportedRegimeError):
        dirichlet_L(-4, 1.2)
    with pytest.raises(DomainError):
        dirichlet_L(-5, 2)


def test_zeta_f_values():
    assert zeta_F_at_2(-4).value == pytest.approx(1.5067030099, abs=1e-9)
    assert zeta_F_at_2(-3).value == pytest.approx(1.2851909556, abs=1e-9)
    assert zeta_F_at_2(5).value == pytest.approx(1.1616711956, abs=1e-9)


def test_residue():
    assert residue_zeta_F(5).value == pytest.approx(0.4304089410, abs=1e-9)
    assert residue_zeta_F(-8).value == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-12)


@given(st.sampled_from(SMALL), st.sampled_from([1.5, 2.0, 2.5, 3.0]), st.sampled_from([1e-4, 1e-7, 1e-10]))
def test_truncation_point_meets_tolerance(D, s, tol):
    N = truncation_point(D, s, tol)
    assert tail_bound(D, s, N) <= tol / 2


@given(st.sampled_from(SMALL), st.integers(10, 3000))
def test_truncated_series_encloses_value(D, N):
    v = dirichlet_L_truncated(D, 2, N)
    assert abs(v.value - float(hurwitz_L(D, 2))) <= v.abs_error + 1e-15


def test_euler_product_consistent():
    for D in (-4, -23, 5, 12):
        val, rel = euler_product_L(D, 2, 10 ** 4)
        ref = float(hurwitz_L(D, 2))
        assert abs(val - ref) <= rel * ref + 1e-15
