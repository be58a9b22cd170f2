import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from limitmult.errors import DomainError
from limitmult.fields import IMAGINARY, REAL, QuadInteger, list_fundamental_discriminants
from limitmult.lattices import (QuadReal, check_point_count_bounds, count_ball, first_minimum,
                                min_nonrational_norm, min_nonrational_norm_sq, minkowski_embed, prime_ideal, principal_ideal, r_norm,
                                ring_of_integers, sq_norm_exact)


def float_sq_norm(D, a, b, scale):
    # oracle: direct Minkowski embedding in floating point
    if D > 0:
        r = math.sqrt(D)
        s1 = a + b * (D + r) / 2
        s2 = a + b * (D - r) / 2
        return float(scale[0]) ** 2 * s1 * s1 + float(scale[1]) ** 2 * s2 * s2
    z = complex(a + b * D / 2, b * math.sqrt(-D) / 2)
    return 2 * float(scale[0]) ** 2 * abs(z) ** 2


def brute_count(L, R, box=120):
    # oracle: scan a box of coefficient pairs in the lattice basis; margin flags ties
    b1, b2 = L.basis
    x, y = np.meshgrid(np.arange(-box, box + 1), np.arange(-box, box + 1))
    a = b1.a * x + b2.a * y
    b = b1.b * x + b2.b * y
    D = L.D
    if D > 0:
        r = math.sqrt(D)
        s1 = a + b * (D + r) / 2
        s2 = a + b * (D - r) / 2
        v = float(L.scale[0]) ** 2 * s1 * s1 + float(L.scale[1]) ** 2 * s2 * s2
    else:
        re = a + b * D / 2
        im = b * math.sqrt(-D) / 2
        v = 2 * float(L.scale[0]) ** 2 * (re * re + im * im)
    inside = v <= float(R) ** 2 * (1 + 1e-9)
    assert not inside[0].any() and not inside[-1].any() and not inside[:, 0].any() and not inside[:, -1].any()
    return int(inside.sum()) - 1


def test_embedding_norms():
    x = QuadInteger(1, 1, -4)
    assert r_norm(minkowski_embed(-4, x)) == pytest.approx(math.sqrt(float_sq_norm(-4, 1, 1, (1,))))
    assert sq_norm_exact(QuadInteger(1, 0, 5)) == 2


def test_quadreal_exact_sign():
    # the sign of p + q sqrt(D) is decided exactly
    assert QuadReal(Fraction(3), Fraction(2), 2) > 0  # 3 + 2 sqrt 2
    assert QuadReal(Fraction(-3), Fraction(2), 2) < 0  # -3 + 2 sqrt 2 = -0.17
    assert QuadReal(Fraction(-2), Fraction(1), 4) == 0


def test_gaussian_counts():
    L = ring_of_integers(-4)
    assert first_minimum(L) == 2
    assert count_ball(L, 2) == 8
    assert count_ball(L, 1) == 0


def test_scaled_lattice_examples():
    L = ring_of_integers(-4, (3,))
    assert L.idele_norm == 9
    assert count_ball(L, 2) == 0
    assert check_point_count_bounds(L, 2).passed
    assert first_minimum(ring_of_integers(5)) == 2
    assert first_minimum(ring_of_integers(5, (Fraction(1, 10),) * 2)) == pytest.approx(0.02)


def test_homogeneity():
    for t in (Fraction(1, 3), 2, Fraction(5, 2)):
        assert first_minimum(ring_of_integers(-4, (t,))) == pytest.approx(2 * float(t) ** 2)


def test_prime_ideal():
    L = prime_ideal(-23, 2)
    assert L.ideal_norm == 2
    assert check_point_count_bounds(L, 3).passed
    with pytest.raises(DomainError):
        prime_ideal(-4, 3)


def test_invalid_lattices():
    with pytest.raises(DomainError):
        ring_of_integers(-4, (1, 1))
    with pytest.raises(DomainError):
        ring_of_integers(-4, (0,))


@pytest.mark.parametrize("D", [-3, -4, -7, -23, 5, 8, 12, 13])
@pytest.mark.parametrize("R", [1, 2, Fraction(5, 2), 4])
def test_count_against_brute(D, R):
    L = ring_of_integers(D)
    assert count_ball(L, R) == brute_count(L, R)


@given(st.sampled_from([-3, -4, -7, -8, -15, -23, 5, 8, 12, 13, 17]),
       st.integers(-6, 6), st.integers(-6, 6).filter(lambda b: b != 0),
       st.fractions(Fraction(1, 4), 3))
def test_principal_ideal_norm_and_count(D, a, b, t):
    x = QuadInteger(a, b, D)
    L = principal_ideal(x, (t,) * (2 if D > 0 else 1))
    assert L.ideal_norm == abs(x.norm)
    assert count_ball(L, 3) == brute_count(L, 3)


def test_first_minimum_sharp_law():
    # lambda_1 >= 2 |a| always holds (AM-GM)
    for D in (-3, -4, -7, 5, 8, 13):
        for t in (Fraction(1, 10), Fraction(1, 2), 1, 3):
            L = ring_of_integers(D, (t,) * (2 if D > 0 else 1))
            assert Fraction(first_minimum(L)) >= 2 * L.idele_norm * (1 - Fraction(1, 10 ** 12))


def test_first_minimum_law_counterexample():
    # the lattice O_F scaled by 1/10 has lambda_1 = 2/100 < |a|^(1/2) = 1/10
    L = ring_of_integers(-4, (Fraction(1, 10),))
    rep = check_point_count_bounds(L, 1)
    assert dict(rep.conditions)["first_minimum"] is False
    assert rep.notes["sharp_first_minimum"]


def test_min_nonrational_norm():
    assert min_nonrational_norm(5) == pytest.approx(math.sqrt(3))
    assert min_nonrational_norm(-4) == pytest.approx(math.sqrt(2))
    assert min_nonrational_norm(-163) == pytest.approx(math.sqrt(82))
    assert min_nonrational_norm(-163, 5) is None


def test_min_nonrational_brute():
    for D in (-3, -4, -7, -8, -11, -15, -19, 5, 8, 12, 13, 17, 21):
        best = min(float_sq_norm(D, a, b, (1, 1)) for a in range(-40, 41) for b in range(-4, 5) if b != 0)
        assert min_nonrational_norm(D) ** 2 == pytest.approx(best, rel=1e-12)


def test_min_nonrational_growth():
    # ||x||^2 >= b^2 |D| / 2 for x = a + b w, so the ratio never drops below 2^(-1/2)
    for D in list_fundamental_discriminants(-20000, -1, IMAGINARY) + list_fundamental_discriminants(2, 20000, REAL):
        assert min_nonrational_norm_sq(D) >= Fraction(abs(D), 2)
        assert min_nonrational_norm_sq(D) <= Fraction(abs(D) + 1, 2)
