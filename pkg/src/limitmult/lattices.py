"""Ideal lattices of quadratic fields under the Minkowski embedding.

Squared norms of lattice points are computed exactly in Q(sqrt D); the only
floating point work is choosing a box that provably contains the points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .certified import CertifiedReal
from .errors import DomainError
from .fields import QuadInteger, Signature, kronecker_chi, signature_of
from .reports import make_report

Rational = Union[int, Fraction]


# ---------------------------------------------------------------- Q(sqrt D)

@dataclass(frozen=True)
class QuadReal:
    """p + q sqrt(D) with rational p, q and D > 0 (q = 0 when D < 0)."""

    p: Fraction
    q: Fraction = Fraction(0)
    D: int = 1

    @classmethod
    def of(cls, x: Rational) -> "QuadReal":
        return cls(Fraction(x))

    def sign(self) -> int:
        p, q = self.p, self.q
        if q == 0 or self.D <= 0:
            return (p > 0) - (p < 0)
        if p >= 0 and q >= 0:
            return 1 if (p or q) else 0
        if p <= 0 and q <= 0:
            return -1
        d = p * p - q * q * self.D
        s = (d > 0) - (d < 0)
        return s if p > 0 else -s

    def _lift(self, o) -> "QuadReal":
        if isinstance(o, QuadReal):
            return o
        return QuadReal(Fraction(o), Fraction(0), self.D)

    def _d(self, o: "QuadReal") -> int:
        if self.q == 0:
            return o.D
        return self.D

    def __add__(self, o):
        o = self._lift(o)
        return QuadReal(self.p + o.p, self.q + o.q, self._d(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadReal(-self.p, -self.q, self.D)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        D = self._d(o)
        return QuadReal(self.p * o.p + self.q * o.q * D, self.p * o.q + self.q * o.p, D)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, QuadReal) and o.q != 0:
            D = o.D
            n = o.p * o.p - o.q * o.q * D
            conj = QuadReal(o.p, -o.q, D)
            num = self * conj
            return QuadReal(num.p / n, num.q / n, D)
        o = Fraction(o.p if isinstance(o, QuadReal) else o)
        return QuadReal(self.p / o, self.q / o, self.D)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __eq__(self, o):
        return (self - self._lift(o)).sign() == 0

    def __lt__(self, o):
        return (self - self._lift(o)).sign() < 0

    def __le__(self, o):
        return (self - self._lift(o)).sign() <= 0

    def __gt__(self, o):
        return (self - self._lift(o)).sign() > 0

    def __ge__(self, o):
        return (self - self._lift(o)).sign() >= 0

    def __hash__(self):
        return hash((self.p, self.q if self.D > 0 else 0))

    def __float__(self) -> float:
        if self.q == 0:
            return float(self.p)
        return float(self.p) + float(self.q) * math.sqrt(self.D)

    def floor(self) -> int:
        n = math.floor(float(self))
        while self < n:
            n -= 1
        while self >= n + 1:
            n += 1
        return n

    def __repr__(self) -> str:
        if self.q == 0:
            return f"QuadReal({self.p})"
        return f"QuadReal({self.p} + {self.q}*sqrt({self.D}))"


# ---------------------------------------------------------------- embedding

@dataclass(frozen=True)
class MinkowskiVector:
    coords: tuple
    signature: Signature

    def __post_init__(self):
        if len(self.coords) != self.signature.r1 + self.signature.r2:
            raise DomainError("coordinate count does not match the signature")


def minkowski_embed(D: int, x: QuadInteger) -> MinkowskiVector:
    if x.D != D:
        raise DomainError("element does not belong to this field")
    return MinkowskiVector(x.embeddings(), signature_of(D))


def r_norm(v: MinkowskiVector) -> float:
    r1 = v.signature.r1
    s = sum(float(c) ** 2 for c in v.coords[:r1])
    s += 2 * sum(abs(c) ** 2 for c in v.coords[r1:])
    return math.sqrt(s)


def sq_norm_exact(x: QuadInteger, scale: Sequence[Rational] | None = None) -> QuadReal:
    """||scale * x||_r^2 as an exact element of Q(sqrt D)."""
    D = x.D
    u, v = x.halves()
    if D > 0:
        s1, s2 = (Fraction(1), Fraction(1)) if scale is None else (Fraction(scale[0]), Fraction(scale[1]))
        a, b = s1 * s1, s2 * s2
        return QuadReal((a + b) * (u * u + v * v * D), (a - b) * 2 * u * v, D)
    s = Fraction(1) if scale is None else Fraction(scale[0])
    return QuadReal(2 * s * s * (u * u - v * v * D), Fraction(0), D)


# ---------------------------------------------------------------- lattices

@dataclass(frozen=True)
class IdealLattice:
    """Lambda_a = a_inf * Lambda' with Lambda' the integral ideal spanned by basis."""

    D: int
    basis: tuple[QuadInteger, QuadInteger]
    scale: tuple[Fraction, ...]

    def __post_init__(self):
        sig = signature_of(self.D)
        if len(self.scale) != sig.r1 + sig.r2:
            raise DomainError("one scale per archimedean place is required")
        if any(Fraction(s) <= 0 for s in self.scale):
            raise DomainError("scales must be positive")
        if self.ideal_norm == 0:
            raise DomainError("basis is degenerate")

    @property
    def ideal_norm(self) -> int:
        """[O_F : Lambda'] from the determinant in the (1, omega) basis."""
        b1, b2 = self.basis
        return abs(b1.a * b2.b - b1.b * b2.a)

    @property
    def arch_norm(self) -> Fraction:
        """|a_inf|_inf: product of real scales, squares of complex ones."""
        if self.D > 0:
            return Fraction(self.scale[0]) * Fraction(self.scale[1])
        return Fraction(self.scale[0]) ** 2

    @property
    def idele_norm(self) -> Fraction:
        return self.arch_norm * self.ideal_norm

    def scaled(self, t: Rational) -> "IdealLattice":
        return IdealLattice(self.D, self.basis, tuple(Fraction(s) * t for s in self.scale))

    def point(self, x: int, y: int) -> QuadInteger:
        b1, b2 = self.basis
        return b1 * x + b2 * y

    def sq_norm(self, x: QuadInteger) -> QuadReal:
        return sq_norm_exact(x, self.scale)

    def gram(self) -> tuple[QuadReal, QuadReal, QuadReal]:
        b1, b2 = self.basis
        g11 = self.sq_norm(b1)
        g22 = self.sq_norm(b2)
        g12 = (self.sq_norm(b1 + b2) - g11 - g22) / 2
        return g11, g12, g22


def _one_scale(D: int, t: Rational = 1) -> tuple[Fraction, ...]:
    return (Fraction(t),) * (2 if D > 0 else 1)


def ring_of_integers(D: int, scale: Sequence[Rational] | None = None) -> IdealLattice:
    basis = (QuadInteger(1, 0, D), QuadInteger(0, 1, D))
    return IdealLattice(D, basis, tuple(Fraction(s) for s in scale) if scale else _one_scale(D))


def principal_ideal(x: QuadInteger, scale: Sequence[Rational] | None = None) -> IdealLattice:
    D = x.D
    basis = (x, x * QuadInteger(0, 1, D))
    return IdealLattice(D, basis, tuple(Fraction(s) for s in scale) if scale else _one_scale(D))


def prime_ideal(D: int, p: int, scale: Sequence[Rational] | None = None) -> IdealLattice:
    """The prime (p, omega - r) above a split or ramified prime p."""
    if kronecker_chi(D, p) == -1:
        raise DomainError(f"{p} is inert in Q(sqrt {D})")
    n0 = (D * D - D) // 4
    for r in range(p):
        if (r * r - D * r + n0) % p == 0:
            break
    basis = (QuadInteger(p, 0, D), QuadInteger(-r, 1, D))
    return IdealLattice(D, basis, tuple(Fraction(s) for s in scale) if scale else _one_scale(D))


def _reduce(L: IdealLattice) -> IdealLattice:
    """Lagrange reduction; floats only steer the unimodular steps."""
    b1, b2 = L.basis
    for _ in range(200):
        n1, n2 = float(L.sq_norm(b1)), float(L.sq_norm(b2))
        if n2 < n1:
            b1, b2, n1, n2 = b2, b1, n2, n1
        ip = (float(L.sq_norm(b1 + b2)) - n1 - n2) / 2
        mu = round(ip / n1)
        if mu == 0:
            break
        b2 = b2 - b1 * mu
    return IdealLattice(L.D, (b1, b2), L.scale)


def enumerate_points(L: IdealLattice, bound: QuadReal | Rational,
                     include_zero: bool = False) -> Iterator[tuple[QuadInteger, QuadReal]]:
    """All lattice points X with ||X||^2 <= bound, exact membership."""
    if not isinstance(bound, QuadReal):
        bound = QuadReal.of(bound)
    if bound < 0:
        return
    R = _reduce(L)
    g11, g12, g22 = (float(g) for g in R.gram())
    B = float(bound)
    det = g11 * g22 - g12 * g12
    slack = 1e-9 * (1 + abs(B))
    ymax = math.floor(math.sqrt(max(B + slack, 0) * g11 / det) + 1e-9) + 1
    for y in range(-ymax, ymax + 1):
        c = -g12 * y / g11
        rem = (B + slack - y * y * det / g11) / g11
        if rem < 0:
            continue
        w = math.sqrt(rem)
        for x in range(math.floor(c - w) - 1, math.ceil(c + w) + 2):
            if x == 0 and y == 0 and not include_zero:
                continue
            pt = R.point(x, y)
            n = R.sq_norm(pt)
            if n <= bound:
                yield pt, n


def first_minimum_exact(L: IdealLattice) -> QuadReal:
    R = _reduce(L)
    g11, _, g22 = R.gram()
    start = g11 if g11 <= g22 else g22
    return min(n for _, n in enumerate_points(R, start))


def first_minimum(L: IdealLattice) -> float:
    """lambda_1: minimum of ||X||_r^2 over nonzero lattice points."""
    return float(first_minimum_exact(L))


def _radius_sq(R: Rational | float) -> Fraction:
    if R <= 0:
        raise DomainError("radius must be positive")
    return Fraction(R) ** 2


def count_ball(L: IdealLattice, R: Rational | float) -> int:
    """Number of nonzero X in the lattice with ||X||_r <= R."""
    return sum(1 for _ in enumerate_points(L, _radius_sq(R)))


def check_point_count_bounds(L: IdealLattice, R: Rational | float):
    """Lattice-point laws for one lattice and radius.

    (i)   lambda_1 >= |a|^(1/d)
    (ii)  no points when |a| > R^(2d)
    (iii) count <= (floor(2R^2/lambda_1) + 1)^d when lambda_1 <= R^2,
          and count <= (2R)^(2d) / |a|
    """
    d = 2
    R2 = _radius_sq(R)
    lam = first_minimum_exact(L)
    a = L.idele_norm
    count = count_ball(L, R)
    lemma_i = lam * lam >= a
    empty_forced = a > R2 ** d
    bounds = [Fraction(4 * R2) ** d / a]
    if lam <= R2:
        bounds.append(Fraction(((2 * R2) / lam).floor() + 1) ** d)
    bound = Fraction(0) if empty_forced else min(bounds)
    conditions = (
        ("first_minimum", bool(lemma_i)),
        ("emptiness", (not empty_forced) or count == 0),
    )
    notes = {"lambda1": float(lam), "idele_norm": float(a), "count": count,
             "sharp_first_minimum": bool(lam >= 2 * a)}
    return make_report("lattice_points", CertifiedReal.exact(count),
                       CertifiedReal.exact(bound), L.D, notes=notes, conditions=conditions)


def min_nonrational_norm_sq(D: int) -> Fraction:
    """Exact min of ||x||_r^2 over x in O_F minus Z.

    For x = a + b w, ||x||^2 = (t^2 + b^2 |D|) / 2 with t = 2a + bD in both
    signatures, so the minimum sits at |b| = 1 with t of the parity of D.
    """
    return Fraction(abs(D) + (D % 2), 2)


def min_nonrational_norm(D: int, R: float | None = None) -> float | None:
    """min ||x||_r over x in O_F minus Z, or None when it exceeds R."""
    m = min_nonrational_norm_sq(D)
    if R is not None and m > _radius_sq(R):
        return None
    return math.sqrt(float(m))
