"""The finite coefficient set Sigma_0 and per-field classification.

Algebraic integers are represented either as Python ints (rational) or as
QuadInteger elements of their home quadratic field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .certified import CertifiedReal
from .errors import DomainError, GuardError, NotInFieldError
from .fields import IMAGINARY, QuadInteger, Signature, fundamental_unit_exact, list_fundamental_discriminants
from .lattices import enumerate_points, min_nonrational_norm_sq, ring_of_integers, sq_norm_exact
from .reports import make_report
from .volumes import GroupKind

AlgInt = Union[int, QuadInteger]

REG_ELL = "reg.ell"
REG_SPLIT = "reg.split"
UNIP = "unip"

MAX_ELEMENTS = 2_000_000


def home_disc(x: AlgInt) -> int:
    """Discriminant of the smallest field containing x; 1 for rational integers."""
    if isinstance(x, int):
        return 1
    return 1 if x.b == 0 else x.D


def normalize(x: AlgInt) -> AlgInt:
    if isinstance(x, QuadInteger) and x.b == 0:
        return x.a
    return x


def _key(x: AlgInt) -> tuple:
    x = normalize(x)
    if isinstance(x, int):
        return (1, x, 0)
    return (abs(x.D), x.D, x.a, x.b)


def _lift(x: AlgInt, D: int) -> QuadInteger:
    if isinstance(x, int):
        return QuadInteger(x, 0, D)
    if x.b == 0:
        return QuadInteger(x.a, 0, D)
    if x.D != D:
        raise NotInFieldError(f"{x} does not lie in Q(sqrt {D})")
    return x


def alg_to_json(x: AlgInt):
    x = normalize(x)
    if isinstance(x, int):
        return x
    return {"D": x.D, "a": x.a, "b": x.b}


def threshold_disc(radius: float) -> int:
    """Largest |D_E| that can host a non-rational integer of norm <= radius: 2 r^2 + 1."""
    return int(math.floor(2 * radius * radius)) + 1


def _sig_discs(D0: int, sig: Signature) -> list[int]:
    if sig.d != 2:
        raise DomainError("only quadratic fields are enumerated")
    if sig == IMAGINARY:
        return list_fundamental_discriminants(-D0, -1, sig)
    return list_fundamental_discriminants(2, D0, sig)


def points_in_ball(D: int, center: int, radius: float | Fraction) -> list[AlgInt]:
    """x in O_F with ||x - center||_r <= radius, rational ones as ints."""
    L = ring_of_integers(D)
    r2 = Fraction(radius) ** 2
    out = [normalize(y + center) for y, _ in enumerate_points(L, r2, include_zero=True)]
    return sorted(out, key=_key)


def enum_integers_in_ball(D0: int, R: float, sig: Signature) -> list[AlgInt]:
    """Z together with every O_E, |D_E| <= D0, intersected with the ball of radius R."""
    if D0 > 10 ** 6:
        raise GuardError("D0 too large")
    r2 = Fraction(R) ** 2
    out: list[AlgInt] = []
    # rational integers n have ||n||^2 = 2 n^2
    n = 0
    while 2 * n * n <= r2:
        out.extend({n, -n})
        n += 1
    for D in _sig_discs(D0, sig):
        for x in points_in_ball(D, 0, R):
            if not isinstance(x, int):
                out.append(x)
        if len(out) > MAX_ELEMENTS:
            raise GuardError("too many elements in the ball")
    return sorted(out, key=_key)


# ---------------------------------------------------------------- units

def units_in_ball(D: int, center: int, radius: float) -> list[AlgInt]:
    """Units u of O_F with ||u - center||_r <= radius."""
    r2 = Fraction(radius) ** 2
    out: list[AlgInt] = []
    if D < 0:
        for u in points_in_ball(D, 0, math.sqrt(2) + 1e-9):
            uq = _lift(u, D)
            if uq.norm == 1 and sq_norm_exact(uq - center) <= r2:
                out.append(normalize(u))
        return sorted(out, key=_key)
    x, y, _ = fundamental_unit_exact(D)
    eps = QuadInteger.from_halves(Fraction(x, 2), Fraction(y, 2), D)
    outer = math.sqrt(float(r2)) + math.sqrt(2) * abs(center)
    eps_f = (x + y * math.sqrt(D)) / 2
    kmax = int(math.log(outer + 2) / math.log(eps_f)) + 2
    inv = eps.conj() if eps.norm == 1 else -eps.conj()
    powers = [QuadInteger(1, 0, D)]
    p, q = QuadInteger(1, 0, D), QuadInteger(1, 0, D)
    for _ in range(kmax):
        p, q = p * eps, q * inv
        powers.extend([p, q])
    for u in powers:
        for s in (u, -u):
            if sq_norm_exact(s - center) <= r2:
                out.append(normalize(s))
    return sorted(set(out), key=_key)


# ---------------------------------------------------------------- squares

def _qsqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def sqrt_in_OF(delta: QuadInteger) -> QuadInteger | None:
    """s in O_F with s^2 = delta, or None. Exact norm/trace criterion."""
    D = delta.D
    x, y = delta.halves()
    cands: list[tuple[Fraction, Fraction]] = []
    if y == 0:
        r = _qsqrt(x)
        if r is not None:
            cands.append((r, Fraction(0)))
        r = _qsqrt(x / D)
        if r is not None:
            cands.append((Fraction(0), r))
    else:
        r = _qsqrt(x * x - y * y * D)
        if r is not None:
            for p2 in ((x + r) / 2, (x - r) / 2):
                p = _qsqrt(p2)
                if p:
                    cands.append((p, y / (2 * p)))
    for p, q in cands:
        s = QuadInteger.from_halves(p, q, D)
        if s is not None and s * s == delta:
            return s
    return None


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class PolynomialClass:
    """X^2 + aX + b with algebraic integer coefficients."""

    a: AlgInt
    b: AlgInt
    kind: str | None = field(default=None, compare=False)

    @property
    def home_disc(self) -> int:
        ds = {home_disc(self.a), home_disc(self.b)} - {1}
        if len(ds) > 1:
            raise DomainError("coefficients from different quadratic fields")
        return ds.pop() if ds else 1

    def lifted(self, D: int) -> tuple[QuadInteger, QuadInteger]:
        return _lift(self.a, D), _lift(self.b, D)

    def disc(self, D: int) -> QuadInteger:
        a, b = self.lifted(D)
        return a * a - b * 4

    def with_kind(self, kind: str) -> "PolynomialClass":
        return PolynomialClass(self.a, self.b, kind)

    def sort_key(self) -> tuple:
        return (abs(self.home_disc), _key(self.a), _key(self.b))

    def to_json(self) -> dict:
        out = {"a": alg_to_json(self.a), "b": alg_to_json(self.b), "home_disc": self.home_disc}
        if self.kind:
            out["kind"] = self.kind
        return out

    def __str__(self) -> str:
        return f"X^2 + ({normalize(self.a)})X + ({normalize(self.b)})"


def classify(D: int, p: PolynomialClass) -> str:
    """reg.ell, reg.split or unip for p viewed over Q(sqrt D)."""
    hd = p.home_disc
    if hd not in (1, D):
        raise NotInFieldError(f"{p} has coefficients in Q(sqrt {hd}), not in Q(sqrt {D})")
    delta = p.disc(D)
    if delta.a == 0 and delta.b == 0:
        return UNIP
    return REG_SPLIT if sqrt_in_OF(delta) is not None else REG_ELL


def _trace_radius(R: float) -> float:
    return 2 * R


def _det_radius(R: float) -> float:
    return 2 * R * R + 2 * R


def coefficient_radius(R: float) -> float:
    """Uniform radius N = 4(1+R)^2 containing both coefficient balls."""
    return 4 * (1 + R) ** 2


def _polys_over(D: int, traces: list[AlgInt], dets: list[AlgInt], rational_pairs: bool) -> list[PolynomialClass]:
    out = []
    for t in traces:
        for n in dets:
            if not rational_pairs and isinstance(t, int) and isinstance(n, int):
                continue
            out.append(PolynomialClass(normalize(-t) if isinstance(t, int) else -t, n))
    return out


def sigma0_for_field(D: int, R: float, g: GroupKind) -> list[PolynomialClass]:
    """Sigma_0 intersected with O_F[X], classified over F.

    The trace of an element within R of the identity lies within 2R of 2 and
    its determinant within 2R^2 + 2R of 1; the determinant of an element of
    K_f is a unit.
    """
    traces = points_in_ball(D, 2, _trace_radius(R))
    dets = [1] if g is GroupKind.SL2 else units_in_ball(D, 1, _det_radius(R))
    polys = _polys_over(D, traces, dets, True)
    out = [p.with_kind(classify(D, p)) for p in polys]
    return sorted(out, key=PolynomialClass.sort_key)


def sigma0_set(R: float, g: GroupKind, sig: Signature = IMAGINARY) -> list[PolynomialClass]:
    """All monic quadratics with coefficients in Lambda within the coefficient balls.

    Only fields up to the threshold discriminant can contribute non-rational
    coefficients, so the set is finite and independent of any base field.
    """
    if R <= 0:
        raise DomainError("R must be positive")
    rt, rn = _trace_radius(R), _det_radius(R)
    two = 2 * math.sqrt(2)
    D0t = threshold_disc(rt + two)
    D0n = threshold_disc(rn + math.sqrt(2)) if g is GroupKind.GL2 else 0
    if max(D0t, D0n) > 200_000:
        raise GuardError("radius too large for a global enumeration")
    rat_t = points_in_ball(-4, 2, rt)
    rat_t = [x for x in rat_t if isinstance(x, int)]
    rat_n = [1] if g is GroupKind.SL2 else [u for u in (1, -1) if 2 * (u - 1) ** 2 <= rn * rn]
    out = _polys_over(0, rat_t, rat_n, True)
    for D in _sig_discs(max(D0t, D0n), sig):
        tr = [x for x in points_in_ball(D, 2, rt)] if abs(D) <= D0t else rat_t
        if g is GroupKind.SL2:
            dn = [1]
        else:
            dn = units_in_ball(D, 1, rn)
        if not any(not isinstance(x, int) for x in tr + dn):
            continue
        out.extend(_polys_over(D, tr, dn, False))
        if len(out) > MAX_ELEMENTS:
            raise GuardError("Sigma_0 too large")
    return sorted(set(out), key=PolynomialClass.sort_key)


def sigma0_to_json(polys: list[PolynomialClass], R: float, g: GroupKind, sig: Signature) -> str:
    doc = {"R": R, "group": str(g), "signature": [sig.r1, sig.r2],
           "count": len(polys), "polynomials": [p.to_json() for p in polys]}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def verify_inclusion(D: int, R: float, D0: int | None = None):
    """Every x in O_F with ||x|| <= R is rational or has |D_F| <= D0."""
    if D0 is None:
        D0 = threshold_disc(R)
    m = min_nonrational_norm_sq(D)
    has_nonrational = m <= Fraction(R) ** 2
    needed = abs(D) if has_nonrational else 0
    threshold_ok = (not has_nonrational) or abs(D) <= 2 * Fraction(R) ** 2 + 1
    notes = {"min_nonrational_norm": math.sqrt(float(m)), "needed_D0": needed, "D0": D0}
    return make_report("sigma_inclusion", CertifiedReal.exact(needed), CertifiedReal.exact(D0), D,
                       notes=notes, conditions=(("threshold_law", bool(threshold_ok)),))
