"""Quotient volumes, volumes of the maximal compact subgroup, and nu_F."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .certified import CertifiedReal, czeta_even
from .fields import FieldInvariants
from .reports import BoundReport, make_report, out_of_domain


class GroupKind(str, Enum):
    GL2 = "GL2"
    SL2 = "SL2"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "GroupKind":
        return cls(text.upper())

    # exponent pack
    @property
    def a_G(self) -> int:
        return 2 if self is GroupKind.GL2 else 1

    @property
    def beta_G(self) -> int:
        return 1 if self is GroupKind.GL2 else 2

    @property
    def delta_torus(self) -> int:
        return 2 if self is GroupKind.GL2 else 1

    @property
    def delta_spectral(self) -> Fraction:
        return Fraction(1, 2) if self is GroupKind.GL2 else Fraction(2, 3)

    @property
    def kf_exponent(self) -> Fraction:
        return Fraction(3, 2) if self is GroupKind.GL2 else Fraction(1)


@dataclass(frozen=True)
class ExactPower:
    """base ** exponent with integer base and rational exponent."""

    base: int
    exponent: Fraction

    def to_certified(self) -> CertifiedReal:
        return CertifiedReal.exact(self.base) ** self.exponent

    def as_fraction(self) -> Fraction | None:
        """Exact rational value when the exponent allows it."""
        e = self.exponent
        if e.denominator == 1:
            return Fraction(self.base) ** int(e)
        if e.denominator == 2:
            r = math.isqrt(self.base)
            if r * r == self.base:
                return Fraction(r) ** int(e.numerator)
        return None

    def __float__(self) -> float:
        return float(self.base) ** float(self.exponent)

    def __str__(self) -> str:
        return f"{self.base}^({self.exponent})"


@dataclass(frozen=True)
class VolumePack:
    vol_quotient: CertifiedReal
    vol_Kf: ExactPower
    nu: CertifiedReal


def _sqrt_absD(inv: FieldInvariants) -> CertifiedReal:
    return CertifiedReal.exact(inv.absD).sqrt()


def vol_quotient(g: GroupKind, inv: FieldInvariants) -> CertifiedReal:
    """vol(G(F)\\G(A)^1): |D|^(1/2) zeta_F(2), times L(1, chi) for GL2."""
    v = _sqrt_absD(inv) * inv.zeta2
    return v * inv.L1 if g is GroupKind.GL2 else v


def vol_Kf(g: GroupKind, D: int) -> ExactPower:
    return ExactPower(abs(D), -g.kf_exponent)


def nu_F(g: GroupKind, inv: FieldInvariants) -> CertifiedReal:
    """|D|^(3/2) zeta_F(2) for SL2 and |D|^2 zeta_F(2) L(1, chi) for GL2."""
    if g is GroupKind.GL2:
        return CertifiedReal.exact(inv.absD ** 2) * inv.zeta2 * inv.L1
    return (CertifiedReal.exact(inv.absD) ** 3).sqrt() * inv.zeta2


def volume_pack(g: GroupKind, inv: FieldInvariants) -> VolumePack:
    return VolumePack(vol_quotient(g, inv), vol_Kf(g, inv.D), nu_F(g, inv))


def measure_ratio(inv: FieldInvariants, power: Fraction) -> CertifiedReal:
    """res zeta_F / (|D|^power zeta_F(2))."""
    return inv.L1 / (CertifiedReal.exact(inv.absD) ** power * inv.zeta2)


def measure_ratio_bound(inv: FieldInvariants, power: Fraction) -> CertifiedReal:
    """zeta(2d)^(-d) |D|^(-power) (log|D|)^(d-1) for d = 2."""
    z4 = czeta_even(4)
    logD = CertifiedReal.exact(inv.absD).log()
    return logD / (z4 * z4 * CertifiedReal.exact(inv.absD) ** power)


def quot_meas_check(g: GroupKind, inv: FieldInvariants, power: Fraction = Fraction(1, 2)) -> BoundReport:
    """res zeta_F / (|D|^power zeta_F(2)) <= zeta(4)^-2 |D|^-power log|D|, for |D| >= 5.

    power = 1/2 is the primary form; power = 1 is the variant used for the
    split contribution.
    """
    label = "quot_meas" if power == Fraction(1, 2) else f"quot_meas_p{power.numerator}_{power.denominator}"
    if inv.absD < 5:
        return out_of_domain(label, inv.D, g, "needs |D| >= 5")
    return make_report(label, measure_ratio(inv, power), measure_ratio_bound(inv, power), inv.D, g)
