"""Explicit upper bounds for the non-central geometric terms and the spectral remainder.

Every bound is evaluated for one field with the surrogate test function: the
indicator of the set of matrices whose entries lie within R of the identity
(in the norm ||.||_r), with sup-norm 1. Archimedean integrals then reduce to
Euclidean ball volumes and the archimedean orbital integrals are replaced by
the configured constant ``arch``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy import primefactors

from .certified import CertifiedReal, cpi
from .errors import ConfigError, DomainError, NotRegularError
from .fields import FieldInvariants, QuadInteger, field_invariants
from .lattices import sq_norm_exact
from .reports import BOUND_ONLY, OK, VACUOUS, BoundReport, make_report, out_of_domain
from .sigma import REG_ELL, REG_SPLIT, PolynomialClass, sigma0_for_field, sqrt_in_OF, units_in_ball
from .volumes import GroupKind, measure_ratio, measure_ratio_bound, nu_F, vol_Kf, vol_quotient

_LOG3 = math.log(3)
_LOG5 = math.log(5)
DECADE_SLACK = 0.01


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class HarnessConfig:
    """Scan-wide constants of the bound harness."""

    R: float = 5.0
    rho: float = 8.0
    # constants of the exponential approximation (non-explicit, configured)
    a1: float = 1.0
    delta_approx: float = 1.0
    eps: float = 0.05
    # archimedean orbital integral surrogate
    arch: float = 1.0
    # SL2 conjugacy classes per stable class of an elliptic polynomial
    sl2_classes: int = 1
    # exact residues of biquadratic splitting fields up to this |D_E| (0 disables)
    biquadratic_cap: int = 0

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigError("R must be positive")
        if not self.rho > 0:
            raise ConfigError("rho must be positive")
        if self.arch <= 0 or self.a1 < 0 or self.sl2_classes < 1:
            raise ConfigError("invalid harness constants")


# ---------------------------------------------------------------- truncation

@dataclass(frozen=True)
class TruncationParam:
    """T = (t, -t) in a^+ with alpha(T) = 2t and varpi(T) = t."""

    t: float
    rho: float
    absD: int

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError("t must be non-negative")

    @property
    def alpha(self) -> float:
        return 2 * self.t

    @property
    def varpi(self) -> float:
        return self.t

    @property
    def threshold(self) -> float:
        return alpha_threshold(math.log(self.absD), self.rho)

    @property
    def regular(self) -> bool:
        # relative slack absorbs the rounding of log
        return self.alpha >= self.threshold * (1 - 1e-12)

    def scaled(self, k: float) -> "TruncationParam":
        return TruncationParam(self.t * k, self.rho, self.absD)


def _absD(inv_or_absD) -> int:
    return inv_or_absD.absD if isinstance(inv_or_absD, FieldInvariants) else abs(int(inv_or_absD))


def alpha_threshold(log_absD: float, rho: float) -> float:
    """rho * max(1, log|D|)."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    return rho * max(1.0, log_absD)


def truncation_threshold(inv, rho: float) -> TruncationParam:
    """Minimal regular T: alpha(T) = rho * max(1, log|D|)."""
    absD = _absD(inv)
    return TruncationParam(alpha_threshold(math.log(absD), rho) / 2, rho, absD)


def require_regular(T: TruncationParam, inv: FieldInvariants) -> None:
    if T.absD != inv.absD:
        raise DomainError(f"T was built for |D| = {T.absD}, not {inv.absD}")
    if not T.regular:
        raise NotRegularError(f"alpha(T) = {T.alpha:.6g} < rho max(1, log|D|) = {T.threshold:.6g}")


def torus_truncated_bound(T: TruncationParam, g: GroupKind, x_norm: float) -> float:
    """delta_G (varpi(T) + log ||(1, x)||)."""
    if not x_norm >= 1:
        raise DomainError("||(1, x)|| is at least 1")
    return g.delta_torus * (T.varpi + math.log(x_norm))


# ---------------------------------------------------------------- helpers

def _log_absD(inv: FieldInvariants) -> CertifiedReal:
    return CertifiedReal.exact(inv.absD).log()


def field_sigma(inv: FieldInvariants, g: GroupKind, cfg: HarnessConfig) -> list[PolynomialClass]:
    return sigma0_for_field(inv.D, cfg.R, g)


def _of_kind(polys: Iterable[PolynomialClass], kind: str) -> list[PolynomialClass]:
    return [p for p in polys if p.kind == kind]


def _ball_volume(inv: FieldInvariants, R: float) -> CertifiedReal:
    """Lebesgue volume of {x in F_inf : ||x||_r <= R}."""
    v = cpi() * CertifiedReal.exact(R) * CertifiedReal.exact(R)
    return v if inv.D > 0 else v / 2


def _roots(inv: FieldInvariants, p: PolynomialClass) -> tuple[QuadInteger, QuadInteger, QuadInteger]:
    """(gamma1, gamma2, gamma1 - gamma2) for a split polynomial."""
    a, _ = p.lifted(inv.D)
    s = sqrt_in_OF(p.disc(inv.D))
    if s is None:
        raise DomainError(f"{p} does not split over Q(sqrt {inv.D})")
    out = []
    for sign in (1, -1):
        u, v = (-a + s * sign).halves()
        r = QuadInteger.from_halves(u / 2, v / 2, inv.D)
        if r is None:
            raise DomainError(f"roots of {p} are not integral")
        out.append(r)
    return out[0], out[1], s


def _sup_log(inv: FieldInvariants, s: QuadInteger, R: float) -> float:
    """sup over ||x|| <= R of sum_v |log ||(|s|_v, |x|_v)||_v|."""
    total = 0.0
    if inv.D > 0:
        for e in s.embeddings():
            a = abs(e)
            total += max(abs(math.log(a)), abs(0.5 * math.log(a * a + R * R)))
    else:
        a = abs(s.embeddings()[0]) ** 2
        total += max(abs(math.log(a)), abs(math.log(a + R * R / 2)))
    return total


# ---------------------------------------------------------------- regular split

def split_sum(inv: FieldInvariants, g: GroupKind, cfg: HarnessConfig,
              polys: Sequence[PolynomialClass]) -> tuple[CertifiedReal, list[dict]]:
    """sum over split classes of m (1 + log|g1 - g2|_r) times the archimedean integral."""
    r2 = Fraction(cfg.R) ** 2
    mult = 2 if g is GroupKind.SL2 else 1
    vol = _ball_volume(inv, cfg.R)
    total = CertifiedReal(0.0)
    rows = []
    for p in polys:
        g1, g2, s = _roots(inv, p)
        if sq_norm_exact(g1 - 1) > r2 or sq_norm_exact(g2 - 1) > r2:
            continue
        ns = abs(s.norm)
        sup = _sup_log(inv, s, cfg.R)
        # sup is a float maximum of logs; pad it by a relative 1e-12
        arch = vol * CertifiedReal(1 + sup, 1e-12 * (1 + sup))
        term = (1 + CertifiedReal.exact(ns).log()) * arch * mult
        total = total + term
        rows.append({"poly": str(p), "norm_diff": ns, "term": term.value})
    return total, rows


def reg_split_bound(inv: FieldInvariants, T: TruncationParam, polys: Sequence[PolynomialClass] | None = None,
                    g: GroupKind = GroupKind.SL2, cfg: HarnessConfig = HarnessConfig()) -> BoundReport:
    """Split contribution normalized by vol(G(F)\\G(A)^1) against C |D|^-1 log|D| varpi(T).

    polys are the split classes of Sigma_0(F); they are computed when omitted.
    """
    require_regular(T, inv)
    label = "reg_split"
    if inv.absD < 5:
        return out_of_domain(label, inv.D, g, "needs |D| >= 5")
    if polys is None:
        polys = _of_kind(field_sigma(inv, g, cfg), REG_SPLIT)
    S, rows = split_sum(inv, g, cfg, polys)
    w = CertifiedReal.exact(T.varpi)
    computed = 2 * w * S * measure_ratio(inv, Fraction(1))
    bound = 2 * w * S * measure_ratio_bound(inv, Fraction(1))
    status = VACUOUS if not rows else OK
    return make_report(label, computed, bound, inv.D, g, status=status,
                       notes={"varpi": T.varpi, "S": S.value, "classes": rows})


# ---------------------------------------------------------------- unipotent

def central_count(inv: FieldInvariants, g: GroupKind, R: float) -> int:
    """Number of central z in K_f with ||z - 1|| <= R."""
    if g is GroupKind.SL2:
        return 1 + (8 <= Fraction(R) ** 2)
    return len(units_in_ball(inv.D, 1, R))


def unip_constant(inv: FieldInvariants, T: TruncationParam, g: GroupKind, R: float) -> CertifiedReal:
    """c_2 varpi(T) = n_z (2R)^(2d) (varpi(T) + 2d log R), clipped at 0."""
    d = inv.d
    nz = central_count(inv, g, R)
    length = T.varpi + 2 * d * math.log(R)
    if length <= 0:
        return CertifiedReal(0.0)
    two_r = CertifiedReal.exact(2 * Fraction(R))
    return two_r ** (2 * d) * nz * CertifiedReal(length, 4 * math.ulp(length) * (1 + T.varpi))


def unip_bound(inv: FieldInvariants, T: TruncationParam, g: GroupKind = GroupKind.SL2,
               R: float | None = None, cfg: HarnessConfig = HarnessConfig()) -> BoundReport:
    """Unipotent contribution normalized by vol(G(F)\\G(A)^1) against C |D|^-1/2 log|D| varpi(T)."""
    require_regular(T, inv)
    R = cfg.R if R is None else R
    label = "unip"
    if inv.absD < 5:
        return out_of_domain(label, inv.D, g, "needs |D| >= 5")
    d = inv.d
    c2 = unip_constant(inv, T, g, R)
    computed = c2 * measure_ratio(inv, Fraction(1, 2))
    # varpi(T) >= rho log 5 / 2 for regular T, which absorbs the log R term
    logterm = max(0.0, 2 * d * math.log(R)) / (T.rho * _LOG5 / 2)
    C = (CertifiedReal.exact(2 * Fraction(R)) ** (2 * d) * central_count(inv, g, R)
         * CertifiedReal(1 + logterm, 4 * math.ulp(1 + logterm)))
    bound = C * measure_ratio_bound(inv, Fraction(1, 2)) * T.varpi
    return make_report(label, computed, bound, inv.D, g,
                       notes={"varpi": T.varpi, "c2": c2.value, "C": C.value, "n_z": central_count(inv, g, R)})


# ---------------------------------------------------------------- regular elliptic

def _fund_disc(n: int) -> int:
    """Discriminant of Q(sqrt n) for a non-square integer n."""
    sign = -1 if n < 0 else 1
    core = 1
    for p in primefactors(abs(n)):
        e = 0
        m = abs(n)
        while m % p == 0:
            m //= p
            e += 1
        if e % 2:
            core *= p
    core *= sign
    return core if core % 4 == 1 else 4 * core


def quartic_residue(rec) -> CertifiedReal:
    """2^r1 (2 pi)^r2 h R / (w sqrt|disc|) for an ingested field record."""
    r1, r2 = rec.signature
    num = CertifiedReal.exact(2 ** r1) * (2 * cpi()) ** r2 * rec.h * CertifiedReal(rec.R, 1e-11 * rec.R)
    return num / (CertifiedReal.exact(abs(rec.disc)).sqrt() * rec.w)


def _biquadratic_residue(D: int, m: int) -> tuple[CertifiedReal, int]:
    """res zeta_E for E = Q(sqrt D, sqrt m), m rational non-square, and |D_E|."""
    d1 = _fund_disc(m)
    d2 = _fund_disc(D * m)
    res = CertifiedReal(1.0)
    for dd in (D, d1, d2):
        res = res * field_invariants(dd).L1
    return res, abs(D * d1 * d2)


@dataclass(frozen=True)
class EllipticTerm:
    poly: str
    Delta: int
    D_E_bound: int
    kappa: int
    volume: CertifiedReal
    orbital: CertifiedReal
    constant: float
    exact_volume: bool


def _elliptic_term(inv: FieldInvariants, p: PolynomialClass, g: GroupKind, cfg: HarnessConfig,
                   ingested=None) -> EllipticTerm:
    disc = p.disc(inv.D)
    Delta = abs(disc.norm)
    if Delta == 0:
        raise DomainError(f"{p} is not regular")
    D = CertifiedReal.exact(inv.absD)
    logD = D.log()
    B = Delta * inv.absD ** 2
    vol = None
    if ingested is not None:
        vol = quartic_residue(ingested)
        DE = abs(ingested.disc)
    elif disc.b == 0 and cfg.biquadratic_cap and B <= cfg.biquadratic_cap:
        vol, DE = _biquadratic_residue(inv.D, disc.a)
    exact = vol is not None
    if vol is None:
        # res zeta_E <= (log D_E)^3 with D_E <= N(disc) D^2
        DE = B
        vol = CertifiedReal.exact(B).log() ** 3
    kappa = 4 ** len(primefactors(2 * Delta))
    m = cfg.sl2_classes if g is GroupKind.SL2 else 1
    shape = (2 + math.log(Delta) / _LOG3) ** 3
    if g is GroupKind.GL2:
        orb = CertifiedReal.exact(Delta) * logD / D ** Fraction(3, 2) * CertifiedReal.exact(DE).sqrt()
        const = cfg.arch * Delta ** 1.5 * shape
    else:
        orb = CertifiedReal.exact(kappa * Delta) * logD / D
        const = cfg.arch * m * kappa * Delta * shape
    # padding for the float evaluation of the constant
    const *= 1 + 1e-12
    return EllipticTerm(str(p), Delta, DE, kappa, vol, orb * (cfg.arch * m), const, exact)


def elliptic_contribution(inv: FieldInvariants, g: GroupKind, cfg: HarnessConfig = HarnessConfig(),
                          polys: Sequence[PolynomialClass] | None = None,
                          ingested: dict | None = None) -> BoundReport:
    """Sum over elliptic classes of centralizer volume times orbital integral.

    Bound: c D^-1/2 (log D)^4 for GL2 and c (log D)^4 for SL2, with
    c = sum of per-class constants depending on the polynomial alone.
    ``ingested`` maps str(poly) to an ingested quartic record.
    """
    label = "reg_ell"
    if polys is None:
        polys = _of_kind(field_sigma(inv, g, cfg), REG_ELL)
    ingested = ingested or {}
    terms = [_elliptic_term(inv, p, g, cfg, ingested.get(str(p))) for p in polys]
    if not terms:
        return make_report(label, 0, 0, inv.D, g, status=VACUOUS, notes={"classes": []})
    computed = CertifiedReal(0.0)
    for t in terms:
        computed = computed + t.volume * t.orbital
    logD = _log_absD(inv)
    shape = logD ** 4
    if g is GroupKind.GL2:
        shape = shape / CertifiedReal.exact(inv.absD).sqrt()
    c = math.fsum(t.constant for t in terms) * (1 + 1e-12)
    status = OK if all(t.exact_volume for t in terms) else BOUND_ONLY
    notes = {"constant": c, "classes": [
        {"poly": t.poly, "Delta": t.Delta, "D_E_bound": t.D_E_bound, "kappa": t.kappa,
         "volume": t.volume.value, "exact_volume": t.exact_volume} for t in terms]}
    return make_report(label, computed, shape * c, inv.D, g, status=status, notes=notes)


def global_elliptic_bound(inv: FieldInvariants, p: PolynomialClass, ingested=None,
                          g: GroupKind = GroupKind.GL2, cfg: HarnessConfig = HarnessConfig()) -> BoundReport:
    """Elliptic bound for a single polynomial class; degraded to bound-only without quartic data."""
    from .sigma import classify

    if classify(inv.D, p) != REG_ELL:
        raise DomainError(f"{p} is not elliptic over Q(sqrt {inv.D})")
    ing = {str(p): ingested} if ingested is not None else None
    return elliptic_contribution(inv, g, cfg, [p], ing)


# ---------------------------------------------------------------- geometric remainder

def remainder_shape(inv: FieldInvariants, T: TruncationParam) -> CertifiedReal:
    """|D|^-1/2 (log|D|)^(2d) varpi(T)."""
    logD = _log_absD(inv)
    return logD ** (2 * inv.d) / CertifiedReal.exact(inv.absD).sqrt() * T.varpi


@dataclass(frozen=True)
class RemainderParts:
    D: int
    group: str
    varpi: float
    elliptic: BoundReport
    split: BoundReport
    unip: BoundReport
    total: CertifiedReal
    shape: CertifiedReal
    components: dict = field(default_factory=dict, compare=False)

    @property
    def shape_ratio(self) -> float:
        return self.total.value / self.shape.value


def remainder_parts(inv: FieldInvariants, T: TruncationParam, g: GroupKind,
                    cfg: HarnessConfig = HarnessConfig(),
                    polys: Sequence[PolynomialClass] | None = None) -> RemainderParts:
    """The three component reports and their sum normalized by vol(G(F)\\G(A)^1)."""
    require_regular(T, inv)
    if inv.absD < 5:
        raise DomainError("geometric remainder needs |D| >= 5")
    if polys is None:
        polys = field_sigma(inv, g, cfg)
    ell = elliptic_contribution(inv, g, cfg, _of_kind(polys, REG_ELL))
    spl = reg_split_bound(inv, T, _of_kind(polys, REG_SPLIT), g, cfg)
    uni = unip_bound(inv, T, g, cfg.R, cfg)
    ell_n = ell.computed / vol_quotient(g, inv)
    total = ell_n + spl.computed + uni.computed
    comps = {"reg_ell": ell_n.value, "reg_split": spl.computed.value, "unip": uni.computed.value}
    return RemainderParts(inv.D, str(g), T.varpi, ell, spl, uni, total, remainder_shape(inv, T), comps)


def calibrate_constant(parts: Sequence[RemainderParts], n: int = 10) -> float:
    """Largest shape ratio among the n smallest fields; frozen for the rest of a scan."""
    if not parts:
        raise DomainError("nothing to calibrate on")
    first = sorted(parts, key=lambda p: (abs(p.D), p.D))[:n]
    return max(p.total.hi / p.shape.lo for p in first)


def geometric_remainder(parts: RemainderParts, C: float, calibration: bool = False) -> BoundReport:
    """Normalized remainder against C |D|^-1/2 (log|D|)^(2d) varpi(T)."""
    notes = dict(parts.components)
    notes.update({"varpi": parts.varpi, "C": C, "calibration": calibration})
    return make_report("geom_remainder", parts.total, parts.shape * C, parts.D, parts.group, notes=notes)


# ---------------------------------------------------------------- interpolation

def lagrange_constant(points: Sequence[tuple[float, float]]) -> float:
    """Value at t = 0 of the line through the first two points."""
    if len(points) < 2:
        raise DomainError("need two points")
    (t1, y1), (t2, y2) = points[0], points[1]
    if t1 == t2:
        raise DomainError("degenerate pair of truncation parameters")
    return (t2 * y1 - t1 * y2) / (t2 - t1)


def approximation_error(inv: FieldInvariants, T: TruncationParam, cfg: HarnessConfig) -> float:
    """a1 |D|^-1 exp(-delta alpha(T) / 2) varpi(T)."""
    return cfg.a1 / inv.absD * math.exp(-cfg.delta_approx * T.alpha / 2) * T.varpi


def interpolation_constant_report(inv: FieldInvariants, samples: Sequence[tuple[TruncationParam, CertifiedReal]],
                                  C: float, cfg: HarnessConfig = HarnessConfig(),
                                  g: GroupKind = GroupKind.SL2) -> BoundReport:
    """Extrapolate the degree-1 polynomial to T = 0 from two regular samples.

    The constant term is bounded by |b| plus the weighted approximation errors
    and compared with a |D|^-1/2 (log|D|)^(2d+1), a = 2 rho (C + a1).
    """
    if len(samples) < 2:
        raise DomainError("need at least two truncation parameters")
    (T1, y1), (T2, y2) = samples[0], samples[1]
    for T in (T1, T2):
        require_regular(T, inv)
    t1, t2 = T1.varpi, T2.varpi
    if t1 == t2:
        raise DomainError("degenerate pair of truncation parameters")
    w1, w2 = t2 / (t2 - t1), -t1 / (t2 - t1)
    b = y1 * w1 + y2 * w2
    radius = abs(w1) * approximation_error(inv, T1, cfg) + abs(w2) * approximation_error(inv, T2, cfg)
    computed = CertifiedReal(abs(b.value), b.abs_error) + CertifiedReal(radius, 4 * math.ulp(radius))
    a = 2 * T1.rho * (C + cfg.a1)
    logD = _log_absD(inv)
    bound = logD ** (2 * inv.d + 1) / CertifiedReal.exact(inv.absD).sqrt() * a
    return make_report("interpolation", computed, bound, inv.D, g,
                       notes={"constant_term": b.value, "radius": radius, "a": a, "t": [t1, t2]})


# ---------------------------------------------------------------- spectral side

def spectral_remainder_bound(inv: FieldInvariants, g: GroupKind, eps: float = 0.05,
                             experimental: bool = True) -> BoundReport:
    """h^a_G (1 + log|D|) vol(K_f) / vol(G(F)\\G(A)^1) against nu_F^(-delta_G + eps).

    The implied constant of the character count is taken to be 1, so the
    check is reported as experimental by default.
    """
    hpow = CertifiedReal.exact(inv.h ** g.a_G)
    kf = vol_Kf(g, inv.D).to_certified()
    computed = hpow * (1 + _log_absD(inv)) * kf / vol_quotient(g, inv)
    expo = -float(g.delta_spectral) + eps
    bound = nu_F(g, inv) ** expo
    return make_report("spectral", computed, bound, inv.D, g, experimental=experimental,
                       notes={"exponent": expo})


# ---------------------------------------------------------------- field-level bounds

def residue_bound_check(inv: FieldInvariants) -> BoundReport:
    """res zeta_F = L(1, chi_D) <= (log|D|)^(d-1), for |D| >= 5."""
    if inv.absD < 5:
        return out_of_domain("residue_bound", inv.D, "", "needs |D| >= 5")
    return make_report("residue_bound", inv.L1, _log_absD(inv) ** (inv.d - 1), inv.D)


def class_number_bound_check(inv: FieldInvariants) -> BoundReport:
    """h <= 2 |D|^(1/2) (log|D|)^(d-1), for |D| >= 5."""
    if inv.absD < 5:
        return out_of_domain("class_number_bound", inv.D, "", "needs |D| >= 5")
    bound = CertifiedReal.exact(inv.absD).sqrt() * _log_absD(inv) ** (inv.d - 1) * 2
    return make_report("class_number_bound", inv.h, bound, inv.D)


# ---------------------------------------------------------------- decay

def decay_fit(reports: Sequence[BoundReport], min_fields: int = 10, min_decades: float = 2.0) -> tuple[float, float]:
    """Least-squares slope and intercept of log(computed / varpi) against log|D|."""
    rows = [(abs(r.field_disc), r.computed.value / r.notes.get("varpi", 1.0)) for r in reports
            if r.computed.value > 0]
    discs = {d for d, _ in rows}
    if len(discs) < min_fields:
        raise DomainError(f"decay fit needs at least {min_fields} fields, got {len(discs)}")
    lo, hi = min(discs), max(discs)
    # a nominal range 10^a..10^b has no fundamental discriminant at either end
    if math.log10(hi / lo) < min_decades - DECADE_SLACK:
        raise DomainError(f"|D| spans {math.log10(hi / lo):.2f} decades, need {min_decades}")
    x = np.log(np.array([d for d, _ in rows], dtype=float))
    y = np.log(np.array([v for _, v in rows], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def field_reports(inv: FieldInvariants, g: GroupKind, cfg: HarnessConfig = HarnessConfig()) -> list[BoundReport]:
    """Component, measure and spectral reports for one field at the minimal regular T."""
    from .volumes import quot_meas_check

    out = [quot_meas_check(g, inv), quot_meas_check(g, inv, Fraction(1))]
    out.append(spectral_remainder_bound(inv, g, cfg.eps))
    if inv.absD < 5:
        return out
    T = truncation_threshold(inv, cfg.rho)
    polys = field_sigma(inv, g, cfg)
    out.append(elliptic_contribution(inv, g, cfg, _of_kind(polys, REG_ELL)))
    out.append(reg_split_bound(inv, T, _of_kind(polys, REG_SPLIT), g, cfg))
    out.append(unip_bound(inv, T, g, cfg.R, cfg))
    return out
