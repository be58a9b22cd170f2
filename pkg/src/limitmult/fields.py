"""Exact invariants of quadratic number fields.

Fields are identified by their fundamental discriminant D. Elements of the
ring of integers are written a + b*omega with omega = (D + sqrt(D))/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import mpmath
import numpy as np
from sympy import factorint

from .certified import CertifiedReal, cpi
from .errors import DomainError, InternalConsistencyError, UnsupportedDegreeError


@dataclass(frozen=True)
class Signature:
    r1: int
    r2: int

    @property
    def d(self) -> int:
        return self.r1 + 2 * self.r2

    def __str__(self) -> str:
        return f"({self.r1},{self.r2})"

    @classmethod
    def parse(cls, text: str) -> "Signature":
        r1, r2 = (int(t) for t in text.strip("() ").split(","))
        return cls(r1, r2)


REAL = Signature(2, 0)
IMAGINARY = Signature(0, 1)


def signature_of(D: int) -> Signature:
    return REAL if D > 0 else IMAGINARY


def _squarefree(n: int) -> bool:
    n = abs(n)
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return False
    r = D % 4
    if r == 1:
        return _squarefree(D)
    if r == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree_mask(n: int) -> np.ndarray:
    """mask[k] is True iff k is squarefree, for 0 <= k <= n."""
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    for p in range(2, isqrt(n) + 1):
        mask[p * p::p * p] = False
    return mask


def list_fundamental_discriminants(dmin: int, dmax: int, sig: Signature) -> list[int]:
    """Fundamental discriminants in [dmin, dmax] of the given sign, ascending by |D|."""
    if sig.d != 2:
        raise UnsupportedDegreeError(f"signature {sig} has degree {sig.d}; only quadratic fields are computed")
    if dmin > dmax:
        raise DomainError("dmin must not exceed dmax")
    if sig == REAL:
        lo, hi = max(dmin, 2), dmax
    else:
        lo, hi = dmin, min(dmax, -1)
    if lo > hi:
        return []
    amax = max(abs(lo), abs(hi))
    sf = _squarefree_mask(amax)
    out = []
    for D in range(lo, hi + 1):
        a = abs(D)
        r = D % 4
        if r == 1 and sf[a]:
            out.append(D)
        elif r == 0 and (D // 4) % 4 in (2, 3) and sf[a // 4]:
            out.append(D)
    out.sort(key=abs)
    return out


# ---------------------------------------------------------------- characters

_TAB2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker_chi(D: int, n: int) -> int:
    """Kronecker symbol (D|n) for n >= 1, by binary reciprocity."""
    if n == 0:
        raise DomainError("kronecker_chi is undefined at n = 0")
    if n < 0:
        raise DomainError("kronecker_chi expects a positive n")
    a, b = D, n
    if a % 2 == 0 and b % 2 == 0:
        return 0
    v = (b & -b).bit_length() - 1
    b >>= v
    k = 1 if v % 2 == 0 else _TAB2[a & 7]
    a %= b
    while a:
        v = (a & -a).bit_length() - 1
        a >>= v
        if v % 2:
            k *= _TAB2[b & 7]
        if a & b & 2:
            k = -k
        a, b = b % a, a
    return k if b == 1 else 0


def prime_discriminants(D: int) -> list[int]:
    """Factor D into prime discriminants (-4, 8, -8 and p* = ±p)."""
    out = []
    rest = D
    for p in sorted(factorint(abs(D))):
        if p == 2:
            continue
        ps = p if p % 4 == 1 else -p
        out.append(ps)
        rest //= ps
    if rest != 1:
        if rest not in (-4, 8, -8):
            raise DomainError(f"{D} is not a fundamental discriminant")
        out.insert(0, rest)
    return out


@lru_cache(maxsize=64)
def _period_table(D: int) -> np.ndarray:
    q = abs(D)
    n = np.arange(q, dtype=np.int64)
    chi = np.ones(q, dtype=np.int8)
    for ps in prime_discriminants(D):
        if ps == -4:
            t = np.array([0, 1, 0, -1], dtype=np.int8)
            chi *= t[n % 4]
        elif ps == 8:
            t = np.array(_TAB2, dtype=np.int8)
            chi *= t[n % 8]
        elif ps == -8:
            t = np.array([0, 1, 0, 1, 0, -1, 0, -1], dtype=np.int8)
            chi *= t[n % 8]
        else:
            p = abs(ps)
            leg = -np.ones(p, dtype=np.int8)
            r = np.arange(1, p, dtype=np.int64)
            leg[(r * r) % p] = 1
            leg[0] = 0
            chi *= leg[n % p]
    chi.setflags(write=False)
    return chi


def character_table(D: int, N: int | None = None) -> np.ndarray:
    """chi_D(n) for n = 0..N-1 (one period by default), built from prime discriminants."""
    t = _period_table(D)
    if N is None or N == len(t):
        return t
    reps = -(-N // len(t))
    return np.tile(t, reps)[:N]


# ---------------------------------------------------------------- forms

def reduced_forms_definite(D: int) -> list[tuple[int, int, int]]:
    """Reduced positive definite forms (a, b, c) of discriminant D < 0."""
    if D >= 0:
        raise DomainError("definite forms need D < 0")
    m = -D
    out = []
    for b in range(m % 2, isqrt(m // 3) + 1, 2):
        ac = (b * b + m) // 4
        for a in range(max(b, 1), isqrt(ac) + 1):
            if ac % a:
                continue
            c = ac // a
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
            if 0 < b < a < c:
                out.append((a, -b, c))
    return sorted(out)


def _class_number_definite(D: int) -> int:
    m = -D
    bmax = isqrt(m // 3)
    bs = np.arange(m % 2, bmax + 1, 2, dtype=np.int64)
    if len(bs) == 0:
        return 0
    ac = (bs * bs + m) // 4
    amin = np.maximum(bs, 1)
    amax = np.array([isqrt(int(x)) for x in ac], dtype=np.int64)
    lens = np.maximum(amax - amin + 1, 0)
    tot = int(lens.sum())
    if tot == 0:
        return 0
    idx = np.repeat(np.arange(len(bs)), lens)
    starts = np.repeat(np.cumsum(lens) - lens, lens)
    a = amin[idx] + (np.arange(tot) - starts)
    b = bs[idx]
    acv = ac[idx]
    ok = (acv % a) == 0
    a, b, acv = a[ok], b[ok], acv[ok]
    c = acv // a
    # (a, -b, c) is a second reduced form unless b = 0, b = a or a = c
    double = (b > 0) & (b < a) & (a < c)
    # every form is primitive when D is fundamental
    return int(len(a) + double.sum())


def reduced_forms_indefinite(D: int) -> list[tuple[int, int, int]]:
    """Reduced indefinite forms: 0 < b < sqrt(D), sqrt(D) - b < 2|a| < sqrt(D) + b."""
    if D <= 0:
        raise DomainError("indefinite forms need D > 0")
    s = isqrt(D)
    out = []
    for b in range(2 - D % 2, s + 1, 2):
        m = (D - b * b) // 4
        lo = (s + 1 - b + 1) // 2  # 2|a| >= s + 1 - b
        hi = (s + b) // 2          # 2|a| <= s + b
        for a in range(max(lo, 1), hi + 1):
            if m % a == 0:
                out.append((a, b, -m // a))
                out.append((-a, b, m // a))
    return out


def _rho(form: tuple[int, int, int], D: int, s: int) -> tuple[int, int, int]:
    a, b, c = form
    m = 2 * abs(c)
    lo = s + 1 - m
    b2 = lo + ((-b - lo) % m)
    return (c, b2, (b2 * b2 - D) // (4 * c))


def narrow_class_number(D: int) -> int:
    """Number of rho-cycles of reduced indefinite forms of discriminant D."""
    s = isqrt(D)
    forms = reduced_forms_indefinite(D)
    seen: set[tuple[int, int, int]] = set()
    cycles = 0
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = _rho(g, D, s)
        if g != f:
            raise InternalConsistencyError(f"rho is not a permutation of reduced forms for D={D}")
    return cycles


# ---------------------------------------------------------------- units

@lru_cache(maxsize=4096)
def fundamental_unit_exact(D: int) -> tuple[int, int, int]:
    """(x, y, period) with (x + y sqrt D)/2 the fundamental unit and norm (-1)^period."""
    if D <= 0 or not is_fundamental(D):
        raise DomainError("fundamental_unit needs a positive fundamental discriminant")
    s = isqrt(D)
    b = s if (s - D) % 2 == 0 else s - 1
    P, Q = b, 2
    P0, Q0 = P, Q
    # product of the complete quotients (P + sqrt D)/Q, as (A + B sqrt D)/C
    A, B, C = 1, 0, 1
    period = 0
    while True:
        A, B = A * P + B * D, A + B * P
        C *= Q
        period += 1
        a = (P + s) // Q
        P = a * Q - P
        Q = (D - P * P) // Q
        if (P, Q) == (P0, Q0):
            break
    g = math.gcd(math.gcd(A, B), C)
    A, B, C = A // g, B // g, C // g
    if (2 * A) % C or (2 * B) % C:
        raise InternalConsistencyError(f"unit for D={D} not in the maximal order")
    x, y = 2 * A // C, 2 * B // C
    if x * x - D * y * y != (-1) ** period * 4:
        raise InternalConsistencyError(f"Pell identity fails for D={D}")
    return x, y, period


def fundamental_unit(D: int) -> tuple[int, int, float]:
    """(x, y, regulator) with (x + y sqrt D)/2 the fundamental unit > 1."""
    x, y, _ = fundamental_unit_exact(D)
    return x, y, regulator(D).value


@lru_cache(maxsize=4096)
def regulator(D: int) -> CertifiedReal:
    x, y, _ = fundamental_unit_exact(D)
    with mpmath.workdps(40):
        r = mpmath.log((x + y * mpmath.sqrt(D)) / 2)
        v = float(r)
        err = float(abs(r - v)) + 1e-30
    return CertifiedReal(v, err)


def unit_norm(D: int) -> int:
    return -1 if fundamental_unit_exact(D)[2] % 2 else 1


def roots_of_unity(D: int) -> int:
    return {-3: 6, -4: 4}.get(D, 2)


@lru_cache(maxsize=8192)
def class_number(D: int) -> int:
    """Class number of the quadratic field of discriminant D, from reduced forms."""
    if not is_fundamental(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    if D < 0:
        return _class_number_definite(D)
    hplus = narrow_class_number(D)
    return hplus if unit_norm(D) == -1 else hplus // 2


# ---------------------------------------------------------------- invariants

@dataclass(frozen=True)
class FieldInvariants:
    D: int
    signature: Signature
    h: int
    R: float
    w: int
    L1: CertifiedReal
    zeta2: CertifiedReal
    provenance: str = "computed"
    R_cert: CertifiedReal = field(default=CertifiedReal(1.0), compare=False)
    L1_formula: CertifiedReal | None = field(default=None, compare=False)

    @property
    def absD(self) -> int:
        return abs(self.D)

    @property
    def d(self) -> int:
        return self.signature.d

    @property
    def R_eff(self) -> CertifiedReal:
        return self.R_cert if self.D > 0 else CertifiedReal(1.0)

    @property
    def log_absD(self) -> float:
        return math.log(abs(self.D))


def class_number_formula_L1(D: int, h: int, R: CertifiedReal, w: int) -> CertifiedReal:
    """2^r1 (2 pi)^r2 h R_eff / (w sqrt|D|)."""
    sq = CertifiedReal.exact(abs(D)).sqrt()
    if D < 0:
        return (2 * cpi() * h) / (sq * w)
    return (R * (4 * h)) / (sq * w)


@lru_cache(maxsize=65536)
def field_invariants(D: int, tol: float = 1e-9) -> FieldInvariants:
    from . import lfun

    if not is_fundamental(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    h = class_number(D)
    w = roots_of_unity(D)
    if D > 0:
        Rc = regulator(D)
    else:
        Rc = CertifiedReal(1.0)
    L1_formula = class_number_formula_L1(D, h, Rc, w)
    L1_sum = lfun.dirichlet_L(D, 1, 1e-12)
    if abs(L1_formula.value - L1_sum.value) > 1e-9 + L1_formula.abs_error + L1_sum.abs_error:
        raise InternalConsistencyError(
            f"L(1,chi_{D}): class number formula gives {L1_formula.value!r}, "
            f"character sum gives {L1_sum.value!r}")
    zeta2 = lfun.zeta_F_at_2(D, tol)
    return FieldInvariants(
        D=D, signature=signature_of(D), h=h, R=Rc.value if D > 0 else 0.0, w=w,
        L1=L1_sum, zeta2=zeta2, R_cert=Rc, L1_formula=L1_formula)


def local_different_norms(D: int) -> dict[int, int]:
    """Norm of the local different at each ramified prime.

    At a ramified p the local ring is Z_p[sqrt m] with m the squarefree kernel
    of D, so the different is generated by 2 sqrt m and its norm is the p-part
    of |N(2 sqrt m)| = 4|m|.
    """
    if not is_fundamental(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    m = D if D % 4 == 1 else D // 4
    out = {}
    for p in factorint(abs(D)):
        out[p] = p ** factorint(4 * abs(m)).get(p, 0)
    return out


def different_norm_product(D: int) -> int:
    return math.prod(local_different_norms(D).values())


# ---------------------------------------------------------------- integers

@dataclass(frozen=True, order=True)
class QuadInteger:
    """a + b*omega in O_F, omega = (D + sqrt D)/2."""

    a: int
    b: int
    D: int

    @classmethod
    def rational(cls, n: int, D: int) -> "QuadInteger":
        return cls(n, 0, D)

    @classmethod
    def sqrt_d(cls, D: int) -> "QuadInteger":
        """sqrt(D) = 2 omega - D."""
        return cls(-D, 2, D)

    @property
    def trace(self) -> int:
        return 2 * self.a + self.b * self.D

    @property
    def norm(self) -> int:
        D = self.D
        return self.a * self.a + self.a * self.b * D + self.b * self.b * (D * D - D) // 4

    def is_rational(self) -> bool:
        return self.b == 0

    def halves(self) -> tuple[Fraction, Fraction]:
        """(u, v) with self = u + v sqrt D."""
        return Fraction(2 * self.a + self.b * self.D, 2), Fraction(self.b, 2)

    @classmethod
    def from_halves(cls, u: Fraction, v: Fraction, D: int) -> "QuadInteger | None":
        """Inverse of halves(); None when u + v sqrt D is not integral."""
        b = 2 * v
        a = u - b * D / 2
        if a.denominator != 1 or b.denominator != 1:
            return None
        return cls(int(a), int(b), D)

    def _check(self, other: "QuadInteger") -> None:
        if self.D != other.D:
            raise DomainError("elements of different fields")

    def __add__(self, o):
        if isinstance(o, int):
            return QuadInteger(self.a + o, self.b, self.D)
        self._check(o)
        return QuadInteger(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadInteger(-self.a, -self.b, self.D)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, int):
            return QuadInteger(self.a * o, self.b * o, self.D)
        self._check(o)
        D = self.D
        # omega^2 = D omega - (D^2 - D)/4
        n0 = (D * D - D) // 4
        bb = self.b * o.b
        return QuadInteger(self.a * o.a - bb * n0, self.a * o.b + self.b * o.a + bb * D, D)

    __rmul__ = __mul__

    def conj(self) -> "QuadInteger":
        # conj(omega) = D - omega
        return QuadInteger(self.a + self.b * self.D, -self.b, self.D)

    def embeddings(self) -> tuple:
        """Real: (sigma1, sigma2) with sigma1(sqrt D) > 0. Imaginary: (sigma,) with sqrt D = i sqrt|D|."""
        u, v = self.halves()
        r = math.sqrt(abs(self.D))
        if self.D > 0:
            return (float(u) + float(v) * r, float(u) - float(v) * r)
        return (complex(float(u), float(v) * r),)

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a}{self.b:+d}w[{self.D}]"
