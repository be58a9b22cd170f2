"""Certified Dirichlet L-values of quadratic characters and zeta_F(2)."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .certified import CertifiedReal, cpi, czeta_even
from .errors import DomainError, UnsupportedRegimeError
from .fields import character_table, is_fundamental

U = 2.0 ** -53


def _check(D: int) -> None:
    if not is_fundamental(D):
        raise DomainError(f"{D} is not a fundamental discriminant")


def _L1_finite(D: int) -> CertifiedReal:
    q = abs(D)
    chi = character_table(D).astype(np.int64)
    if D < 0:
        # L(1) = -pi/q^(3/2) * sum chi(n) n, with the sum exact in integers
        S = int(np.dot(chi, np.arange(q, dtype=np.int64)))
        return (cpi() * (-S)) / (CertifiedReal.exact(q) ** 3).sqrt()
    # even character: fold n -> q - n and keep 0 < n < q/2
    n = np.arange(1, (q + 1) // 2, dtype=np.int64)
    c = chi[1:(q + 1) // 2]
    keep = c != 0
    n, c = n[keep], c[keep]
    t = np.log(np.sin(np.pi * n / q))
    terms = (c * t).tolist()
    s = math.fsum(terms)
    err = float(np.sum(8 * U + 4 * U * np.abs(t))) + math.ulp(abs(s))
    return CertifiedReal(s, err) * -2 / CertifiedReal.exact(q).sqrt()


@lru_cache(maxsize=8)
def _abel_constant(D: int) -> int:
    """max |sum_{k<=n} chi(k)| over one period."""
    chi = character_table(D).astype(np.int64)
    return int(np.max(np.abs(np.cumsum(chi))))


def tail_bound(D: int, s: float, N: int) -> float:
    """Bound for |sum_{n>N} chi_D(n) n^-s|: min of the trivial and the partial summation bound."""
    trivial = N ** (1.0 - s) / (s - 1.0)
    abel = 2.0 * _abel_constant(D) * (N + 1.0) ** (-s)
    return min(trivial, abel)


def truncation_point(D: int, s: float, tol: float) -> int:
    """Smallest convenient N with tail_bound(D, s, N) <= tol/2."""
    target = tol / 2
    B = _abel_constant(D)
    n_abel = math.ceil((2.0 * B / target) ** (1.0 / s))
    n_triv = math.ceil((1.0 / (target * (s - 1.0))) ** (1.0 / (s - 1.0))) if s > 1.5 else n_abel
    N = max(1, min(n_abel, n_triv))
    while tail_bound(D, s, N) > target:
        N = int(N * 1.1) + 1
    return N


def _series(D: int, s: float, N: int) -> CertifiedReal:
    chi = character_table(D, N + 1)[1:].astype(np.float64)
    n = np.arange(1, N + 1, dtype=np.float64)
    w = n ** (-s)
    val = float(np.dot(chi, w))
    # per-term power error plus a pairwise summation bound
    rnd = (4 + 2 * math.log2(N + 1)) * U * float(np.sum(w))
    return CertifiedReal(val, rnd + tail_bound(D, s, N))


def dirichlet_L(D: int, s: float, tol: float = 1e-9) -> CertifiedReal:
    """L(s, chi_D) with certified absolute error at most tol.

    s = 1 uses the closed finite formulas; s >= 3/2 a truncated series with an
    explicit tail bound.
    """
    _check(D)
    if tol <= 0:
        raise DomainError("tol must be positive")
    if s == 1:
        out = _L1_finite(D)
    elif s >= 1.5:
        out = _series(D, float(s), truncation_point(D, float(s), tol))
    else:
        raise UnsupportedRegimeError(f"no certified evaluation of L(s, chi) at s = {s}")
    if out.abs_error > tol:
        raise UnsupportedRegimeError(f"rounding error {out.abs_error:.3g} exceeds tol {tol:.3g}")
    return out


def dirichlet_L_truncated(D: int, s: float, N: int) -> CertifiedReal:
    """The series cut at an explicit N, with its certified error."""
    _check(D)
    if s < 1.5:
        raise UnsupportedRegimeError("series regime needs s >= 3/2")
    return _series(D, float(s), N)


def zeta_F_at_2(D: int, tol: float = 1e-9) -> CertifiedReal:
    """zeta_F(2) = zeta(2) L(2, chi_D)."""
    z2 = czeta_even(2)
    out = z2 * dirichlet_L(D, 2, tol / (2 * z2.value))
    return out


def residue_zeta_F(D: int) -> CertifiedReal:
    """Residue of zeta_F at s = 1, which is L(1, chi_D)."""
    return dirichlet_L(D, 1, 1e-12)


def euler_product_L(D: int, s: float, P: int) -> tuple[float, float]:
    """Truncated Euler product over primes <= P and a bound on its relative error."""
    from sympy import primerange

    logv = 0.0
    chi = character_table(D)
    q = len(chi)
    for p in primerange(2, P + 1):
        c = int(chi[p % q])
        if c:
            logv -= math.log1p(-c * p ** (-s))
    # |log L - log L_P| <= sum_{n > P} n^-s / (1 - 2^-s) over prime powers
    rel = (P ** (1.0 - s) / (s - 1.0)) / (1 - 2.0 ** (-s))
    return math.exp(logv), math.expm1(rel)
