"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction

import pytest

from limitmult import bt_orbital as bt
from limitmult.bounds import spectral_remainder_bound
from limitmult.certified import CertifiedReal, cpi
from limitmult.fields import (IMAGINARY, REAL, QuadInteger, class_number, different_norm_product, field_invariants,
                              fundamental_unit_exact, kronecker_chi, list_fundamental_discriminants,
                              reduced_forms_definite, regulator, roots_of_unity, unit_norm)
from limitmult.io_cli import ScanConfig, execute_scan, run_scan
from limitmult.lattices import count_ball, first_minimum_exact, prime_ideal, principal_ideal, ring_of_integers
from limitmult.lfun import dirichlet_L
from limitmult.sigma import points_in_ball, threshold_disc, verify_inclusion
from limitmult.volumes import GroupKind

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


def test_1_orbital_oracle_equality(verdict):
    t0 = time.perf_counter()
    bad, checked = [], 0
    for p in (2, 3, 5, 7):
        for d in range(5):
            elems = bt.sample_unramified(p, d, 3)
            if len(elems) < 3:
                bad.append((p, d, "fewer than 3 elements"))
            want = bt.orbital_closed_form(p, d)
            for g in elems:
                checked += 1
                if g.local(p).kind != "unramified" or g.depth(p) != d:
                    bad.append((p, d, g.entries, "wrong local type"))
                n = bt.count_fixed_vertices(g, p, d + 1)
                if n != want:
                    bad.append((p, d, g.entries, n, want))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    verdict(1, ok, f"{checked} elements, {len(bad)} mismatches, {dt:.1f}s")
    assert not bad
    assert dt < 60


def test_2_class_number_cross_check(verdict):
    t0 = time.perf_counter()
    bad = []
    neg = list_fundamental_discriminants(-9999, -1, IMAGINARY)
    for D in neg:
        count = len(reduced_forms_definite(D))
        L1 = dirichlet_L(D, 1, 1e-9)
        h_formula = CertifiedReal.exact(roots_of_unity(D)) * CertifiedReal.exact(-D).sqrt() * L1 / (2 * cpi())
        if not abs(h_formula.value - count) + h_formula.abs_error < 0.5:
            bad.append(("formula", D, count, h_formula.value))
    pos = list_fundamental_discriminants(2, 4999, REAL)
    for D in pos:
        x, y, _ = fundamental_unit_exact(D)
        if x * x - D * y * y != 4 * unit_norm(D) or abs(unit_norm(D)) != 1:
            bad.append(("pell", D))
        lhs = regulator(D) * class_number(D)
        rhs = CertifiedReal.exact(D).sqrt() / 2 * dirichlet_L(D, 1, 1e-12)
        if abs(lhs.value - rhs.value) > 1e-6 * rhs.value:
            bad.append(("hR", D, lhs.value, rhs.value))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 300
    verdict(2, ok, f"{len(neg)} imaginary and {len(pos)} real fields, {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad[:5]
    assert dt < 300


def test_3_different_discriminant_identity(verdict):
    discs = list_fundamental_discriminants(-10 ** 5, -1, IMAGINARY) + list_fundamental_discriminants(2, 10 ** 5, REAL)
    bad = [D for D in discs if different_norm_product(D) != abs(D)]
    verdict(3, not bad, f"{len(discs)} fields, {len(bad)} failures")
    assert not bad, bad[:5]


@pytest.mark.slow
def test_4_residue_and_class_number_bounds(verdict):
    t0 = time.perf_counter()
    bad, n = [], 0
    for sig, lo, hi in ((IMAGINARY, -10 ** 5, -5), (REAL, 5, 10 ** 5)):
        for D in list_fundamental_discriminants(lo, hi, sig):
            n += 1
            absD = abs(D)
            logD = CertifiedReal.exact(absD).log()
            L1 = dirichlet_L(D, 1, 1e-9)
            # d = 2: (log|D|)^(d-1) = log|D|
            if not L1.le(logD):
                bad.append(("residue", D, L1.value, logD.value))
            h = class_number(D)
            if not CertifiedReal.exact(h).le(CertifiedReal.exact(absD).sqrt() * logD * 2):
                bad.append(("class_number", D, h))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    verdict(4, ok, f"{n} fields, {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad[:5]
    assert dt < 600


def _sample_lattices(n: int, seed: int = 20240917):
    # (field, ideal, scale) triples with free scales, both signatures
    rng = random.Random(seed)
    discs = [-3, -4, -7, -8, -11, -15, -20, -23, -24, -31, -47, -71, -84, -163,
             5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 40, 229]
    scales = [Fraction(1, 10), Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]
    radii = [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5)]
    out = []
    while len(out) < n:
        D = rng.choice(discs)
        k = 2 if D > 0 else 1
        scale = tuple(rng.choice(scales) for _ in range(k))
        kind = rng.choice(["ring", "prime", "principal"])
        if kind == "ring":
            L, name = ring_of_integers(D, scale), "O_F"
        elif kind == "prime":
            ps = [p for p in (2, 3, 5, 7, 11) if kronecker_chi(D, p) != -1]
            if not ps:
                continue
            p = rng.choice(ps)
            L, name = prime_ideal(D, p, scale), f"P|{p}"
        else:
            x = QuadInteger(rng.randint(-4, 4), rng.choice([-2, -1, 1, 2]), D)
            L, name = principal_ideal(x, scale), f"({x.a}+{x.b}w)"
        out.append((D, name, scale, rng.choice(radii), L))
    return out


def test_5_lattice_laws(verdict):
    samples = _sample_lattices(120)
    assert len(samples) >= 100
    fails = {"first_minimum": [], "emptiness": [], "count": []}
    for D, name, scale, R, L in samples:
        a = L.idele_norm
        lam = first_minimum_exact(L)
        # lambda_1 >= |a|^(1/d) with d = 2, squared to stay exact
        if not lam * lam >= a:
            fails["first_minimum"].append((D, name, scale))
        cnt = count_ball(L, R)
        R2 = R * R
        if a > R2 ** 2:
            if cnt != 0:
                fails["emptiness"].append((D, name, scale, R, cnt))
        elif not cnt <= (4 * R2) ** 2 / a:
            fails["count"].append((D, name, scale, R, cnt))
    ok = not any(fails.values())
    verdict(5, ok, f"{len(samples)} triples; failures: " + ", ".join(f"{k}={len(v)}" for k, v in fails.items()))
    assert ok, {k: v[:3] for k, v in fails.items()}


def test_6_sigma0_inclusion(verdict):
    R = 5
    D0 = threshold_disc(R)
    discs = list_fundamental_discriminants(-10 ** 4, -1, IMAGINARY) + list_fundamental_discriminants(2, 10 ** 4, REAL)
    bad = []
    for D in discs:
        rep = verify_inclusion(D, R)
        if not rep.passed or rep.bound.value > 51:
            bad.append(("report", D))
        if abs(D) > D0 and any(not isinstance(x, int) for x in points_in_ball(D, 0, R)):
            bad.append(("ball", D))
    ok = D0 <= 51 and not bad
    verdict(6, ok, f"D0(5) = {D0}, {len(discs)} fields, {len(bad)} failures")
    assert D0 <= 51
    assert not bad, bad[:5]


@pytest.mark.slow
def test_7_geometric_remainder_decay(verdict):
    t0 = time.perf_counter()
    cfg = ScanConfig(group=GroupKind.SL2, signature=IMAGINARY, dmin=-99999, dmax=-1000, R=5, rho=8, tol=1e-7)
    res = execute_scan(cfg)
    geo = [r for r in res.reports if r.label == "geom_remainder"]
    failed = [r.field_disc for r in geo if not r.passed]
    slope = res.fit[0] if res.fit else math.nan
    dt = time.perf_counter() - t0
    ok = res.error is None and geo and not failed and slope <= -1 / 3 and dt < 1800
    verdict(7, ok, f"{len(geo)} fields, C = {res.C:.6g}, {len(failed)} failures, slope = {slope:.4f}, {dt:.0f}s")
    assert res.error is None
    assert not failed, failed[:5]
    assert slope <= -1 / 3
    assert dt < 1800


def test_8_spectral_remainder_shape(verdict):
    discs = list_fundamental_discriminants(-10 ** 4, -5, IMAGINARY) + list_fundamental_discriminants(5, 10 ** 4, REAL)
    failed = {"SL2": [], "GL2": []}
    for g in (GroupKind.SL2, GroupKind.GL2):
        for D in discs:
            rep = spectral_remainder_bound(field_invariants(D), g, 0.05)
            if not rep.passed:
                failed[str(g)].append(D)
    ok = not failed["SL2"] and not failed["GL2"]
    verdict(8, ok, f"{len(discs)} fields per group; failures SL2={len(failed['SL2'])} GL2={len(failed['GL2'])}")
    assert ok, {k: v[:5] for k, v in failed.items()}


def test_9_determinism(verdict, tmp_path):
    outs = {}
    for jobs in (1, 8):
        out = tmp_path / f"jobs{jobs}"
        cfg = ScanConfig(dmin=-3000, dmax=-3, out=str(out), jobs=jobs)
        run_scan(cfg)
        outs[jobs] = ((out / "scan.csv").read_bytes(), (out / "scan.json").read_bytes())
    ok = outs[1] == outs[8] and len(outs[1][0]) > 0
    rows = outs[1][0].count(b"\n") - 1
    verdict(9, ok, f"{rows} CSV rows, byte-identical csv={outs[1][0] == outs[8][0]} json={outs[1][1] == outs[8][1]}")
    assert outs[1][0] == outs[8][0]
    assert outs[1][1] == outs[8][1]
    assert rows > 0
