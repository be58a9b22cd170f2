"""Field-table ingestion, scan orchestration, report emission and the command line."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .bounds import (HarnessConfig, RemainderParts, calibrate_constant, class_number_bound_check, decay_fit,
                     elliptic_contribution, field_sigma, geometric_remainder, quartic_residue, reg_split_bound,
                     remainder_parts, residue_bound_check, spectral_remainder_bound, truncation_threshold,
                     unip_bound)
from .errors import ConfigError, DomainError, HarnessError, IngestError, InternalConsistencyError
from .fields import IMAGINARY, Signature, different_norm_product, field_invariants, list_fundamental_discriminants
from .lattices import min_nonrational_norm_sq
from .reports import BoundReport, make_report
from .sigma import REG_ELL, REG_SPLIT, sigma0_set, sigma0_to_json, verify_inclusion
from .volumes import GroupKind, quot_meas_check, volume_pack

log = logging.getLogger("limitmult")

CSV_COLUMNS = ("disc", "group", "check_label", "computed", "error", "bound", "ratio", "pass")


# ---------------------------------------------------------------- ingestion

@dataclass(frozen=True)
class IngestedField:
    label: str
    degree: int
    disc: int
    signature: tuple[int, int]
    h: int
    R: float
    w: int
    source: str = ""

    def problems(self) -> list[str]:
        out = []
        r1, r2 = self.signature
        if self.degree != r1 + 2 * r2:
            out.append(f"degree {self.degree} != r1 + 2 r2 = {r1 + 2 * r2}")
        if self.h < 1:
            out.append("h must be at least 1")
        if self.w < 1:
            out.append("w must be at least 1")
        if (self.degree > 2 or r2 == 0) and not self.R > 0:
            out.append("R must be positive")
        if self.disc == 0:
            out.append("disc must be nonzero")
        return out


_FIELDS = {"label": str, "degree": int, "disc": int, "signature": list, "h": int, "R": (int, float), "w": int}


def _parse_record(obj, lineno: int) -> IngestedField:
    if not isinstance(obj, dict):
        raise IngestError(f"line {lineno}: expected a JSON object")
    for k, t in _FIELDS.items():
        if k not in obj:
            raise IngestError(f"line {lineno}: missing key {k!r}")
        if not isinstance(obj[k], t) or isinstance(obj[k], bool):
            raise IngestError(f"line {lineno}: key {k!r} has the wrong type")
    sig = obj["signature"]
    if len(sig) != 2 or not all(isinstance(x, int) for x in sig):
        raise IngestError(f"line {lineno}: signature must be [r1, r2]")
    return IngestedField(obj["label"], obj["degree"], obj["disc"], (sig[0], sig[1]), obj["h"],
                         float(obj["R"]), obj["w"], str(obj.get("source", "")))


def ingest_field_table(path, rejected: list | None = None) -> list[IngestedField]:
    """Parse a JSON-lines field table.

    Malformed lines raise IngestError with the line number. Records that
    violate an invariant are logged, appended to ``rejected`` as
    (line, label, reasons) and skipped. Later duplicates of a label are dropped.
    """
    out: list[IngestedField] = []
    seen: set[str] = set()
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise IngestError(f"cannot read {path}: {e}") from e
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise IngestError(f"line {lineno}: {e.msg}") from e
        rec = _parse_record(obj, lineno)
        bad = rec.problems()
        if bad:
            log.warning("line %d: rejected %s: %s", lineno, rec.label, "; ".join(bad))
            if rejected is not None:
                rejected.append((lineno, rec.label, bad))
            continue
        if rec.label in seen:
            log.warning("line %d: duplicate label %s dropped", lineno, rec.label)
            continue
        seen.add(rec.label)
        out.append(rec)
    return out


# ---------------------------------------------------------------- scan

@dataclass(frozen=True)
class ScanConfig:
    group: GroupKind = GroupKind.SL2
    signature: Signature = IMAGINARY
    dmin: int = -50
    dmax: int = -3
    R: float = 5.0
    rho: float = 8.0
    tol: float = 1e-9
    out: str | None = None
    jobs: int = 1
    calibrate_n: int = 10
    harness: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.group, GroupKind):
            object.__setattr__(self, "group", GroupKind.parse(str(self.group)))
        if self.dmin > self.dmax:
            raise ConfigError("dmin must not exceed dmax")
        if not self.R > 0:
            raise ConfigError("R must be positive")
        if not self.rho > 0:
            raise ConfigError("rho must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.signature.d != 2:
            raise ConfigError("only quadratic signatures are scanned")
        if self.calibrate_n < 1:
            raise ConfigError("calibrate_n must be at least 1")

    def harness_config(self) -> HarnessConfig:
        return HarnessConfig(R=self.R, rho=self.rho, **self.harness)

    def metadata(self) -> dict:
        return {"group": str(self.group), "signature": [self.signature.r1, self.signature.r2],
                "dmin": self.dmin, "dmax": self.dmax, "R": self.R, "rho": self.rho, "tol": self.tol,
                "calibrate_n": self.calibrate_n, "harness": asdict(self.harness_config())}


@dataclass(frozen=True)
class FieldResult:
    D: int
    reports: tuple[BoundReport, ...]
    parts: RemainderParts | None
    # min ||x|| over O_F minus Z, divided by |D|^(1/2)
    growth: float = math.nan
    regulator: float | None = None


def _different_check(D: int) -> BoundReport:
    prod = different_norm_product(D)
    return make_report("different", prod, abs(D), D, conditions=(("equality", prod == abs(D)),))


def scan_field(D: int, cfg: ScanConfig) -> FieldResult:
    """Every per-field report; the geometric remainder is assembled after calibration."""
    g = cfg.group
    hc = cfg.harness_config()
    inv = field_invariants(D, cfg.tol)
    reports = [
        _different_check(D),
        residue_bound_check(inv),
        class_number_bound_check(inv),
        quot_meas_check(g, inv),
        quot_meas_check(g, inv, Fraction(1)),
        spectral_remainder_bound(inv, g, hc.eps),
        verify_inclusion(D, cfg.R),
    ]
    parts = None
    if inv.absD >= 5:
        T = truncation_threshold(inv, cfg.rho)
        polys = field_sigma(inv, g, hc)
        parts = remainder_parts(inv, T, g, hc, polys)
        reports += [parts.elliptic, parts.split, parts.unip]
    growth = math.sqrt(float(min_nonrational_norm_sq(D) / inv.absD))
    return FieldResult(D, tuple(reports), parts, growth, inv.R if D > 0 else None)


def _scan_one(args):
    D, cfg = args
    try:
        return scan_field(D, cfg), None
    except InternalConsistencyError as e:
        return None, f"field D={D}: {e}"


def _sort_key(r: BoundReport):
    return (abs(r.field_disc), r.field_disc, r.label)


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _pass_text(r: BoundReport) -> str:
    p = r.passed
    return "n/a" if p is None else ("true" if p else "false")


def reports_to_csv(reports: list[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([r.field_disc, r.group, r.label, _fmt(r.computed.value), _fmt(r.computed.abs_error),
                    _fmt(r.bound.value), _fmt(r.ratio), _pass_text(r)])
    return buf.getvalue()


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def report_to_json(r: BoundReport) -> dict:
    return _json_safe({
        "disc": r.field_disc, "group": r.group, "check_label": r.label,
        "computed": r.computed.value, "computed_error": r.computed.abs_error,
        "bound": r.bound.value, "bound_error": r.bound.abs_error, "ratio": r.ratio,
        "pass": r.passed, "status": r.status, "experimental": r.experimental,
        "conditions": [[n, ok] for n, ok in r.conditions], "notes": r.notes,
    })


@dataclass
class ScanResult:
    exit_code: int
    reports: list[BoundReport]
    C: float | None = None
    fit: tuple[float, float] | None = None
    error: str | None = None
    csv_text: str = ""
    json_text: str = ""

    def failures(self) -> list[BoundReport]:
        return [r for r in self.reports if r.counts_for_exit and r.passed is False]


def _calibrate(results: list[FieldResult], n: int) -> tuple[float | None, list[BoundReport]]:
    parts = [fr.parts for fr in results if fr.parts is not None]
    if not parts:
        return None, []
    C = calibrate_constant(parts, n)
    calib = {p.D for p in sorted(parts, key=lambda p: (abs(p.D), p.D))[:n]}
    return C, [geometric_remainder(p, C, p.D in calib) for p in parts]


def empirical_constants(results: list[FieldResult]) -> dict:
    """Scan-wide minima reported instead of unnamed absolute constants.

    min_regulator: smallest regulator among real fields (none for imaginary scans).
    min_growth: smallest min_nonrational_norm(D) / |D|^(1/2).
    """
    regs = [(fr.regulator, fr.D) for fr in results if fr.regulator is not None]
    grow = [(fr.growth, fr.D) for fr in results]
    out: dict = {"min_regulator": None, "min_regulator_disc": None, "min_growth": None, "min_growth_disc": None}
    if regs:
        out["min_regulator"], out["min_regulator_disc"] = min(regs)
    if grow:
        out["min_growth"], out["min_growth_disc"] = min(grow)
    return out


def execute_scan(cfg: ScanConfig) -> ScanResult:
    """Run every field of the configured range and assemble the sorted report list."""
    discs = list_fundamental_discriminants(cfg.dmin, cfg.dmax, cfg.signature)
    work = [(D, cfg) for D in discs]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            outs = list(ex.map(_scan_one, work, chunksize=max(1, len(work) // (4 * cfg.jobs))))
    else:
        outs = [_scan_one(w) for w in work]
    errors = [e for _, e in outs if e]
    if errors:
        return ScanResult(1, [], error=errors[0])
    results = sorted((fr for fr, _ in outs), key=lambda fr: (abs(fr.D), fr.D))
    C, geo = _calibrate(results, cfg.calibrate_n)
    reports = [r for fr in results for r in fr.reports] + geo
    reports.sort(key=_sort_key)
    fit = None
    if geo:
        try:
            fit = decay_fit(geo)
        except DomainError:
            fit = None
    res = ScanResult(0, reports, C, fit)
    res.exit_code = 1 if res.failures() else 0
    res.csv_text = reports_to_csv(reports)
    doc = {"config": cfg.metadata(), "calibration": {"C": C}, "fields": len(results),
           "decay_fit": None if fit is None else {"slope": fit[0], "intercept": fit[1]},
           "empirical": empirical_constants(results),
           "exit_code": res.exit_code, "reports": [report_to_json(r) for r in reports]}
    res.json_text = json.dumps(_json_safe(doc), sort_keys=True, indent=1) + "\n"
    return res


def run_scan(cfg: ScanConfig) -> int:
    """Scan, write scan.csv and scan.json under cfg.out, return the exit code."""
    try:
        res = execute_scan(cfg)
    except (OSError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if res.error:
        print(f"internal consistency failure: {res.error}", file=sys.stderr)
        return 1
    if cfg.out:
        try:
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "scan.csv").write_text(res.csv_text)
            (out / "scan.json").write_text(res.json_text)
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    for r in res.failures():
        print(f"FAIL D={r.field_disc} {r.label}: {r.computed.value:.6g} > {r.bound.value:.6g}", file=sys.stderr)
    return res.exit_code


# ---------------------------------------------------------------- command line

def _print_reports(reports) -> None:
    sys.stdout.write(reports_to_csv(list(reports)))


def _cmd_scan(a) -> int:
    cfg = ScanConfig(group=GroupKind.parse(a.group), signature=Signature.parse(a.signature), dmin=a.dmin,
                     dmax=a.dmax, R=a.radius, rho=a.rho, tol=a.tol, out=a.out, jobs=a.jobs)
    if a.out:
        return run_scan(cfg)
    res = execute_scan(cfg)
    if res.error:
        print(f"internal consistency failure: {res.error}", file=sys.stderr)
        return 1
    sys.stdout.write(res.csv_text)
    return res.exit_code


def _cmd_field(a) -> int:
    inv = field_invariants(a.D, a.tol)
    g = GroupKind.parse(a.group)
    vp = volume_pack(g, inv)
    doc = {"D": inv.D, "signature": [inv.signature.r1, inv.signature.r2], "h": inv.h, "R": inv.R, "w": inv.w,
           "L1": [inv.L1.value, inv.L1.abs_error], "zeta2": [inv.zeta2.value, inv.zeta2.abs_error],
           "group": str(g), "vol_quotient": vp.vol_quotient.value, "vol_Kf": str(vp.vol_Kf), "nu": vp.nu.value,
           "different_norm_product": different_norm_product(inv.D)}
    print(json.dumps(doc, sort_keys=True, indent=1))
    return 0


def _cmd_orbital(a) -> int:
    from . import bt_orbital as bt

    depth = a.depth if a.depth is not None else a.d + 4
    if a.ramified:
        elems = [bt.ramified_element(a.p, a.d)]
    else:
        elems = bt.sample_unramified(a.p, a.d, a.count)
    closed = bt.orbital_closed_form(a.p, a.d, a.ramified)
    ok = True
    for g in elems:
        n = bt.count_fixed_vertices(g, a.p, depth, a.group)
        good = n <= closed if a.group == "SL2" else n == closed
        ok &= good
        print(f"{g.entries} count={n} closed_form={closed} {'ok' if good else 'MISMATCH'}")
    if a.dot:
        Path(a.dot).write_text(bt.fixed_subtree_dot(elems[0], a.p, depth))
    return 0 if ok else 1


def _cmd_lattice(a) -> int:
    from . import lattices as lat

    L = lat.ring_of_integers(a.D, lat._one_scale(a.D, Fraction(a.scale)))
    rep = lat.check_point_count_bounds(L, Fraction(a.R))
    print(json.dumps(report_to_json(rep), sort_keys=True, indent=1))
    return 0 if rep.passed else 1


def _cmd_sigma0(a) -> int:
    g = GroupKind.parse(a.group)
    sig = Signature.parse(a.signature)
    polys = sigma0_set(a.R, g, sig)
    text = sigma0_to_json(polys, a.R, g, sig)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bounds(a) -> int:
    g = GroupKind.parse(a.group)
    hc = HarnessConfig(R=a.radius, rho=a.rho)
    inv = field_invariants(a.D, a.tol)
    reps = [residue_bound_check(inv), class_number_bound_check(inv), quot_meas_check(g, inv),
            spectral_remainder_bound(inv, g, hc.eps)]
    if inv.absD >= 5:
        T = truncation_threshold(inv, a.rho)
        polys = field_sigma(inv, g, hc)
        reps += [elliptic_contribution(inv, g, hc, [p for p in polys if p.kind == REG_ELL]),
                 reg_split_bound(inv, T, [p for p in polys if p.kind == REG_SPLIT], g, hc),
                 unip_bound(inv, T, g, a.radius, hc)]
    _print_reports(reps)
    return 1 if any(r.counts_for_exit and r.passed is False for r in reps) else 0


def _cmd_ingest(a) -> int:
    rejected: list = []
    recs = ingest_field_table(a.path, rejected)
    for r in recs:
        res = quartic_residue(r)
        print(f"{r.label} degree={r.degree} disc={r.disc} residue={res.value:.12g}")
    for lineno, label, why in rejected:
        print(f"rejected line {lineno} {label}: {'; '.join(why)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="limitmult", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, group=True, radius=True):
        if group:
            sp.add_argument("--group", default="SL2", choices=["SL2", "GL2", "sl2", "gl2"])
        if radius:
            sp.add_argument("--radius", type=float, default=5.0)
        sp.add_argument("--rho", type=float, default=8.0)
        sp.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("scan", help="scan a discriminant range and write CSV/JSON reports")
    common(s)
    s.add_argument("--signature", default="0,1")
    s.add_argument("--dmin", type=int, default=-50)
    s.add_argument("--dmax", type=int, default=-3)
    s.add_argument("--out", default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=_cmd_scan)

    s = sub.add_parser("field", help="invariants and volumes of one field")
    s.add_argument("D", type=int)
    s.add_argument("--group", default="SL2")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=_cmd_field)

    s = sub.add_parser("orbital", help="fixed-vertex counts against the closed form")
    s.add_argument("p", type=int)
    s.add_argument("d", type=int)
    s.add_argument("--ramified", action="store_true")
    s.add_argument("--depth", type=int, default=None)
    s.add_argument("--count", type=int, default=3)
    s.add_argument("--group", default="GL2", choices=["GL2", "SL2"])
    s.add_argument("--dot", default=None, help="write the fixed subtree in dot format")
    s.set_defaults(func=_cmd_orbital)

    s = sub.add_parser("lattice", help="first minimum and ball count of a scaled O_F")
    s.add_argument("D", type=int)
    s.add_argument("R", type=str)
    s.add_argument("--scale", type=str, default="1")
    s.set_defaults(func=_cmd_lattice)

    s = sub.add_parser("sigma0", help="the finite coefficient set as JSON")
    s.add_argument("R", type=float)
    s.add_argument("--group", default="SL2")
    s.add_argument("--signature", default="0,1")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_sigma0)

    s = sub.add_parser("bounds", help="bound reports for one field")
    s.add_argument("D", type=int)
    common(s)
    s.set_defaults(func=_cmd_bounds)

    s = sub.add_parser("ingest", help="validate a JSON-lines field table")
    s.add_argument("path")
    s.set_defaults(func=_cmd_ingest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, IngestError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except HarnessError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
