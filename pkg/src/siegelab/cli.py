"""Command-line front end.

One experiment per invocation, batch style: parse flags, run, write CSV
and JSON artifacts, return a meaningful exit status.  Identical flags
always produce byte-identical files (no timestamps, repr float
formatting, config snapshot embedded in every artifact).

Exit codes: 0 success, 1 a check failed or too many rows flagged,
2 configuration error (bad flag, malformed angle, unknown family).
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

from . import __version__
from .angles import Angle, parse_angle
from .brjuno import brjuno_B, yoccoz_Y
from .capacity import conformal_radius_capacity
from .errors import SiegelabError
from .experiments import (
    ScanReport,
    _provenance,
    conjecture_scan,
    dstar_bounds_scan,
    fatou_check,
    harmonicity_check,
    lemma_scan,
    quadratic_angles,
)
from .families import (
    UNIVALENT_WHITELIST,
    binomial_conjugate_germ,
    dstar_germ,
    geyer_germ,
    mobius_conjugate_germ,
    quad_germ,
    semiconjugacy_residual,
    unicritical_boundary_germ,
    whitelist_germ,
)
from .series import hadamard_radius, linearize
from . import tolerances


def build_family(desc: str, theta: Angle, N: Optional[int], bits: Optional[int]):
    """Construct a germ from a family descriptor string."""
    b = bits if bits is not None else 53
    if desc == "quad":
        return quad_germ(theta, b)
    if desc in UNIVALENT_WHITELIST:
        return whitelist_germ(desc, theta, N=N if N else 512, bits=b)
    head, _, arg = desc.partition(":")
    if head == "unicritical" and arg:
        return unicritical_boundary_germ(int(arg), theta, b)[0]
    if head == "geyer" and arg:
        return geyer_germ(int(arg), theta, b)
    if head == "dstar" and arg:
        return dstar_germ(int(arg), theta, b)
    if head == "conjugate" and arg == "geom":
        return mobius_conjugate_germ(theta, N if N else 512, b)
    if head == "conjugate" and arg == "expm1":
        return binomial_conjugate_germ(theta, N if N else 128, b)
    raise ValueError(
        f"unknown family {desc!r}; expected quad, linear, geometric, cubic, "
        "unicritical:d, geyer:d, dstar:d, conjugate:geom, conjugate:expm1"
    )


def _emit(report: ScanReport, out: Optional[str]) -> None:
    """Write PREFIX.csv and PREFIX.json, or CSV to stdout when out is None."""
    if out is None:
        import tempfile, os
        # route through the same writer so stdout matches file bytes
        with tempfile.NamedTemporaryFile("r", suffix=".csv", delete=False) as fh:
            tmp = fh.name
        try:
            report.to_csv(tmp)
            with open(tmp) as fh:
                sys.stdout.write(fh.read())
        finally:
            os.unlink(tmp)
        return
    report.to_csv(out + ".csv")
    report.to_json(out + ".json")


def _parse_thetas(values) -> list:
    if not values:
        raise ValueError("at least one --theta is required")
    return [parse_angle(v) for v in values]


def _cmd_brjuno(args) -> int:
    thetas = _parse_thetas(args.theta)
    config = {"subcommand": "brjuno", "depth": args.depth,
              "thetas": [t.describe() for t in thetas]}
    rows = []
    for t in thetas:
        y = yoccoz_Y(t, args.depth)
        b = brjuno_B(t, args.depth)
        if y.status == "finite":
            diff = abs(float(b.value) - float(y.value))
            rows.append({"theta": t.describe(), "Y": float(y.value),
                         "Y_tail": float(y.tail_bound), "B": float(b.value),
                         "abs_B_minus_Y": diff, "flags": ""})
        else:
            rows.append({"theta": t.describe(), "Y": math.inf, "Y_tail": 0.0,
                         "B": math.inf, "abs_B_minus_Y": math.nan,
                         "flags": "Y-" + y.status})
    finite = [r["abs_B_minus_Y"] for r in rows if r["flags"] == ""]
    summary = {"n_rows": len(rows),
               "max_abs_B_minus_Y": max(finite) if finite else math.nan}
    _emit(ScanReport("brjuno", rows, summary, _provenance(config)), args.out)
    return 0


def _cmd_linearize(args) -> int:
    thetas = _parse_thetas(args.theta)
    t = thetas[0]
    f = build_family(args.family, t, args.N, args.bits)
    L = linearize(f, N=args.N, bits=args.bits)
    config = {"subcommand": "linearize", "theta": t.describe(),
              "family": args.family, "N": L.N, "bits": L.bits}
    rows = [{"n": n, "re_b": re, "im_b": im, "log_abs_b": la, "divisor": dv,
             "flags": ""}
            for (n, re, im, la, dv) in L.rows()]
    summary = {"N": L.N, "bits": L.bits, "scale": L.scale,
               "retries": L.retries, "valid": L.valid_count()}
    _emit(ScanReport("linearize", rows, summary, _provenance(config)), args.out)
    return 0


def _cmd_radius(args) -> int:
    thetas = _parse_thetas(args.theta)
    t = thetas[0]
    f = build_family(args.family, t, args.N, args.bits)
    L = linearize(f, N=args.N, bits=args.bits)
    est = hadamard_radius(L)
    config = {"subcommand": "radius", "theta": t.describe(),
              "family": args.family, "N": L.N, "bits": L.bits}
    rows = [{"value": est.value, "uncertainty": est.uncertainty,
             "slope_value": est.slope_value, "window_lo": est.window[0],
             "window_hi": est.window[1], "infinite": est.infinite,
             "flags": ""}]
    summary = {"value": est.value, "uncertainty": est.uncertainty,
               "infinite": est.infinite}
    _emit(ScanReport("radius", rows, summary, _provenance(config)), args.out)
    return 0


def _cmd_capacity(args) -> int:
    thetas = _parse_thetas(args.theta)
    t = thetas[0]
    count = args.samples if args.samples else 4096
    est = conformal_radius_capacity(t, count=count, n=min(1024, count // 2))
    config = {"subcommand": "capacity", "theta": t.describe(),
              "samples": count}
    rows = [{"conformal_radius": est.conformal_radius,
             "transfinite_diameter": est.transfinite_diameter,
             "energy": est.energy, "n_points": est.n_points_used,
             "flags": ""}]
    summary = {"conformal_radius": est.conformal_radius,
               "n_points": est.n_points_used}
    _emit(ScanReport("capacity", rows, summary, _provenance(config)), args.out)
    return 0


def _cmd_scan_conjecture(args) -> int:
    thetas = ([parse_angle(v) for v in args.theta] if args.theta
              else quadratic_angles(args.samples, seed=args.seed))
    rep = conjecture_scan(thetas, N=args.N if args.N else 4096,
                          bits=args.bits, depth=args.depth)
    _emit(rep, args.out)
    if rep.summary["n_flagged"] > 0.1 * rep.summary["n_rows"]:
        return 1
    return 0


def _cmd_check_harmonic(args) -> int:
    thetas = _parse_thetas(args.theta)
    f = build_family(args.family, thetas[0], args.N, args.bits)
    radii = [float(x) for x in args.radii.split(",")] if args.radii else [11.0, 12.0, 15.0]
    rep = harmonicity_check(f, radii, M=args.M, N=args.N, bits=args.bits)
    _emit(rep, args.out)
    return 0 if rep.summary["passed"] else 1


def _cmd_check_fatou(args) -> int:
    thetas = _parse_thetas(args.theta)
    f = build_family(args.family, thetas[0], args.N, args.bits)
    r = float(args.radii.split(",")[0]) if args.radii else 11.0
    rep = fatou_check(f, r=r, M=args.M, N=args.N, bits=args.bits)
    _emit(rep, args.out)
    return 0 if rep.summary["passed"] else 1


def _cmd_check_lemma(args) -> int:
    thetas = ([parse_angle(v) for v in args.theta] if args.theta
              else quadratic_angles(args.samples, seed=args.seed))
    rep = lemma_scan(thetas, range(2, args.M + 1), depth=args.depth)
    _emit(rep, args.out)
    return 0 if rep.summary["violations"] == 0 else 1


def _cmd_scan_dstar(args) -> int:
    head, _, arg = (args.family or "dstar:3").partition(":")
    if head != "dstar" or not arg:
        raise ValueError("scan-dstar needs --family dstar:d")
    d = int(arg)
    thetas = ([parse_angle(v) for v in args.theta] if args.theta
              else quadratic_angles(args.samples, seed=args.seed))
    rep = dstar_bounds_scan(d, thetas, N=args.N, bits=args.bits,
                            depth=args.depth)
    _emit(rep, args.out)
    s = rep.summary
    bad = (s["n_flagged"] > 0.1 * s["n_rows"]
           or (math.isfinite(s["geyer_max_dev"])
               and s["geyer_max_dev"] > tolerances.GEYER_RATIO_TOL))
    return 1 if bad else 0


def _cmd_semiconj(args) -> int:
    head, _, arg = (args.family or "dstar:3").partition(":")
    if head != "dstar" or not arg:
        raise ValueError("semiconj needs --family dstar:d")
    d = int(arg)
    thetas = _parse_thetas(args.theta)
    t = thetas[0]
    N = args.N if args.N else 64
    res = semiconjugacy_residual(d, t, N=N)
    ctrl = semiconjugacy_residual(d, t, N=N, wrong_multiplier=True)
    config = {"subcommand": "semiconj", "theta": t.describe(), "d": d, "N": N}
    rows = [{"residual": res, "control_residual": ctrl, "flags": ""}]
    summary = {"residual": res, "control_residual": ctrl,
               "passed": bool(res < tolerances.SEMICONJ_TOL
                              and ctrl > tolerances.SEMICONJ_CONTROL_MIN)}
    _emit(ScanReport("semiconj", rows, summary, _provenance(config)), args.out)
    return 0 if summary["passed"] else 1


_COMMANDS = {
    "brjuno": _cmd_brjuno,
    "linearize": _cmd_linearize,
    "radius": _cmd_radius,
    "capacity": _cmd_capacity,
    "scan-conjecture": _cmd_scan_conjecture,
    "check-harmonic": _cmd_check_harmonic,
    "check-fatou": _cmd_check_fatou,
    "check-lemma": _cmd_check_lemma,
    "scan-dstar": _cmd_scan_dstar,
    "semiconj": _cmd_semiconj,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="siegelab",
        description="Siegel-disk numerics: arithmetic sums, linearizations, "
                    "radius estimates, and scan experiments.",
    )
    p.add_argument("--version", action="version", version=f"siegelab {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        q = sub.add_parser(name)
        q.add_argument("--theta", action="append",
                       help="angle: p/q, quad:u,v,D,w, or a decimal (repeatable)")
        q.add_argument("--family", default="quad")
        q.add_argument("--N", type=int, default=None)
        q.add_argument("--bits", type=int, default=None)
        q.add_argument("--depth", type=int, default=64)
        q.add_argument("--M", type=int, default=64,
                       help="quadrature nodes, or the largest multiplier for check-lemma")
        q.add_argument("--radii", default=None,
                       help="comma-separated radii (first one used where a single r applies)")
        q.add_argument("--out", default=None,
                       help="output prefix; writes PREFIX.csv and PREFIX.json")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--samples", type=int, default=50)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except (SiegelabError, ValueError) as exc:
        print(f"siegelab: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
