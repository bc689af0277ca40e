"""Desk-scale experiment drivers.

Each driver returns a ScanReport: plain rows, a summary recomputable from
those rows, and a provenance block (config snapshot plus its sha256) so a
rerun with the same config is byte-identical.  The experiments themselves
tie the arithmetic side (Yoccoz and Brjuno sums) to the analytic side
(radius estimates) and check the identities that make the two comparable:
the Y + log R band over quadratic angles, circle averages of perturbed
germs versus the unperturbed quadratic, the averaging inequality for
univalent germs, the z + z^d two-sided bounds, and the multiplication gap.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import __version__
from .angles import Angle, frac, mul_mod1
from .brjuno import brjuno_B, yoccoz_Y
from .errors import PrecisionExhausted, Resonance, TooFewCoefficients
from .families import (
    CONSTANTS,
    UNIVALENT_WHITELIST,
    GermSeries,
    dstar_germ,
    geyer_germ,
    perturbed,
    quad_germ,
    rescale,
)
from .series import hadamard_radius, linearize

SCHEMA_VERSION = 1


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _provenance(config: dict) -> dict:
    digest = hashlib.sha256(_canonical(config).encode("ascii")).hexdigest()
    return {"config": config, "config_sha256": digest, "version": __version__}


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ScanReport:
    """Rows + derived summary + provenance for one experiment run."""

    kind: str
    rows: list
    summary: dict
    provenance: dict

    @property
    def config(self) -> dict:
        return self.provenance["config"]

    def flag_counts(self) -> dict:
        counts: dict = {}
        for r in self.rows:
            fl = r.get("flags", "")
            if fl:
                counts[fl] = counts.get(fl, 0) + 1
        return counts

    def to_csv(self, path: str) -> None:
        # config snapshot rides along as a comment so the file is self-describing
        lines = ["# config " + _canonical(self.config)]
        if self.rows:
            keys = list(self.rows[0].keys())
            lines.append(",".join(keys))
            for r in self.rows:
                lines.append(",".join(_cell(r[k]) for k in keys))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_json(self, path: str) -> None:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "config": self.config,
            "config_sha256": self.provenance["config_sha256"],
            "version": self.provenance["version"],
            "summary": self.summary,
            "row_count": len(self.rows),
            "flags": self.flag_counts(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")


def quadratic_angles(count: int, seed: int = 0, max_period: int = 8,
                     max_quotient: int = 12) -> list:
    """Random quadratic irrationals with purely periodic partial quotients.

    Exact surd arithmetic keeps deep Gauss orbits honest, which a float
    theta cannot; periods <= 8 and quotients <= 12 keep the sums fast.
    Deterministic for a given seed; duplicates are redrawn.
    """
    rng = random.Random(seed)
    out: list = []
    seen = set()
    while len(out) < count:
        period = rng.randint(1, max_period)
        quots = [rng.randint(1, max_quotient) for _ in range(period)]
        m00, m01, m10, m11 = 1, 0, 0, 1
        for a in quots:
            m00, m01 = m01, m00 + a * m01
            m10, m11 = m11, m10 + a * m11
        b = m11 - m00
        disc = b * b + 4 * m10 * m01
        th = Angle.quadratic(-b, 1, disc, 2 * m10)
        if th in seen:
            continue
        seen.add(th)
        out.append(th)
    return out


def _log_radius(f: GermSeries, N, bits):
    """(log |R-hat|, uncertainty, diagnostics) for one germ."""
    L = linearize(f, N=N, bits=bits)
    est = hadamard_radius(L)
    diag = {
        "valid": L.valid_count(),
        "retries": L.retries,
        "window": est.window,
        "infinite": est.infinite,
    }
    return est.log_value, est.uncertainty, diag


def conjecture_scan(theta_set: Sequence, N: int = 4096, bits: Optional[int] = None,
                    depth: int = 64) -> ScanReport:
    """Per-angle Y, B, log R-hat of lambda z + z^2, and S = Y + log R-hat.

    The interesting output is the empirical band [min S, max S]: boundedness
    of S over quadratic angles is the statement under test.  Rational input
    rows are flagged (Y infinite, no radius attempted), never dropped.
    """
    config = {
        "experiment": "conjecture_scan",
        "N": N,
        "bits": bits if bits is not None else 53,
        "depth": depth,
        "thetas": [t.describe() for t in theta_set],
    }
    rows = []
    for t in theta_set:
        desc = t.describe()
        if frac(t).kind == "rational":
            rows.append({
                "theta": desc, "family": "quad", "Y": math.inf, "Y_tail": 0.0,
                "B": math.inf, "log_R": math.nan, "R_unc": math.nan,
                "S": math.nan, "valid": 0, "flags": "rational-infinite-Y",
            })
            continue
        yv = yoccoz_Y(t, depth)
        bv = brjuno_B(t, depth)
        flags = ""
        if yv.status != "finite":
            flags = "Y-" + yv.status
        y = float(yv.value) if yv.status == "finite" else math.inf
        try:
            log_r, unc, diag = _log_radius(quad_germ(t), N, bits)
            valid = diag["valid"]
        except (Resonance, PrecisionExhausted, TooFewCoefficients) as exc:
            log_r, unc, valid = math.nan, math.nan, 0
            flags = (flags + ";" if flags else "") + type(exc).__name__
        s = y + log_r if flags == "" else math.nan
        rows.append({
            "theta": desc, "family": "quad", "Y": y,
            "Y_tail": float(yv.tail_bound), "B": float(bv.value),
            "log_R": log_r, "R_unc": unc, "S": s, "valid": valid,
            "flags": flags,
        })
    good = [r["S"] for r in rows if r["flags"] == "" and math.isfinite(r["S"])]
    summary = {
        "n_rows": len(rows),
        "n_flagged": sum(1 for r in rows if r["flags"]),
        "S_min": min(good) if good else math.nan,
        "S_max": max(good) if good else math.nan,
        "S_band": (max(good) - min(good)) if good else math.nan,
        "max_R_unc": max((r["R_unc"] for r in rows if r["flags"] == ""),
                         default=math.nan),
    }
    return ScanReport("conjecture_scan", rows, summary, _provenance(config))


@dataclass
class CircleAverage:
    """Mean of log R-hat(f + a z^2) over one circle |a| = r.

    Equispaced nodes make the plain mean a trapezoid rule, spectrally
    accurate for this periodic integrand.  The uncertainty is the mean of
    the per-node estimator discrepancies, kept additive (not / sqrt(M))
    because those errors are systematic, not independent.
    """

    value: float
    uncertainty: float
    r: float
    M: int
    flagged: int
    node_logs: list = field(default_factory=list)
    node_uncs: list = field(default_factory=list)


def circle_average(f: GermSeries, r: float, M: int = 64, N: Optional[int] = None,
                   bits: Optional[int] = None) -> CircleAverage:
    """Average log R-hat(perturbed(f, a)) over M equispaced a with |a| = r.

    Each node is computed on the rescaled germ (coefficients near the
    quadratic's, no overflow risk) and shifted back by log |a|; the radius
    estimator is exactly covariant under that rescale, so the shift is an
    identity, not an approximation.  Fails if more than 10% of nodes flag.
    """
    if M < 16:
        raise ValueError("need M >= 16 quadrature nodes")
    if not (r > 0):
        raise ValueError("radius must be positive")
    node_logs: list = []
    node_uncs: list = []
    flagged = 0
    for j in range(M):
        a = cmath.rect(r, 2.0 * math.pi * j / M)
        try:
            ga = rescale(perturbed(f, a), a)
            log_rg, unc, diag = _log_radius(ga, N, bits)
            if diag["infinite"]:
                raise TooFewCoefficients("infinite radius at a perturbed node")
            node_logs.append(log_rg - math.log(abs(a)))
            node_uncs.append(unc)
        except (Resonance, PrecisionExhausted, TooFewCoefficients):
            flagged += 1
            node_logs.append(None)
            node_uncs.append(None)
    if flagged > 0.1 * M:
        raise PrecisionExhausted(f"{flagged} of {M} circle nodes failed")
    vals = [v for v in node_logs if v is not None]
    uncs = [u for u in node_uncs if u is not None]
    return CircleAverage(
        value=sum(vals) / len(vals),
        uncertainty=sum(uncs) / len(uncs),
        r=r, M=M, flagged=flagged,
        node_logs=node_logs, node_uncs=node_uncs,
    )


def harmonicity_check(f: GermSeries, radii: Sequence, M: int = 64,
                      N: Optional[int] = None, bits: Optional[int] = None) -> ScanReport:
    """Profile of Delta(r) = circle_average(f, r) + log r - log R-hat(quad).

    The mean-value identity says Delta vanishes for every r outside the
    radius where the perturbed family stays quadratic-like; numerically it
    should be zero within the combined estimator uncertainty and flat in r.
    """
    radii = [float(r) for r in radii]
    low = [r for r in radii if r <= CONSTANTS.outer_radius]
    if low:
        raise ValueError(
            f"radii {low} not allowed: averages need |a| > {CONSTANTS.outer_radius}"
        )
    ref_log, ref_unc, _ = _log_radius(quad_germ(f.theta, f.bits), N, bits)
    config = {
        "experiment": "harmonicity_check",
        "theta": f.theta.describe(),
        "family": f.source,
        "radii": radii, "M": M,
        "N": N if N is not None else 0,
        "bits": bits if bits is not None else 53,
    }
    rows = []
    for r in radii:
        ca = circle_average(f, r, M=M, N=N, bits=bits)
        delta = ca.value + math.log(r) - ref_log
        combined = ca.uncertainty + ref_unc
        rows.append({
            "r": r, "average": ca.value, "delta": delta,
            "combined_unc": combined, "flagged_nodes": ca.flagged,
            "flags": "",
        })
    deltas = [row["delta"] for row in rows]
    hi = max(range(len(rows)), key=lambda i: deltas[i])
    lo = min(range(len(rows)), key=lambda i: deltas[i])
    flat_spread = deltas[hi] - deltas[lo]
    flat_budget = rows[hi]["combined_unc"] + rows[lo]["combined_unc"]
    summary = {
        "reference_log_R": ref_log,
        "reference_unc": ref_unc,
        "max_abs_delta": max(abs(d) for d in deltas),
        "flat_spread": flat_spread,
        "flat_budget": flat_budget,
        "pointwise_ok": all(abs(row["delta"]) <= row["combined_unc"] for row in rows),
        "flat_ok": flat_spread <= flat_budget,
    }
    summary["passed"] = summary["pointwise_ok"] and summary["flat_ok"]
    return ScanReport("harmonicity_check", rows, summary, _provenance(config))


def fatou_check(f: GermSeries, r: float = 11.0, M: int = 64,
                N: Optional[int] = None, bits: Optional[int] = None) -> ScanReport:
    """Averaging inequality log R-hat(f) >= circle_average(f, r) for univalent f.

    Only germs from the certified-univalent whitelist are accepted; the
    inequality is vacuous otherwise.  An infinite left side passes trivially.
    """
    if f.source not in UNIVALENT_WHITELIST:
        raise ValueError(
            f"fatou_check needs a whitelisted univalent germ, got {f.source!r}"
        )
    log_rf, unc_f, diag = _log_radius(f, N, bits)
    ca = circle_average(f, r, M=M, N=N, bits=bits)
    config = {
        "experiment": "fatou_check",
        "theta": f.theta.describe(), "family": f.source,
        "r": r, "M": M,
        "N": N if N is not None else 0,
        "bits": bits if bits is not None else 53,
    }
    rows = []
    for j, (v, u) in enumerate(zip(ca.node_logs, ca.node_uncs)):
        rows.append({
            "node": j,
            "log_R_fa": math.nan if v is None else v,
            "unc": math.nan if u is None else u,
            "flags": "" if v is not None else "node-failed",
        })
    slack = log_rf - ca.value
    combined = (0.0 if math.isinf(log_rf) else unc_f) + ca.uncertainty
    summary = {
        "log_R_f": log_rf,
        "left_infinite": diag["infinite"],
        "average": ca.value,
        "slack": slack,
        "combined_unc": combined,
        "passed": bool(slack >= -combined),
    }
    return ScanReport("fatou_check", rows, summary, _provenance(config))


def dstar_bounds_scan(d: int, theta_set: Sequence, N: Optional[int] = None,
                      bits: Optional[int] = None, depth: int = 64,
                      geyer_check: bool = True) -> ScanReport:
    """Two-sided radius bounds for lambda(z + z^d) over a sample of angles.

    Records the centered quantity log R-hat + Y((d-1) theta)/(d-1), whose
    boundedness is the claim, the one-sided witness log R-hat + Y(theta)
    (bounded below, unbounded above as the sample varies), and optionally
    the semi-conjugate radius relation against lambda z (1 - z)^(d-1).
    """
    if d < 3:
        raise ValueError("need d >= 3; d = 2 is the quadratic case")
    dm1 = d - 1
    config = {
        "experiment": "dstar_bounds_scan",
        "d": d, "depth": depth,
        "N": N if N is not None else 0,
        "bits": bits if bits is not None else 53,
        "geyer_check": geyer_check,
        "thetas": [t.describe() for t in theta_set],
    }
    rows = []
    for t in theta_set:
        desc = t.describe()
        tm = mul_mod1(t, dm1)
        if frac(tm).kind == "rational":
            rows.append({
                "theta": desc, "Y_theta": math.nan, "Y_m": math.inf,
                "log_R": math.nan, "R_unc": math.nan, "centered": math.nan,
                "margin": math.nan, "geyer_log_R": math.nan,
                "geyer_ratio": math.nan, "flags": "multiple-rational",
            })
            continue
        y_t = float(yoccoz_Y(t, depth).value)
        y_m = float(yoccoz_Y(tm, depth).value)
        flags = ""
        try:
            log_r, unc, _ = _log_radius(dstar_germ(d, t), N, bits)
        except (Resonance, PrecisionExhausted, TooFewCoefficients) as exc:
            log_r, unc = math.nan, math.nan
            flags = type(exc).__name__
        centered = log_r + y_m / dm1
        margin = log_r + y_t
        g_log, g_ratio = math.nan, math.nan
        if geyer_check and not flags:
            try:
                g_log, _, _ = _log_radius(geyer_germ(d, tm), N, bits)
                g_ratio = g_log / (dm1 * log_r)
            except (Resonance, PrecisionExhausted, TooFewCoefficients) as exc:
                flags = "geyer-" + type(exc).__name__
        rows.append({
            "theta": desc, "Y_theta": y_t, "Y_m": y_m, "log_R": log_r,
            "R_unc": unc, "centered": centered, "margin": margin,
            "geyer_log_R": g_log, "geyer_ratio": g_ratio, "flags": flags,
        })
    ok = [r for r in rows if r["flags"] == ""]
    centered = [r["centered"] for r in ok]
    margins = [r["margin"] for r in ok]
    ratios = [r["geyer_ratio"] for r in ok if math.isfinite(r["geyer_ratio"])]
    summary = {
        "n_rows": len(rows),
        "n_flagged": len(rows) - len(ok),
        "centered_min": min(centered) if centered else math.nan,
        "centered_max": max(centered) if centered else math.nan,
        "centered_band": (max(centered) - min(centered)) if centered else math.nan,
        "margin_min": min(margins) if margins else math.nan,
        "margin_max": max(margins) if margins else math.nan,
        "margin_spread": (max(margins) - min(margins)) if margins else math.nan,
        "geyer_max_dev": max((abs(x - 1.0) for x in ratios), default=math.nan),
    }
    return ScanReport("dstar_bounds_scan", rows, summary, _provenance(config))


def lemma_scan(theta_set: Sequence, m_set: Sequence, depth: int = 64) -> ScanReport:
    """Fit the smallest C with Y(theta) - Y(m theta) <= C log(2m) on a grid.

    Violations of the fitted bound are zero by construction; the value of
    the scan is the fitted C itself and its stability as the grid grows.
    """
    m_set = [int(m) for m in m_set]
    if any(m < 1 for m in m_set):
        raise ValueError("multipliers must be positive integers")
    config = {
        "experiment": "lemma_scan",
        "depth": depth,
        "m_set": m_set,
        "thetas": [t.describe() for t in theta_set],
    }
    rows = []
    for t in theta_set:
        desc = t.describe()
        yv = yoccoz_Y(t, depth)
        if yv.status != "finite":
            rows.append({"theta": desc, "m": 0, "gap": math.nan,
                         "log_2m": math.nan, "ratio": math.nan,
                         "flags": "Y-" + yv.status})
            continue
        y_t = float(yv.value)
        for m in m_set:
            y_m = float(yoccoz_Y(mul_mod1(t, m), depth).value)
            gap = y_t - y_m
            l2m = math.log(2 * m)
            rows.append({"theta": desc, "m": m, "gap": gap, "log_2m": l2m,
                         "ratio": gap / l2m, "flags": ""})
    ok = [r for r in rows if r["flags"] == ""]
    fitted = max((r["ratio"] for r in ok), default=math.nan)
    viol = sum(1 for r in ok if r["gap"] > fitted * r["log_2m"] + 1e-12)
    best = max(ok, key=lambda r: r["ratio"]) if ok else None
    summary = {
        "n_rows": len(rows),
        "n_flagged": len(rows) - len(ok),
        "fitted_C": fitted,
        "violations": viol,
        "max_gap": max((r["gap"] for r in ok), default=math.nan),
        "argmax_theta": best["theta"] if best else "",
        "argmax_m": best["m"] if best else 0,
    }
    return ScanReport("lemma_scan", rows, summary, _provenance(config))
