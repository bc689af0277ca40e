"""Conformal radius by logarithmic capacity, independent of power series.

The conformal radius of a simply connected domain U about 0 equals the
reciprocal capacity (transfinite diameter) of the image of its boundary
under z -> 1/z.  For the quadratic P(z) = lambda z + z^2 with theta of
bounded type, the forward orbit of the critical point -lambda/2 accumulates
on the Siegel-disk boundary, giving a cheap boundary sampler; greedily
selected Leja points then make the n-point geometric-mean pairwise distance
an accurate stand-in for the transfinite diameter.

This route shares nothing with the linearization recurrence, which is the
point: the two radius estimates referee each other.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .angles import Angle, cf_expand, frac
from .errors import (
    BoundedTypeRequired,
    CenterOnBoundary,
    DegenerateSample,
    OrbitEscaped,
)
from .series import lambda_of

QUOTIENT_CAP = 50
MIN_PAIR_DISTANCE = 1e-12
ESCAPE_RADIUS = 4.0


@dataclass
class BoundarySample:
    """A finite point cloud standing in for a boundary curve."""

    points: np.ndarray
    source: str
    burnin: int = 0

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class CapacityEstimate:
    """Transfinite-diameter numbers for one point set.

    conformal_radius is 1/transfinite_diameter, meaningful when the points
    sample an inverted boundary; energy is the discrete logarithmic energy
    of the uniform measure on the points, equal to -log(d_n) by definition
    (the true capacity energy is an infimum over all measures; this uniform
    surrogate is only an upper bound and the gap is not controlled here).
    """

    transfinite_diameter: float
    energy: float
    n_points_used: int
    conformal_radius: float


def siegel_boundary_sample(theta: Angle, count: int = 2048, burnin: int = 64,
                           quotient_cap: int = QUOTIENT_CAP, depth: int = 64) -> BoundarySample:
    """Critical-orbit sampler of the Siegel boundary of lambda z + z^2.

    Heuristic: valid when the critical orbit accumulates on the boundary,
    which holds for bounded-type theta; hence the partial-quotient gate.
    """
    if count < 256:
        raise ValueError("count must be >= 256")
    t = frac(theta)
    if t.kind == "rational":
        raise BoundedTypeRequired("rational angle has no Siegel disk")
    cf = cf_expand(t, depth)
    bad = [a for a in cf.partial_quotients if a > quotient_cap]
    if bad or cf.exhausted:
        raise BoundedTypeRequired(
            f"partial quotients exceed cap {quotient_cap} within depth {depth}"
        )
    lam = lambda_of(t, 53)
    z = -lam / 2
    pts = np.empty(count, dtype=np.complex128)
    total = burnin + count
    for i in range(total):
        if abs(z) > ESCAPE_RADIUS:
            raise OrbitEscaped(f"critical orbit left |z| <= {ESCAPE_RADIUS} at step {i}")
        if i >= burnin:
            pts[i - burnin] = z
        z = lam * z + z * z
    return BoundarySample(pts, f"critical-orbit:{t.describe()}", burnin)


def synthetic_circle(center: complex, radius: float, count: int = 1024) -> BoundarySample:
    """Equispaced points on a circle (synthetic shape for tests)."""
    ang = 2 * np.pi * np.arange(count) / count
    pts = center + radius * np.exp(1j * ang)
    return BoundarySample(pts.astype(np.complex128), f"circle:{center}:{radius}")


def synthetic_segment(a: complex, b: complex, count: int = 1024) -> BoundarySample:
    ts = np.linspace(0.0, 1.0, count)
    pts = (1 - ts) * complex(a) + ts * complex(b)
    return BoundarySample(pts.astype(np.complex128), f"segment:{a}:{b}")


def invert_about(S: BoundarySample, center: complex) -> BoundarySample:
    """Pointwise u = 1/(z - center); center must stay clear of the points."""
    d = np.abs(S.points - center)
    if float(d.min()) < 1e-9:
        raise CenterOnBoundary(f"center within 1e-9 of a sample point")
    return BoundarySample(1.0 / (S.points - center), S.source + ":inverted", S.burnin)


def leja_fekete(S: BoundarySample, n: int) -> np.ndarray:
    """Greedy Leja selection of n points (deterministic, ties to low index).

    Starts from the farthest pair, then repeatedly adds the candidate
    maximizing the sum of log-distances to the selected set.  Duplicated
    inputs are never selected twice (their log-distance sum is -inf).
    """
    pts = S.points
    if n < 2:
        raise ValueError("need n >= 2")
    if n > len(pts):
        raise ValueError(f"n = {n} exceeds sample size {len(pts)}")
    # farthest pair by full pairwise scan; first flat index wins ties
    diff = np.abs(pts[:, None] - pts[None, :])
    flat = int(np.argmax(diff))
    i, j = divmod(flat, len(pts))
    if diff[i, j] == 0.0:
        raise DegenerateSample("all points coincide")
    if j < i:
        i, j = j, i
    order = [i, j]
    with np.errstate(divide="ignore"):
        sumlog = np.log(np.abs(pts - pts[i])) + np.log(np.abs(pts - pts[j]))
    sumlog[i] = sumlog[j] = -np.inf
    for _ in range(n - 2):
        k = int(np.argmax(sumlog))
        if sumlog[k] == -np.inf:
            raise DegenerateSample("no usable candidate remains")
        order.append(k)
        with np.errstate(divide="ignore"):
            sumlog += np.log(np.abs(pts - pts[k]))
        sumlog[k] = -np.inf
    return pts[np.asarray(order)]


def transfinite_diameter(points: Sequence) -> CapacityEstimate:
    """Geometric mean of pairwise distances: d_n = exp(mean log |z_i-z_j|)."""
    pts = np.asarray(points, dtype=np.complex128)
    m = len(pts)
    if m < 3:
        raise ValueError("need at least 3 points")
    diff = np.abs(pts[:, None] - pts[None, :])
    iu = np.triu_indices(m, k=1)
    dists = diff[iu]
    if float(dists.min()) < MIN_PAIR_DISTANCE:
        raise DegenerateSample(
            f"pair closer than {MIN_PAIR_DISTANCE}; capacity product degenerates"
        )
    mean_log = float(np.mean(np.log(dists)))
    d_n = math.exp(mean_log)
    return CapacityEstimate(d_n, -mean_log, m, 1.0 / d_n)


def diameter_profile(points: Sequence, start: int = 3) -> list:
    """d_k for each prefix of the (Leja-ordered) points, k = start..len."""
    pts = np.asarray(points, dtype=np.complex128)
    out = []
    pair_sum = 0.0
    for k in range(1, len(pts) + 1):
        if k >= 2:
            with np.errstate(divide="ignore"):
                pair_sum += float(np.sum(np.log(np.abs(pts[: k - 1] - pts[k - 1]))))
        if k >= start:
            out.append((k, math.exp(2.0 * pair_sum / (k * (k - 1)))))
    return out


def conformal_radius_capacity(theta: Angle, count: int = 2048, burnin: int = 64,
                              n: int = 1024, center: complex = 0j) -> CapacityEstimate:
    """Full pipeline: orbit sample, invert about the center, Leja, diameter.

    The returned conformal_radius estimates the Siegel-disk conformal radius
    of lambda z + z^2 about 0.  Heuristic oracle: accuracy rests on the
    boundary sampler and on finite-n transfinite-diameter convergence.
    """
    S = siegel_boundary_sample(theta, count=count, burnin=burnin)
    inv = invert_about(S, center)
    sel = leja_fekete(inv, min(n, len(inv.points)))
    return transfinite_diameter(sel)


def export_sample(S: BoundarySample, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# source", S.source, "burnin", S.burnin])
        w.writerow(["re", "im"])
        for z in S.points:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def import_sample(path: str) -> BoundarySample:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    source, burnin = "imported", 0
    start = 0
    if rows and rows[0] and rows[0][0].startswith("#"):
        source = rows[0][1] if len(rows[0]) > 1 else source
        burnin = int(rows[0][3]) if len(rows[0]) > 3 else 0
        start = 1
    if rows[start] and rows[start][0] == "re":
        start += 1
    pts = np.array([complex(float(r[0]), float(r[1])) for r in rows[start:] if r],
                   dtype=np.complex128)
    return BoundarySample(pts, source, burnin)
