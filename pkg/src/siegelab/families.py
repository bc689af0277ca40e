"""Germ families: quadratic, perturbed and rescaled, unicritical boundary,
z(1-z)^{d-1} and z+z^d, plus the semi-conjugacy check and the perturbation
polynomial G.

All constructors take an optional ``bits``: at the default 53 the germ is a
numpy complex128 series, above that a gmpy2 list at the stated mantissa
width with every coefficient produced by a short closed-form recurrence (one
multiply per step), so nothing in the construction itself eats precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import gmpy2
import mpmath as mp
import numpy as np

from .angles import Angle, frac, mul_mod1
from .errors import ZeroScale
from .series import (
    GermSeries,
    _GUARD_BITS,
    _gmpy_prec,
    _lambda_value,
    _mpc_from_mp,
    compose_oracle,
    germ_from_coeffs,
    lambda_of,
)


@dataclass(frozen=True)
class PerturbationConstants:
    """Radii steering the perturbation experiments (germ coordinates)."""

    outer_radius: float = 10.0
    average_circle: float = 11.0
    v_radius: float = 13.0 / 36.0
    u_cap: float = 1.0 / 3.0


CONSTANTS = PerturbationConstants()


# ---------------------------------------------------------------------------
# basic families

def quad_germ(theta: Angle, bits: int = 53) -> GermSeries:
    """P(z) = lambda z + z^2."""
    lam = lambda_of(theta, bits)
    one = 1.0 if bits <= 53 else gmpy2.mpc(1)
    return germ_from_coeffs(theta, [0, lam, one], "quad", bits, degree=2)


def perturbed(f: GermSeries, a: complex) -> GermSeries:
    """f_a = f + a z^2 (the quadratic-coefficient perturbation)."""
    if f.bits <= 53:
        coeffs = np.array(f.coeffs, dtype=np.complex128)
        if len(coeffs) < 3:
            coeffs = np.concatenate([coeffs, np.zeros(3 - len(coeffs), np.complex128)])
        coeffs[2] += a
    else:
        with _gmpy_prec(f.bits + _GUARD_BITS):
            coeffs = list(f.coeffs)
            while len(coeffs) < 3:
                coeffs.append(gmpy2.mpc(0))
            coeffs[2] = coeffs[2] + gmpy2.mpc(a)
    deg = None if f.degree is None else max(f.degree, 2)
    return germ_from_coeffs(f.theta, coeffs, f.source + "+az2", f.bits, degree=deg)


def rescale(f: GermSeries, a: complex) -> GermSeries:
    """g(z) = a f(z/a): coefficient k picks up a^{1-k}."""
    if a == 0:
        raise ZeroScale("rescale by 0")
    if f.bits <= 53:
        ks = np.arange(len(f.coeffs))
        with np.errstate(over="ignore", under="ignore"):
            coeffs = np.asarray(f.coeffs, np.complex128) * np.asarray(a, np.complex128) ** (1 - ks)
    else:
        with _gmpy_prec(f.bits + _GUARD_BITS):
            am = gmpy2.mpc(a)
            coeffs = [c * am ** (1 - k) for k, c in enumerate(f.coeffs)]
            coeffs[0] = gmpy2.mpc(0)
    return germ_from_coeffs(f.theta, coeffs, f.source + ":rescaled", f.bits, degree=f.degree)


def unicritical_boundary_germ(d: int, theta: Angle, bits: int = 53, branch: int = 0):
    """Boundary-of-central-component germ for w^d + c, recentred at its
    indifferent fixed point.

    Returns (germ, c, alpha): alpha is the fixed point (principal branch of
    (lambda/d)^{1/(d-1)}, rotated by the optional branch index), c = alpha -
    alpha^d, and the germ F(w) = f(alpha + w) - alpha has coefficients
    binom(d,k) alpha^{d-k}.  Construction residuals are checked to 1e-12.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    work = max(bits, 53) + _GUARD_BITS
    with mp.workprec(work):
        lam = _lambda_value(theta, work)
        al = (lam / d) ** (mp.mpf(1) / (d - 1))
        if branch % (d - 1):
            al *= mp.expjpi(mp.mpf(2 * (branch % (d - 1))) / (d - 1))
        c = al - al ** d
        coeffs_mp = [mp.mpc(0)] + [math.comb(d, k) * al ** (d - k) for k in range(1, d + 1)]
        mult_res = abs(coeffs_mp[1] - lam)
        fix_res = abs(al ** d + c - al)
    if not (mult_res < 1e-12 and fix_res < 1e-12):
        raise ValueError(
            f"uncritical construction failed residual check: {float(mult_res)}, {float(fix_res)}"
        )
    if bits <= 53:
        germ = germ_from_coeffs(theta, [complex(z) for z in coeffs_mp],
                                f"unicritical:{d}", 53, degree=d)
        return germ, complex(c), complex(al)
    with _gmpy_prec(bits + _GUARD_BITS):
        germ = germ_from_coeffs(theta, [_mpc_from_mp(z) for z in coeffs_mp],
                                f"unicritical:{d}", bits, degree=d)
        return germ, _mpc_from_mp(c), _mpc_from_mp(al)


def geyer_germ(d: int, theta: Angle, bits: int = 53) -> GermSeries:
    """g(z) = lambda z (1-z)^{d-1}: coefficients lambda (-1)^k binom(d-1,k)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    lam = lambda_of(theta, bits)
    if bits <= 53:
        coeffs = [0j] + [lam * ((-1) ** k) * math.comb(d - 1, k) for k in range(d)]
    else:
        with _gmpy_prec(bits + _GUARD_BITS):
            coeffs = [gmpy2.mpc(0)] + [lam * ((-1) ** k) * math.comb(d - 1, k) for k in range(d)]
    return germ_from_coeffs(theta, coeffs, f"geyer:{d}", bits, degree=d)


def dstar_germ(d: int, theta: Angle, bits: int = 53) -> GermSeries:
    """f(z) = lambda (z + z^d)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    lam = lambda_of(theta, bits)
    if bits <= 53:
        coeffs = [0j, lam] + [0j] * (d - 2) + [lam]
    else:
        with _gmpy_prec(bits + _GUARD_BITS):
            zero = gmpy2.mpc(0)
            coeffs = [zero, lam] + [zero] * (d - 2) + [lam]
    return germ_from_coeffs(theta, coeffs, f"dstar:{d}", bits, degree=d)


# ---------------------------------------------------------------------------
# closed-form germs for cancellation-heavy exact cases

def mobius_conjugate_germ(theta: Angle, N: int, bits: int = 53) -> GermSeries:
    """The conjugate of the rotation by h = z/(1-z):

        f(z) = lambda z / (1 + (1-lambda) z),  a_{k+1} = lambda (-(1-lambda))^k.

    Its linearization is exactly h (every b_n = 1), which makes it the
    standard exact test of the recurrence.  One multiply per coefficient.
    """
    lam = lambda_of(theta, bits)
    if bits <= 53:
        coeffs = np.zeros(N + 1, dtype=np.complex128)
        acc = lam
        coeffs[1] = acc
        for k in range(2, N + 1):
            acc *= -(1 - lam)
            coeffs[k] = acc
        return germ_from_coeffs(theta, coeffs, "conjugate:geom", 53)
    with _gmpy_prec(bits + _GUARD_BITS):
        neg_c = -(gmpy2.mpc(1) - lam)
        coeffs = [gmpy2.mpc(0), lam]
        acc = lam
        for k in range(2, N + 1):
            acc = acc * neg_c
            coeffs.append(acc)
    return germ_from_coeffs(theta, coeffs, "conjugate:geom", bits)


def binomial_conjugate_germ(theta: Angle, N: int, bits: int = 53) -> GermSeries:
    """The conjugate of the rotation by h = e^z - 1:

        f(z) = (1+z)^lambda - 1,  a_k = binom(lambda, k),

    whose linearization h is entire (b_n = 1/n!).  Coefficients via the
    stable ratio recurrence a_{k+1} = a_k (lambda - k)/(k + 1).
    """
    lam = lambda_of(theta, bits)
    if bits <= 53:
        coeffs = np.zeros(N + 1, dtype=np.complex128)
        acc = lam
        coeffs[1] = acc
        for k in range(1, N):
            acc *= (lam - k) / (k + 1)
            coeffs[k + 1] = acc
        return germ_from_coeffs(theta, coeffs, "conjugate:expm1", 53)
    with _gmpy_prec(bits + _GUARD_BITS):
        coeffs = [gmpy2.mpc(0), lam]
        acc = lam
        for k in range(1, N):
            acc = acc * (lam - k) / (k + 1)
            coeffs.append(acc)
    return germ_from_coeffs(theta, coeffs, "conjugate:expm1", bits)


# whitelist of certified-univalent germs for the averaging inequalities:
# lambda z (trivial), lambda z/(1-z) (Moebius, univalent on the disk), and
# lambda (z + z^3/4) (|f(z1)-f(z2)| >= |z1-z2|(1 - 3/4 max|z|^2) > 0 on the disk)
UNIVALENT_WHITELIST = ("linear", "geometric", "cubic")


def whitelist_germ(name: str, theta: Angle, N: int = 512, bits: int = 53) -> GermSeries:
    """Construct one of the certified-univalent family members by name."""
    lam = lambda_of(theta, bits)
    if name == "linear":
        if bits <= 53:
            return germ_from_coeffs(theta, [0j, lam], "linear", 53, degree=1)
        return germ_from_coeffs(theta, [gmpy2.mpc(0), lam], "linear", bits, degree=1)
    if name == "geometric":
        # lambda z/(1-z): every coefficient equals lambda
        if bits <= 53:
            coeffs = np.full(N + 1, lam, dtype=np.complex128)
            coeffs[0] = 0
            return germ_from_coeffs(theta, coeffs, "geometric", 53)
        return germ_from_coeffs(theta, [gmpy2.mpc(0)] + [lam] * N, "geometric", bits)
    if name == "cubic":
        quarter = 0.25 if bits <= 53 else gmpy2.mpfr(1) / 4
        zero = 0j if bits <= 53 else gmpy2.mpc(0)
        return germ_from_coeffs(theta, [zero, lam, zero, lam * quarter],
                                "cubic", bits, degree=3)
    raise ValueError(f"not a whitelisted univalent family: {name!r}")


# ---------------------------------------------------------------------------
# semi-conjugacy between z+z^d and the z(1-z)^{d-1} family

def semiconjugacy_residual(d: int, theta: Angle, N: int = 64,
                           wrong_multiplier: bool = False) -> float:
    """Max |coefficient| of phi(f(z)) - g(phi(z)) through degree N, with
    phi(z) = -z^{d-1}, f the z+z^d germ at theta, g the z(1-z)^{d-1} germ at
    (d-1) theta.  Exact semi-conjugacy makes this vanish; passing
    wrong_multiplier=True builds g at theta instead (negative control).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    f = dstar_germ(d, theta)
    g_angle = frac(theta) if wrong_multiplier else mul_mod1(theta, d - 1)
    g = geyer_germ(d, g_angle)
    phi = np.zeros(d, dtype=np.complex128)
    phi[d - 1] = -1.0
    lhs = compose_oracle(phi, np.asarray(f.coeffs), N)
    rhs = compose_oracle(np.asarray(g.coeffs), phi, N)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# perturbation polynomial

@dataclass(frozen=True)
class GfSpec:
    """Zeros data for the perturbation polynomial: critical points w_i with
    local degrees n_i >= 2, and indifferent periodic points u_j (0 included).
    """

    w: tuple
    u: tuple

    def __post_init__(self):
        if not any(abs(complex(p)) == 0 for p in self.u):
            raise ValueError("u must contain 0")
        pts = [complex(p) for p, _ in self.w] + [complex(p) for p in self.u]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i] == pts[j]:
                    raise ValueError("points must be distinct")
        for _, n in self.w:
            if n < 2:
                raise ValueError("local degrees must be >= 2")


def build_G(spec: GfSpec) -> np.ndarray:
    """Expand G(z) = prod (z - w_i)^{n_i} * prod (z - u_j)^2 (ascending
    coefficients); verifies each u_j is a double root by evaluating G, G'.
    """
    poly = np.array([1.0 + 0j])
    for p, n in spec.w:
        lin = np.array([-complex(p), 1.0 + 0j])
        for _ in range(n):
            poly = np.convolve(poly, lin)
    for p in spec.u:
        lin = np.array([-complex(p), 1.0 + 0j])
        poly = np.convolve(poly, np.convolve(lin, lin))
    deg = sum(n for _, n in spec.w) + 2 * len(spec.u)
    assert len(poly) - 1 == deg
    dpoly = poly[1:] * np.arange(1, len(poly))
    scale = max(1.0, float(np.max(np.abs(poly))))
    for p in spec.u:
        z = complex(p)
        g = _horner(poly, z)
        gp = _horner(dpoly, z)
        if abs(g) > 1e-9 * scale or abs(gp) > 1e-9 * scale * max(1.0, deg):
            raise ValueError(f"u = {z} is not a double root (G={g}, G'={gp})")
    return poly


def _horner(coeffs: np.ndarray, z: complex) -> complex:
    acc = 0j
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc
