"""Linearization power series, radius estimation, and composition oracles.

Given a germ f(z) = lambda*z + sum a_k z^k with lambda = e^{2 pi i theta}, the
formal linearization h(z) = z + sum b_n z^n solving f(h(z)) = h(lambda z)
satisfies the triangular recurrence

    b_n * (lambda^n - lambda) = sum_{k=2..n} a_k * [z^n](h^k),

where the right side involves only b_2..b_{n-1}.  The divisors lambda^n -
lambda are never formed by floating subtraction; they come from the exact
angle reduction of (n-1)*theta and (n+1)*theta, which keeps full relative
accuracy however close lambda^n creeps back to lambda.

Two execution paths share the recurrence:

* bits <= 53: numpy complex128 with a global geometric rescaling s chosen
  automatically so the working coefficients b_n * s^(n-1) stay inside the
  double exponent range.  Per-index validity flags record where even the
  best rescaling lost the tail.
* bits > 53: gmpy2 complex lists at the requested mantissa width with an
  effectively unbounded exponent; no rescaling is needed, and the extra
  mantissa absorbs the cancellation that the recurrence's alternating sums
  produce for slowly growing b_n.

The Hadamard radius estimator works on log|b_n| alone (stored descaled in
float64, which never under- or overflows in log space).
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import gmpy2
import mpmath as mp
import numpy as np

from .angles import Angle, angle_reduce, frac
from .errors import PrecisionExhausted, Resonance, TooFewCoefficients, ZeroScale

DEFAULT_N_POLY = 4096
DEFAULT_N_GENERAL = 1024
MIN_VALID_COEFFS = 64
_GUARD_BITS = 16


# ---------------------------------------------------------------------------
# high-precision plumbing (mpmath <-> gmpy2)

def _tuple_to_mpfr(t):
    sign, man, e, _ = t
    r = gmpy2.mul_2exp(gmpy2.mpfr(man), e) if e >= 0 else gmpy2.div_2exp(gmpy2.mpfr(man), -e)
    return -r if sign else r


def _mpf_to_mpfr(x):
    """Exact mpmath-to-gmpy2 transfer; context precision must cover x.

    Works on the raw mantissa/exponent pair: wrapping in mp.mpf would
    re-round to the ambient mpmath precision and silently truncate.
    """
    return _tuple_to_mpfr(x._mpf_ if isinstance(x, mp.mpf) else mp.mpf(x)._mpf_)


def _mpc_from_mp(z):
    re_t, im_t = z._mpc_
    return gmpy2.mpc(_tuple_to_mpfr(re_t), _tuple_to_mpfr(im_t))


def _lambda_value(theta: Angle, bits: int):
    """e^{2 pi i theta} at the requested precision (mpmath complex)."""
    with mp.workprec(bits + _GUARD_BITS):
        t = frac(theta).to_mpf(bits + _GUARD_BITS)
        return mp.expjpi(2 * t)


def lambda_of(theta: Angle, bits: int = 53):
    """Multiplier e^{2 pi i theta} as complex (bits <= 53) or gmpy2.mpc."""
    lam = _lambda_value(theta, max(bits, 53))
    if bits <= 53:
        return complex(lam)
    with _gmpy_prec(bits + _GUARD_BITS):
        return _mpc_from_mp(lam)


class _gmpy_prec:
    def __init__(self, bits: int):
        self.bits = bits

    def __enter__(self):
        self.saved = gmpy2.get_context().precision
        gmpy2.get_context().precision = self.bits

    def __exit__(self, *exc):
        gmpy2.get_context().precision = self.saved


# ---------------------------------------------------------------------------
# germ container

@dataclass
class GermSeries:
    """Coefficients a_1..a_N of a germ, index-aligned (coeffs[k] is a_k).

    coeffs[0] is always 0.  For bits <= 53 the storage is a numpy complex128
    array; above that, a list of gmpy2.mpc.  degree is set for polynomial
    germs (all a_k = 0 for k > degree), letting the linearizer use the
    O(d N^2) row update instead of the O(N^3) general one.
    """

    theta: Angle
    coeffs: Union[np.ndarray, list]
    N: int
    source: str
    bits: int = 53
    degree: Optional[int] = None

    def __post_init__(self):
        lam = self.coeffs[1]
        mag = abs(complex(lam.real, lam.imag)) if not isinstance(lam, complex) else abs(lam)
        if not (1 - 1e-6 < mag < 1 + 1e-6):
            raise ValueError(f"germ multiplier has |a_1| = {mag}, expected 1")

    @property
    def lam(self):
        return self.coeffs[1]

    def coeff(self, k: int) -> complex:
        if k > self.N:
            if self.degree is not None:
                return 0j
            raise IndexError(f"germ truncated at degree {self.N}")
        c = self.coeffs[k]
        return c if isinstance(c, complex) else complex(float(c.real), float(c.imag))


def germ_from_coeffs(theta: Angle, coeffs: Sequence, source: str, bits: int = 53,
                     degree: Optional[int] = None) -> GermSeries:
    """Wrap index-aligned coefficients (coeffs[0] ignored, forced to 0)."""
    N = len(coeffs) - 1
    if bits <= 53:
        arr = np.asarray(coeffs, dtype=np.complex128).copy()
        arr[0] = 0
        return GermSeries(theta, arr, N, source, 53, degree)
    with _gmpy_prec(bits + _GUARD_BITS):
        lst = [gmpy2.mpc(c) if not isinstance(c, gmpy2.mpc) else c for c in coeffs]
    lst[0] = gmpy2.mpc(0)
    return GermSeries(theta, lst, N, source, bits, degree)


# ---------------------------------------------------------------------------
# small divisors

_DIV_CACHE: dict = {}


def _divisors(theta: Angle, N: int, bits: int):
    """Divisors lambda^n - lambda for n = 2..N, index-aligned arrays/lists.

    Returns (div, div_abs).  Float path: numpy complex128/float64.  High
    precision: lists of gmpy2.mpc / gmpy2.mpfr.  Raises Resonance(n) when
    frac((n-1)theta) vanishes exactly.  Results are cached per (theta, bits)
    and extended on demand.
    """
    key = (theta, bits if bits > 53 else 53)
    cached = _DIV_CACHE.get(key)
    if cached is not None and cached[0] >= N:
        _, div, div_abs = cached
        return div[: N + 1], div_abs[: N + 1]
    if len(_DIV_CACHE) > 64:
        _DIV_CACHE.clear()
    if bits <= 53:
        div, div_abs = _divisors_f64(theta, N)
    else:
        div, div_abs = _divisors_hp(theta, N, bits)
    _DIV_CACHE[key] = (N, div, div_abs)
    return div, div_abs


def _divisors_f64(theta: Angle, N: int):
    div = np.zeros(N + 1, dtype=np.complex128)
    div_abs = np.zeros(N + 1, dtype=np.float64)
    t = frac(theta)
    if t.kind == "rational":
        p, q = t.p, t.q
        for n in range(2, N + 1):
            r1 = ((n - 1) * p) % q
            if r1 == 0:
                raise Resonance(n)
            f1 = r1 / q
            fl1 = ((n - 1) * p) // q
            r2 = ((n + 1) * p) % q
            fl2 = ((n + 1) * p) // q
            sgn = -1.0 if ((fl1 + fl2) & 1) else 1.0
            d = 2j * math.sin(math.pi * f1) * cmath.exp(1j * math.pi * (r2 / q)) * sgn
            div[n] = d
            div_abs[n] = 2.0 * math.sin(math.pi * f1)
        return div, div_abs
    # irrational kinds: one high-precision theta, then exact-enough frac(n*theta)
    prec = 64 + N.bit_length() + 32
    tm = t.to_mpf(prec)
    with mp.workprec(prec):
        for n in range(2, N + 1):
            y1 = tm * (n - 1)
            fl1 = mp.floor(y1)
            f1 = float(y1 - fl1)
            y2 = tm * (n + 1)
            fl2 = mp.floor(y2)
            f2 = float(y2 - fl2)
            sgn = -1.0 if ((int(fl1) + int(fl2)) & 1) else 1.0
            s = math.sin(math.pi * f1)
            div[n] = 2j * s * cmath.exp(1j * math.pi * f2) * sgn
            div_abs[n] = 2.0 * s
    return div, div_abs


def _divisors_hp(theta: Angle, N: int, bits: int):
    work = bits + _GUARD_BITS
    div = [None] * (N + 1)
    div_abs = [None] * (N + 1)
    t = frac(theta)
    with _gmpy_prec(work), mp.workprec(work):
        two_i = gmpy2.mpc(0, 2)
        for n in range(2, N + 1):
            f1 = angle_reduce(t, n - 1, work)
            if f1 == 0:
                raise Resonance(n)
            f2 = angle_reduce(t, n + 1, work)
            fl1 = _floor_mul_int(t, n - 1)
            fl2 = _floor_mul_int(t, n + 1)
            s = mp.sinpi(f1)
            ph = mp.expjpi(f2)
            d = two_i * _mpf_to_mpfr(s) * _mpc_from_mp(ph)
            if (fl1 + fl2) & 1:
                d = -d
            div[n] = d
            div_abs[n] = 2 * _mpf_to_mpfr(s)
    return div, div_abs


def _floor_mul_int(t: Angle, n: int) -> int:
    from .angles import _floor_mul

    return _floor_mul(t, n)


# ---------------------------------------------------------------------------
# linearization

@dataclass
class LinearizationResult:
    """Linearization coefficients with scaling and validity bookkeeping.

    b_scaled[n] holds b_n * scale^(n-1); log_abs[n] = log|b_n| already
    descaled; flags[n] is False where the float path lost the value to
    exponent-range exhaustion (everything at and beyond the first failure).
    divisors is the |lambda^n - lambda| sequence actually used.  For the
    high-precision path scale == 1.0 and b_scaled is a list of gmpy2.mpc.
    """

    theta: Angle
    N: int
    bits: int
    b_scaled: Union[np.ndarray, list]
    scale: float
    log_abs: np.ndarray
    flags: np.ndarray
    divisors: Union[np.ndarray, list]
    retries: int = 0

    @property
    def b(self):
        """Coefficients at natural scale (float path may overflow to inf)."""
        if isinstance(self.b_scaled, list):
            return self.b_scaled
        if self.scale == 1.0:
            return self.b_scaled
        with np.errstate(over="ignore", under="ignore"):
            n = np.arange(self.N + 1, dtype=np.float64)
            fac = np.exp(-(n - 1) * math.log(self.scale))
            return self.b_scaled * fac

    def valid_count(self) -> int:
        return int(np.count_nonzero(self.flags[2:]))

    def rows(self):
        """CSV-ready rows (n, Re b_n, Im b_n, log|b_n|, divisor)."""
        bvals = self.b
        out = []
        for n in range(2, self.N + 1):
            if isinstance(bvals, list):
                z = complex(float(bvals[n].real), float(bvals[n].imag))
                dv = float(self.divisors[n])
            else:
                z = complex(bvals[n])
                dv = float(self.divisors[n])
            out.append((n, z.real, z.imag, float(self.log_abs[n]), dv))
        return out


def dump_csv(L: LinearizationResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re_b", "im_b", "log_abs_b", "divisor"])
        for row in L.rows():
            w.writerow([row[0]] + [repr(x) for x in row[1:]])


def linearize(f: GermSeries, N: Optional[int] = None, bits: Optional[int] = None) -> LinearizationResult:
    """Solve the linearization recurrence for b_2..b_N.

    N defaults to 4096 for polynomial germs and min(f.N, 1024) otherwise;
    bits defaults to the germ's own precision.  Raises Resonance for exact
    small-divisor zeros and PrecisionExhausted if not even one rescaling
    attempt produced a usable run of coefficients.
    """
    if bits is None:
        bits = f.bits
    if N is None:
        N = DEFAULT_N_POLY if f.degree is not None else min(f.N, DEFAULT_N_GENERAL)
    if f.degree is None and N > f.N:
        raise ValueError(f"germ truncated at {f.N}, cannot linearize to {N}")
    if bits > 53 > f.bits:
        raise ValueError("high-precision linearization needs a high-precision germ")
    div, div_abs = _divisors(f.theta, N, bits)
    if bits <= 53:
        return _linearize_f64(f, N, div, div_abs)
    return _linearize_hp(f, N, bits, div, div_abs)


def _run_f64(a: np.ndarray, N: int, div: np.ndarray, degree: Optional[int], lns: float):
    """One recurrence pass at scale s = e^lns; returns (b_scaled, stop).

    stop is the first index whose value was lost (N+1 when none were).
    """
    d = degree if degree is not None else N
    scale_pows = np.exp(lns * np.arange(max(len(a), 2), dtype=np.float64))  # s^k
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        a_s = a * scale_pows[: len(a)] / math.exp(lns)  # a_k s^{k-1}
    if not np.all(np.isfinite(a_s[1:])):
        return None, 1
    b = np.zeros(N + 1, dtype=np.complex128)
    b[1] = 1.0
    if degree is not None:
        H = np.zeros((d + 1, N + 1), dtype=np.complex128)
        H[1] = b
    else:
        H = np.zeros((N + 1, N + 1), dtype=np.complex128)
        H[1] = b
    stop = N + 1
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        for n in range(2, N + 1):
            kmax = min(d, n)
            if degree is not None:
                for k in range(2, kmax + 1):
                    H[k, n] = H[k - 1, k - 1: n] @ b[n - k + 1: 0: -1]
            else:
                col = H[1:n, 1:n] @ b[n - 1: 0: -1]
                H[2: n + 1, n] = col
            rhs = a_s[2: kmax + 1] @ H[2: kmax + 1, n] if kmax >= 2 else 0j
            val = rhs / div[n]
            if not (math.isfinite(val.real) and math.isfinite(val.imag)) or (val == 0 and rhs != 0):
                stop = n
                break
            b[n] = val
            H[1, n] = val
    return b, stop


def _linearize_f64(f: GermSeries, N: int, div, div_abs) -> LinearizationResult:
    a = np.asarray(f.coeffs, dtype=np.complex128)
    lns = 0.0
    best = None  # (stop, lns, b)
    tried = []
    # short probe to seed the scale, then full passes with slope correction
    probe_N = min(160, N)
    for attempt in range(7):
        runN = probe_N if attempt == 0 else N
        b, stop = _run_f64(a, runN, div, f.degree, lns)
        if attempt > 0 and (best is None or stop > best[0]):
            best = (stop, lns, b)
        if stop > runN and attempt > 0:
            break
        tried.append(lns)
        lns -= _measured_slope(b, stop if stop <= runN else runN + 1)
        if not math.isfinite(lns) or abs(lns) > 720:
            break
    if best is None or best[0] <= 2:
        raise PrecisionExhausted(
            "no rescaling kept the recurrence inside float64 exponent range; raise bits"
        )
    stop, lns, b = best
    s = math.exp(lns)
    flags = np.zeros(N + 1, dtype=bool)
    flags[1:stop] = True
    log_abs = np.full(N + 1, np.nan)
    with np.errstate(divide="ignore"):
        mags = np.abs(b[1:stop])
        log_abs[1:stop] = np.where(mags > 0, np.log(np.where(mags > 0, mags, 1.0)), -np.inf)
    log_abs[1:stop] -= (np.arange(1, stop) - 1) * lns
    return LinearizationResult(f.theta, N, 53, b, s, log_abs, flags, div_abs,
                               retries=len(tried))


def _measured_slope(b, stop: int) -> float:
    """Least-squares slope of log|b_n| over the longest usable prefix."""
    if b is None:
        return -300.0  # germ coefficients themselves overflowed: shrink hard
    hi = min(stop, len(b))
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(b[1:hi]))
    ns = np.arange(1, hi, dtype=np.float64)
    keep = np.isfinite(logs)
    if np.count_nonzero(keep) < 4:
        # nothing measurable: nudge downward, overflow is the common failure
        return 100.0
    x, y = ns[keep], logs[keep]
    xm, ym = x.mean(), y.mean()
    denom = ((x - xm) ** 2).sum()
    if denom == 0:
        return 0.0
    return float(((x - xm) * (y - ym)).sum() / denom)


def _linearize_hp(f: GermSeries, N: int, bits: int, div, div_abs) -> LinearizationResult:
    work = bits + _GUARD_BITS
    d = f.degree if f.degree is not None else N
    with _gmpy_prec(work):
        zero = gmpy2.mpc(0)
        one = gmpy2.mpc(1)
        a = list(f.coeffs) + [zero] * max(0, min(d, N) - f.N)
        b = [zero] * (N + 1)
        b[1] = one
        if f.degree is not None:
            H = [[zero] * (N + 1) for _ in range(d + 1)]
            H[1] = b  # alias: row 1 tracks b as it grows
        else:
            H = [[zero] * (N + 1) for _ in range(N + 1)]
            H[1] = b
        for n in range(2, N + 1):
            kmax = min(d, n)
            for k in range(2, kmax + 1):
                Hk1 = H[k - 1]
                acc = zero
                # sum_{j=k-1..n-1} H[k-1][j] * b[n-j]
                for j in range(k - 1, n):
                    acc += Hk1[j] * b[n - j]
                H[k][n] = acc
            rhs = zero
            for k in range(2, kmax + 1):
                rhs += a[k] * H[k][n]
            b[n] = rhs / div[n]
        log_abs = np.full(N + 1, np.nan)
        for n in range(1, N + 1):
            nrm = gmpy2.norm(b[n])
            log_abs[n] = float(gmpy2.log(nrm)) / 2.0 if nrm != 0 else -math.inf
    flags = np.zeros(N + 1, dtype=bool)
    flags[1:] = True
    return LinearizationResult(f.theta, N, bits, b, 1.0, log_abs, flags, div_abs)


# ---------------------------------------------------------------------------
# radius estimation

@dataclass
class RadiusEstimate:
    """Hadamard-type radius from a window of coefficient magnitudes.

    value is the window-max estimator min_n |b_n|^{-1/(n-1)} (+inf when the
    infinity flag fired); slope_value re-estimates from a least-squares fit
    of log|b_n| and exists to price the uncertainty, reported as relative
    discrepancy.  window is the (lo, hi) index range used.
    """

    value: float
    uncertainty: float
    method: str
    window: tuple
    infinite: bool = False
    slope_value: float = float("nan")

    @property
    def log_value(self) -> float:
        return math.inf if self.infinite else math.log(self.value)


def hadamard_radius(L: LinearizationResult, window: float = 0.25) -> RadiusEstimate:
    """Radius of convergence estimate from the top `window` fraction of n.

    The root exponent is 1/(n-1), which makes the estimator exactly
    covariant under the germ rescaling a_k -> a_k s^{k-1} (b_n -> b_n
    s^{n-1}).  The infinity flag fires when every windowed root falls below
    max(2^(-bits/4), e^2/N) - the second term is where factorially decaying
    coefficients of entire linearizations land.
    """
    if not (0 < window <= 1):
        raise ValueError("window must be in (0, 1]")
    ok = np.flatnonzero(L.flags[2:]) + 2
    if ok.size < MIN_VALID_COEFFS:
        raise TooFewCoefficients(
            f"only {ok.size} valid coefficients, need {MIN_VALID_COEFFS}"
        )
    n_hi = int(ok[-1])
    span = max(16, int(round(window * (n_hi - 1))))
    n_lo = max(2, n_hi - span + 1)
    idx = ok[(ok >= n_lo) & (ok <= n_hi)]
    logs = L.log_abs[idx]
    root_logs = logs / (idx - 1)
    thr = math.log(max(2.0 ** (-L.bits / 4.0), math.e ** 2 / L.N))
    if np.all(root_logs < thr):
        return RadiusEstimate(math.inf, 0.0, "window-max", (n_lo, n_hi), infinite=True)
    finite = np.isfinite(logs)
    if np.count_nonzero(finite) < 8:
        raise TooFewCoefficients("window has fewer than 8 finite log|b_n| values")
    primary = math.exp(-float(np.max(root_logs[finite])))
    x = idx[finite].astype(np.float64)
    y = logs[finite]
    xm, ym = x.mean(), y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    secondary = math.exp(-slope)
    unc = abs(primary - secondary) / primary
    return RadiusEstimate(primary, unc, "window-max", (n_lo, n_hi),
                          slope_value=secondary)


# ---------------------------------------------------------------------------
# composition oracle and conjugation

def _trunc_mul(x, y, N: int):
    """Coefficients of x*y through degree N (index-aligned inputs)."""
    if isinstance(x, np.ndarray):
        return np.convolve(x[: N + 1], y[: N + 1])[: N + 1]
    out = [gmpy2.mpc(0)] * (N + 1)
    for i, xi in enumerate(x[: N + 1]):
        if xi == 0:
            continue
        jmax = N - i
        for j, yj in enumerate(y[: jmax + 1]):
            if yj == 0:
                continue
            out[i + j] += xi * yj
    return out


def compose_oracle(outer: Sequence, inner: Sequence, N: int):
    """Coefficients of outer(inner(z)) through degree N, by brute force.

    Plain power accumulation: keeps a running inner^k and adds outer_k
    times it.  Deliberately shares no code with the linearizer so it can
    referee it.  inner must have zero constant term.
    """
    is_np = isinstance(outer, np.ndarray) or isinstance(inner, np.ndarray)
    if is_np:
        outer = np.asarray(outer, dtype=np.complex128)
        inner = np.asarray(inner, dtype=np.complex128)
        if inner[0] != 0:
            raise ValueError("inner series must vanish at 0")
        innerN = np.zeros(N + 1, dtype=np.complex128)
        innerN[: min(len(inner), N + 1)] = inner[: N + 1]
        out = np.zeros(N + 1, dtype=np.complex128)
        out[0] = outer[0] if len(outer) > 0 else 0
        pw = innerN.copy()
        for k in range(1, len(outer)):
            if k > N:
                break
            if outer[k] != 0:
                out += outer[k] * pw
            pw = np.convolve(pw, innerN)[: N + 1]
        return out
    if inner[0] != 0:
        raise ValueError("inner series must vanish at 0")
    innerN = list(inner[: N + 1]) + [gmpy2.mpc(0)] * max(0, N + 1 - len(inner))
    out = [gmpy2.mpc(0)] * (N + 1)
    out[0] = gmpy2.mpc(outer[0]) if len(outer) > 0 else gmpy2.mpc(0)
    pw = list(innerN)
    for k in range(1, len(outer)):
        if k > N:
            break
        ok = outer[k]
        if ok != 0:
            for i in range(k, N + 1):
                out[i] += ok * pw[i]
        pw = _trunc_mul(pw, innerN, N)
    return out


def _power_table(h, N: int):
    """Rows H[k][m] = [z^m] h(z)^k for k = 1..N (h_1 != 0, h_0 = 0)."""
    if isinstance(h, np.ndarray):
        H = np.zeros((N + 1, N + 1), dtype=np.complex128)
        H[1, : min(len(h), N + 1)] = h[: N + 1]
        for k in range(2, N + 1):
            H[k, k:] = np.convolve(H[k - 1, k - 1: N + 1], H[1, 1: N + 2 - k])[: N + 1 - k]
        return H
    H = [[gmpy2.mpc(0)] * (N + 1) for _ in range(N + 1)]
    for m in range(1, min(len(h), N + 1)):
        H[1][m] = gmpy2.mpc(h[m])
    for k in range(2, N + 1):
        prev = H[k - 1]
        row = H[k]
        for m in range(k, N + 1):
            acc = gmpy2.mpc(0)
            for j in range(k - 1, m):
                acc += prev[j] * H[1][m - j]
            row[m] = acc
    return H


def revert_series(h, N: int):
    """Compositional inverse g of h = z + ... (g(h(z)) = z) through degree N."""
    is_np = isinstance(h, np.ndarray)
    one = h[1]
    if abs(complex(one) - 1) > 1e-12 if is_np else abs(one - 1) > 1e-12:
        raise ValueError("reversion requires leading coefficient 1")
    H = _power_table(h, N)
    if is_np:
        g = np.zeros(N + 1, dtype=np.complex128)
        g[1] = 1.0
        for n in range(2, N + 1):
            g[n] = -(g[1:n] @ H[1:n, n])
        return g
    g = [gmpy2.mpc(0)] * (N + 1)
    g[1] = gmpy2.mpc(1)
    for n in range(2, N + 1):
        acc = gmpy2.mpc(0)
        for k in range(1, n):
            acc += g[k] * H[k][n]
        g[n] = -acc
    return g


def conjugate_germ(h: Sequence, theta: Angle, N: int, bits: int = 53,
                   h_name: str = "h") -> GermSeries:
    """Germ f = h o R_theta o h^{-1} truncated at N (R_theta(z) = lambda z)."""
    lam = lambda_of(theta, bits)
    if bits <= 53:
        harr = np.zeros(N + 1, dtype=np.complex128)
        hh = np.asarray(h, dtype=np.complex128)
        harr[: min(len(hh), N + 1)] = hh[: N + 1]
        g = revert_series(harr, N)
        inner = lam * g
        f = compose_oracle(harr, inner, N)
        return germ_from_coeffs(theta, f, f"conjugate:{h_name}", 53)
    with _gmpy_prec(bits + _GUARD_BITS):
        hl = [gmpy2.mpc(c) for c in h[: N + 1]] + [gmpy2.mpc(0)] * max(0, N + 1 - len(h))
        g = revert_series(hl, N)
        inner = [lam * c for c in g]
        f = compose_oracle(hl, inner, N)
    return germ_from_coeffs(theta, f, f"conjugate:{h_name}", bits)


def linearization_residual(f: GermSeries, L: LinearizationResult,
                           upto: Optional[int] = None) -> float:
    """max_n |(f o h - h o R_theta)_n| / max(1, |(h o R_theta)_n|), n <= upto.

    Uses compose_oracle only.  Works in the scaled coordinates of L, where
    the identity must hold for the rescaled germ; the residual is invariant.
    """
    N = min(upto or L.N, L.N)
    lam = lambda_of(f.theta, L.bits)
    if isinstance(L.b_scaled, np.ndarray):
        hvec = L.b_scaled[: N + 1].copy()
        nmax = int(np.flatnonzero(L.flags[: N + 1])[-1]) if L.flags[: N + 1].any() else 1
        N = min(N, nmax)
        hvec = hvec[: N + 1]
        lns = math.log(L.scale)
        a = np.asarray(f.coeffs, dtype=np.complex128)
        ks = np.arange(len(a), dtype=np.float64)
        with np.errstate(over="ignore", under="ignore"):
            a_s = a * np.exp((ks - 1) * lns)
        lhs = compose_oracle(a_s, hvec, N)
        lamn = lam ** np.arange(N + 1)
        rhs = hvec * lamn
        num = np.abs(lhs - rhs)
        den = np.maximum(1.0, np.abs(rhs))
        return float(np.max(num[1:] / den[1:]))
    with _gmpy_prec(L.bits + _GUARD_BITS):
        hvec = list(L.b_scaled[: N + 1])
        lhs = compose_oracle(list(f.coeffs), hvec, N)
        worst = 0.0
        lam_pow = gmpy2.mpc(lam)
        for n in range(1, N + 1):
            rhs_n = hvec[n] * lam_pow
            diff = abs(lhs[n] - rhs_n)
            den = max(1.0, abs(rhs_n))
            worst = max(worst, float(diff / den))
            lam_pow *= lam
        return worst
