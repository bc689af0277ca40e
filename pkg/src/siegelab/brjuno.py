"""Brjuno-type arithmetic sums with certified tails.

Two closely related series measure how well an irrational angle theta avoids
rationals.  With theta_0 = frac(theta) and theta_{n+1} = frac(1/theta_n):

* the product-weighted sum  Y(theta) = sum_n theta_0*...*theta_{n-1} * log(1/theta_n)
  (empty product = 1), and
* the convergent-weighted sum  B(theta) = sum_n log(q_{n+1}) / q_n  over the
  approximant denominators q_n of theta (q_0 = 1 term included).

Both converge for the same set of angles, and their difference is uniformly
bounded.  Rational angles give +infinity (the orbit hits 0).  For quadratic
angles the Gauss orbit is eventually periodic, so the tail of Y is a
geometric series that we resum exactly; for other angles the tail is bounded
by a Fibonacci-type majorant, valid under a stated cap on the unseen partial
quotients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath as mp

from .angles import Angle, cf_expand, convergents, frac, gauss_cycle, mul_mod1
from .errors import DegenerateAngle, PrecisionExhausted

DEFAULT_DEPTH = 64
DEFAULT_BITS = 256

# tail majorants assume every unseen partial quotient is at most this
QUOTIENT_CAP = 10 ** 6


@dataclass
class BrjunoValue:
    """A certified partial sum.

    ``value`` is the computed head, ``tail_bound`` a rigorous bound on what
    the remaining terms can add (0 when the tail was resummed exactly or the
    sum is infinite), and ``status`` one of "finite", "infinite",
    "undecidable".  Rational angles are "infinite" with value +inf.  A
    real-kind angle whose Gauss orbit fell below the precision floor before
    the tail was certified is "undecidable".
    """

    value: object
    tail_bound: object
    depth_used: int
    status: str = "finite"

    def upper(self):
        return self.value + self.tail_bound

    def __repr__(self):
        v = mp.nstr(self.value, 17) if mp.isfinite(self.value) else str(self.value)
        t = mp.nstr(self.tail_bound, 6)
        return f"BrjunoValue({v} + <= {t}, depth={self.depth_used}, {self.status})"


def _fibonacci_tail(logq_last: float, q_last: int, cap: int):
    """Bound sum_{k>=1} (log q_{N+k} + log(2(cap+1))) / q_{N+k} given q_N.

    Uses q_{N+k} >= q_N * F_{k+1} (Fibonacci) and monotonicity of
    (log x + c)/x for x >= 3.  Exact enough for a certificate; generous by
    design.
    """
    c = mp.log(2 * (cap + 1))
    total = mp.mpf(0)
    fa, fb = 1, 2  # F_2, F_3
    qn = mp.mpf(q_last)
    for _ in range(400):
        qk = qn * fb
        term = (mp.log(qk) + c) / qk
        total += term
        if term < mp.mpf(2) ** (-DEFAULT_BITS - 64):
            break
        fa, fb = fb, fa + fb
    else:
        # dominate the rest by a geometric series with ratio 2/3
        total += term * 3
    return total


def yoccoz_Y(
    theta: Angle,
    depth: int = DEFAULT_DEPTH,
    bits: int = DEFAULT_BITS,
    quotient_cap: int = QUOTIENT_CAP,
) -> BrjunoValue:
    """Product-weighted small-divisor sum with a certified tail.

    Quadratic angles get an exactly resummed periodic tail (tail_bound 0 up
    to roundoff, which is folded into tail_bound).  Other irrationals get a
    Fibonacci majorant tail bound, conditional on no future partial quotient
    exceeding ``quotient_cap``.
    """
    t = frac(theta)
    if t.kind == "rational":
        if t.is_zero():
            raise DegenerateAngle("Y is undefined at 0")
        return BrjunoValue(mp.inf, mp.mpf(0), 0, status="infinite")

    if t.kind == "quadratic":
        return _yoccoz_quadratic(t, bits)

    return _yoccoz_generic(t, depth, bits, quotient_cap)


def _yoccoz_quadratic(t: Angle, bits: int) -> BrjunoValue:
    prefix, cycle = gauss_cycle(t, bits=bits + 32)
    with mp.workprec(bits + 32):
        total = mp.mpf(0)
        prod = mp.mpf(1)
        for v in prefix:
            total += prod * mp.log(1 / v)
            prod *= v
        # one full cycle from the entry point
        cyc_sum = mp.mpf(0)
        cyc_prod = mp.mpf(1)
        for v in cycle:
            cyc_sum += cyc_prod * mp.log(1 / v)
            cyc_prod *= v
        # remaining cycles form a geometric series with ratio cyc_prod < 1
        total += prod * cyc_sum / (1 - cyc_prod)
        # roundoff certificate: every operation is correctly rounded at
        # bits+32, orbit length L gives a crude (L^2) ulp envelope
        L = len(prefix) + len(cycle)
        err = mp.mpf(L * L + 16) * abs(total) * mp.mpf(2) ** (-(bits + 24))
    with mp.workprec(bits):
        return BrjunoValue(+total, +err, L, status="finite")


def _yoccoz_generic(t: Angle, depth: int, bits: int, cap: int) -> BrjunoValue:
    cf = cf_expand(t, depth, bits=bits)
    if any(a > cap for a in cf.partial_quotients):
        raise PrecisionExhausted(
            f"partial quotient exceeds the stated cap {cap}; tail certificate void"
        )
    conv = convergents(cf)
    with mp.workprec(bits):
        total = mp.mpf(0)
        prod = mp.mpf(1)
        n_used = 0
        for v in cf.gauss_orbit[: len(cf.partial_quotients)]:
            total += prod * mp.log(1 / v)
            prod *= v
            n_used += 1
        if cf.exhausted or len(cf.partial_quotients) < depth:
            return BrjunoValue(+total, mp.inf, n_used, status="undecidable")
        q_last = conv.pairs[-1][1]
        tail = _fibonacci_tail(float(mp.log(q_last)), q_last, cap)
        return BrjunoValue(+total, +tail, n_used, status="finite")


def brjuno_B(
    theta: Angle,
    depth: int = DEFAULT_DEPTH,
    bits: int = DEFAULT_BITS,
    quotient_cap: int = QUOTIENT_CAP,
) -> BrjunoValue:
    """Convergent-weighted sum  sum_{n>=0} log(q_{n+1})/q_n  with q_0 = 1."""
    t = frac(theta)
    if t.kind == "rational":
        if t.is_zero():
            raise DegenerateAngle("B is undefined at 0")
        return BrjunoValue(mp.inf, mp.mpf(0), 0, status="infinite")

    if t.kind == "quadratic":
        # quotients are eventually periodic; depth buys geometric accuracy,
        # and the same Fibonacci tail certificate applies
        depth = max(depth, 96)
    cf = cf_expand(t, depth, bits=bits)
    if any(a > quotient_cap for a in cf.partial_quotients):
        raise PrecisionExhausted(
            f"partial quotient exceeds the stated cap {quotient_cap}; tail certificate void"
        )
    conv = convergents(cf)
    with mp.workprec(bits):
        total = mp.mpf(0)
        q_prev = 1
        n_used = 0
        for (_, q) in conv.pairs:
            total += mp.log(q) / q_prev
            q_prev = q
            n_used += 1
        if cf.exhausted or len(cf.partial_quotients) < depth:
            return BrjunoValue(+total, mp.inf, n_used, status="undecidable")
        tail = _fibonacci_tail(float(mp.log(q_prev)), q_prev, quotient_cap)
        return BrjunoValue(+total, +tail, n_used, status="finite")


def lemma_gap(theta: Angle, m: int, depth: int = DEFAULT_DEPTH, bits: int = DEFAULT_BITS):
    """Y(theta) - Y(frac(m*theta)), computed with exact angle multiplication.

    The multiplication lemma asserts this gap is at most C*log m for a
    universal C; scans fit the smallest such C rather than assuming one.
    Returns an mpf.  Both evaluations must certify finite.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    t = frac(theta)
    y0 = yoccoz_Y(t, depth=depth, bits=bits)
    if y0.status != "finite":
        raise DegenerateAngle("lemma_gap needs a finite Y(theta)")
    ym = yoccoz_Y(mul_mod1(t, m), depth=depth, bits=bits)
    if ym.status != "finite":
        raise DegenerateAngle(f"Y({m}*theta) did not certify finite")
    with mp.workprec(bits):
        return +(y0.value - ym.value)
