"""Exact angle arithmetic and continued fractions.

An :class:`Angle` is a real number carried in one of three exact-enough
representations:

* ``rational``  p/q in lowest terms,
* ``quadratic`` (u + v*sqrt(D))/w with integer u, v, w and squarefree D,
* ``real``      a floating value with a stated mantissa width in bits.

Rational and quadratic angles support exact Gauss-map orbits (the quadratic
case via the classical (P + sqrt(NN))/Q state machine, which keeps all
integers bounded), exact multiplication mod 1, and exact reduction of
frac(n*theta) at arbitrary requested precision.  Floating angles degrade
explicitly: operations that would outrun the stored mantissa raise
:class:`PrecisionExhausted` instead of silently losing digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath as mp

from .errors import DegenerateAngle, PrecisionExhausted

DEFAULT_BITS = 256
_GUARD = 16

# cache of sqrt(D) values keyed by (D, precision)
_SQRT_CACHE: dict = {}


def _sqrt_mpf(D: int, prec: int):
    key = (D, prec)
    got = _SQRT_CACHE.get(key)
    if got is None:
        if len(_SQRT_CACHE) > 512:
            _SQRT_CACHE.clear()
        with mp.workprec(prec):
            got = mp.sqrt(D)
        _SQRT_CACHE[key] = got
    return got


def _square_part(D: int) -> tuple[int, int]:
    """Split D = s*s*core with core squarefree.  Returns (s, core)."""
    # cheap trial division first; full factorization only if a large core remains
    s = 1
    for p in (2, 3, 5, 7, 11, 13):
        pp = p * p
        while D % pp == 0:
            D //= pp
            s *= p
    if D < 4:
        return s, D
    r = math.isqrt(D)
    if r * r == D:
        return s * r, 1
    if D < 2_000_000:
        p = 17
        while p * p <= D:
            pp = p * p
            while D % pp == 0:
                D //= pp
                s *= p
            p += 2
        return s, D
    if D <= 10 ** 12:
        from sympy import factorint  # deferred: only large constructors pay the import

        for p, e in factorint(D).items():
            if e >= 2:
                s *= p ** (e // 2)
                D //= p ** (2 * (e // 2))
        return s, D
    # huge discriminants (random CF generators): strip small squares only and
    # accept a possibly non-squarefree core; all orbit algorithms stay exact,
    # only cross-construction canonical equality is weakened
    p = 17
    while p < 10 ** 4:
        pp = p * p
        while D % pp == 0:
            D //= pp
            s *= p
        p += 2
    return s, D


def _sign_surd(u: int, v: int, D: int) -> int:
    """Exact sign of u + v*sqrt(D) for nonsquare D > 0."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0 or (u > 0) == (v > 0):
        return 1 if v > 0 else -1
    # mixed signs: compare u^2 against v^2 D (never equal, D nonsquare)
    if u > 0:
        return 1 if u * u > v * v * D else -1
    return 1 if v * v * D > u * u else -1


def _floor_surd(u: int, v: int, D: int, w: int) -> int:
    """Exact floor of (u + v*sqrt(D))/w, w > 0."""
    r = math.isqrt(v * v * D)
    t = (u + (r if v > 0 else -r - 1)) // w
    # correct the isqrt seed by exact sign tests (at most a couple of steps)
    while _sign_surd(u - (t + 1) * w, v, D) >= 0:
        t += 1
    while _sign_surd(u - t * w, v, D) < 0:
        t -= 1
    return t


@dataclass(frozen=True)
class Angle:
    """A number in one of three exact-enough representations.

    Use the constructors :meth:`rational`, :meth:`quadratic`, :meth:`real`
    rather than instantiating directly; they normalize to the canonical form
    that equality and hashing rely on.
    """

    kind: str
    p: int = 0
    q: int = 1
    u: int = 0
    v: int = 0
    D: int = 0
    w: int = 1
    x: object = None
    bits: int = 0

    @staticmethod
    def rational(p: int, q: int) -> "Angle":
        if q == 0:
            raise DegenerateAngle("zero denominator")
        if q < 0:
            p, q = -p, -q
        g = math.gcd(p, q)
        return Angle(kind="rational", p=p // g, q=q // g)

    @staticmethod
    def quadratic(u: int, v: int, D: int, w: int) -> "Angle":
        if w == 0:
            raise DegenerateAngle("zero denominator")
        if D <= 0:
            raise DegenerateAngle("D must be positive")
        s, core = _square_part(D)
        v *= s
        D = core
        if D == 1 or v == 0:
            raise DegenerateAngle("D is a perfect square; use a rational angle")
        if w < 0:
            u, v, w = -u, -v, -w
        g = math.gcd(math.gcd(abs(u), abs(v)), w)
        return Angle(kind="quadratic", u=u // g, v=v // g, D=D, w=w // g)

    @staticmethod
    def real(x, bits: int = DEFAULT_BITS) -> "Angle":
        if bits < 24:
            raise PrecisionExhausted("real angles need at least 24 bits", required_bits=24)
        with mp.workprec(bits):
            val = mp.mpf(x) if not isinstance(x, str) else mp.mpf(x)
        return Angle(kind="real", x=val, bits=bits)

    # -- exact integer helpers ------------------------------------------------

    def floor(self) -> int:
        if self.kind == "rational":
            return self.p // self.q
        if self.kind == "quadratic":
            return _floor_surd(self.u, self.v, self.D, self.w)
        with mp.workprec(self.bits):
            return int(mp.floor(self.x))

    def is_zero(self) -> bool:
        if self.kind == "rational":
            return self.p == 0
        if self.kind == "quadratic":
            return False
        return self.x == 0

    def to_mpf(self, bits: int = DEFAULT_BITS):
        """Deterministic evaluation at the requested precision."""
        with mp.workprec(bits + _GUARD):
            if self.kind == "rational":
                val = mp.mpf(self.p) / self.q
            elif self.kind == "quadratic":
                val = (self.u + self.v * _sqrt_mpf(self.D, bits + _GUARD)) / self.w
            else:
                val = mp.mpf(self.x)
        with mp.workprec(bits):
            return +val

    def __float__(self) -> float:
        return float(self.to_mpf(64))

    def describe(self) -> str:
        """Canonical text form, parseable by :func:`parse_angle`."""
        if self.kind == "rational":
            return f"{self.p}/{self.q}"
        if self.kind == "quadratic":
            return f"quad:{self.u},{self.v},{self.D},{self.w}"
        dps = int(self.bits * 0.30103) + 2
        return "real:" + mp.nstr(self.x, dps)


def frac(x: Angle) -> Angle:
    """x - floor(x), same representation kind."""
    if x.kind == "rational":
        return Angle(kind="rational", p=x.p % x.q, q=x.q)
    if x.kind == "quadratic":
        f = x.floor()
        return Angle(kind="quadratic", u=x.u - f * x.w, v=x.v, D=x.D, w=x.w)
    with mp.workprec(x.bits):
        return Angle(kind="real", x=x.x - mp.floor(x.x), bits=x.bits)


def mul_mod1(theta: Angle, m: int) -> Angle:
    """Exact frac(m*theta), preserving the representation kind."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    if theta.kind == "rational":
        return Angle(kind="rational", p=0, q=1) if theta.q == 1 else frac(
            Angle.rational(theta.p * m, theta.q)
        )
    if theta.kind == "quadratic":
        g = math.gcd(m, theta.w)
        u, v, w = theta.u * (m // g), theta.v * (m // g), theta.w // g
        return frac(Angle(kind="quadratic", u=u, v=v, D=theta.D, w=w))
    new_bits = theta.bits - max(0, m.bit_length() - 1)
    if new_bits < 24:
        raise PrecisionExhausted(
            f"multiplying by {m} leaves {new_bits} confident bits",
            required_bits=theta.bits + 24 - new_bits,
        )
    with mp.workprec(theta.bits):
        y = theta.x * m
        return Angle(kind="real", x=y - mp.floor(y), bits=new_bits)


def _floor_mul(theta: Angle, n: int) -> int:
    """Exact floor(n*theta) (parity feeds the divisor phase convention)."""
    if theta.kind == "rational":
        return (n * theta.p) // theta.q
    if theta.kind == "quadratic":
        return _floor_surd(n * theta.u, n * theta.v, theta.D, theta.w)
    with mp.workprec(theta.bits):
        return int(mp.floor(theta.x * n))


def angle_reduce(theta: Angle, n: int, bits: int = DEFAULT_BITS):
    """High-precision frac(n*theta) with relative error <= 2^(1-bits).

    Computed from the exact representation: modular arithmetic for rationals,
    surd arithmetic for quadratics.  For real-kind angles the stored mantissa
    must cover bits + log2(n), else PrecisionExhausted.
    """
    if bits < 53:
        raise ValueError("bits must be at least 53")
    if n == 0:
        return mp.mpf(0)
    if theta.kind == "rational":
        r = (n * theta.p) % theta.q
        with mp.workprec(bits + _GUARD):
            val = mp.mpf(r) / theta.q
        with mp.workprec(bits):
            return +val
    if theta.kind == "quadratic":
        return mul_mod1(theta, n).to_mpf(bits)
    need = bits + max(0, n.bit_length())
    if theta.bits < need:
        raise PrecisionExhausted(
            f"stored {theta.bits} bits cannot reduce n = {n} at {bits} bits",
            required_bits=need,
        )
    with mp.workprec(theta.bits):
        y = theta.x * n
        val = y - mp.floor(y)
    with mp.workprec(bits):
        return +val


@dataclass
class CFExpansion:
    """Partial quotients a_1..a_k with the Gauss orbit theta_0, theta_1, ...

    The orbit holds one more value than there are quotients for irrational
    angles (the state after the last step); for rational angles it stops at
    the last nonzero iterate and ``terminated`` is set.  ``exhausted`` marks
    a real-kind expansion stopped by the precision floor.
    """

    theta: Angle
    partial_quotients: list
    gauss_orbit: list
    terminated: bool
    exhausted: bool = False


class _SurdOrbit:
    """Exact Gauss-map state machine for a quadratic irrational in (0, 1).

    State (P + sqrt(NN))/Q with the invariant Q | NN - P^2; NN is constant
    along the orbit so states repeat and all integers stay bounded.
    """

    def __init__(self, theta: Angle):
        u, v, D, w = theta.u, theta.v, theta.D, theta.w
        if v > 0:
            P, NN, Q = u, v * v * D, w
        else:
            P, NN, Q = -u, v * v * D, -w
        if (NN - P * P) % Q:
            P *= abs(Q)
            NN *= Q * Q
            Q *= abs(Q)
        self.P, self.NN, self.Q = P, NN, Q
        self._r = math.isqrt(self.NN)

    def _floor_state(self, P: int, Q: int) -> int:
        if Q > 0:
            return (P + self._r) // Q
        return (-P - self._r - 1) // (-Q)

    def key(self):
        return (self.P, self.Q)

    def step(self) -> int:
        """Advance state -> frac(1/state); returns the partial quotient."""
        P, NN, Q = self.P, self.NN, self.Q
        Q2 = (NN - P * P) // Q
        P2 = -P
        a = self._floor_state(P2, Q2)
        self.P = P2 - a * Q2
        self.Q = Q2
        return a

    def value_mpf(self, bits: int):
        with mp.workprec(bits + _GUARD):
            val = (self.P + _sqrt_mpf(self.NN, bits + _GUARD)) / self.Q
        with mp.workprec(bits):
            return +val


def cf_expand(theta: Angle, depth: int, bits: int = DEFAULT_BITS) -> CFExpansion:
    """Continued-fraction expansion of frac(theta) to ``depth`` quotients."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    t = frac(theta)
    if t.is_zero():
        raise DegenerateAngle("cf_expand of zero")

    if t.kind == "rational":
        quots, orbit = [], []
        p, q = t.p, t.q
        with mp.workprec(bits):
            while p != 0 and len(quots) < depth:
                orbit.append(mp.mpf(p) / q)
                a, r = divmod(q, p)
                quots.append(a)
                p, q = r, p
        return CFExpansion(theta, quots, orbit, terminated=(p == 0))

    if t.kind == "quadratic":
        orb = _SurdOrbit(t)
        quots, orbit = [], []
        for _ in range(depth):
            orbit.append(orb.value_mpf(bits))
            quots.append(orb.step())
        orbit.append(orb.value_mpf(bits))
        return CFExpansion(theta, quots, orbit, terminated=False)

    # real kind: floating Gauss orbit with an explicit precision floor
    floor_val = mp.mpf(2) ** (-(t.bits // 2))
    quots, orbit = [], []
    exhausted = False
    with mp.workprec(t.bits):
        x = mp.mpf(t.x)
        for _ in range(depth):
            if x < floor_val:
                exhausted = True
                break
            orbit.append(x)
            y = 1 / x
            a = int(mp.floor(y))
            quots.append(a)
            x = y - a
        else:
            orbit.append(x)
    return CFExpansion(theta, quots, orbit, terminated=False, exhausted=exhausted)


def gauss_cycle(theta: Angle, bits: int = DEFAULT_BITS, max_steps: int = 8192):
    """Preperiodic and periodic orbit values of a quadratic angle.

    Returns (prefix, cycle): lists of high-precision orbit values theta_n with
    the Gauss orbit equal to prefix followed by cycle repeated forever.
    """
    t = frac(theta)
    if t.kind != "quadratic":
        raise ValueError("gauss_cycle needs a quadratic angle")
    orb = _SurdOrbit(t)
    seen: dict = {}
    vals = []
    for i in range(max_steps):
        k = orb.key()
        if k in seen:
            j = seen[k]
            return vals[:j], vals[j:]
        seen[k] = i
        vals.append(orb.value_mpf(bits))
        orb.step()
    raise PrecisionExhausted(f"no cycle within {max_steps} Gauss steps")


@dataclass
class Convergents:
    """Approximant pairs (p_n, q_n), n = 1..k, from a CF expansion."""

    pairs: list

    def fractions(self):
        return [(p, q) for p, q in self.pairs]


def convergents(cf: CFExpansion) -> Convergents:
    if not cf.partial_quotients:
        raise ValueError("empty expansion")
    pairs = []
    p0, q0, p1, q1 = 1, 0, 0, 1  # (p_{-1}, q_{-1}), (p_0, q_0)
    for a in cf.partial_quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        pairs.append((p1, q1))
    return Convergents(pairs)


def parse_angle(text: str, bits: int = DEFAULT_BITS) -> Angle:
    """Parse "p/q", "quad:u,v,D,w", or a decimal literal (real kind)."""
    s = text.strip()
    if s.startswith("quad:"):
        parts = s[5:].split(",")
        if len(parts) != 4:
            raise DegenerateAngle(f"quad form needs 4 integers: {text!r}")
        try:
            u, v, D, w = (int(x) for x in parts)
        except ValueError as e:
            raise DegenerateAngle(f"bad quad integers in {text!r}") from e
        return Angle.quadratic(u, v, D, w)
    if "/" in s:
        num, _, den = s.partition("/")
        try:
            return Angle.rational(int(num), int(den))
        except ValueError as e:
            raise DegenerateAngle(f"bad rational {text!r}") from e
    if s.startswith("real:"):
        s = s[5:]
    try:
        if "." in s or "e" in s or "E" in s:
            return Angle.real(s, bits)
        return Angle.rational(int(s), 1)
    except ValueError as e:
        raise DegenerateAngle(f"cannot parse angle {text!r}") from e


GOLDEN = Angle.quadratic(-1, 1, 5, 2)
SQRT2M1 = Angle.quadratic(-1, 1, 2, 1)
