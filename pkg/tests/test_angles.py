"""Exact continued-fraction machinery: expansions, convergents, mod-1 algebra.

Everything here is checked with exact integer arithmetic; no floating
tolerance hides a wrong convergent.
"""

import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from siegelab.angles import (
    GOLDEN,
    SQRT2M1,
    Angle,
    angle_reduce,
    cf_expand,
    convergents,
    frac,
    mul_mod1,
    parse_angle,
)
from siegelab.errors import DegenerateAngle, PrecisionExhausted
from siegelab.experiments import quadratic_angles


# exact sign of A + B*sqrt(D) for integers A, B and nonsquare D > 0
def surd_sign(A: int, B: int, D: int) -> int:
    if B == 0:
        return (A > 0) - (A < 0)
    if A == 0:
        return (B > 0) - (B < 0)
    if A > 0 and B > 0:
        return 1
    if A < 0 and B < 0:
        return -1
    lhs, rhs = A * A, B * B * D
    if A > 0:  # B < 0
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


def cmp_abs_diff(theta: Angle, a: int, b: int, bound: Fraction) -> int:
    """Exact sign of |theta - a/b| - bound for quadratic theta."""
    assert theta.kind == "quadratic"
    A = theta.u * b - a * theta.w
    B = theta.v * b
    if surd_sign(A, B, theta.D) < 0:
        A, B = -A, -B
    r, s = bound.numerator, bound.denominator
    return surd_sign(A * s - r * theta.w * b, B * s, theta.D)


def fib(n: int) -> int:
    a, b = 1, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


# ---------------------------------------------------------------------------
# expansions

def test_golden_all_ones():
    cf = cf_expand(GOLDEN, 30)
    assert cf.partial_quotients == [1] * 30
    assert not cf.terminated


def test_sqrt2_minus_1_all_twos():
    cf = cf_expand(SQRT2M1, 30)
    assert cf.partial_quotients == [2] * 30


def test_rational_terminates():
    cf = cf_expand(Angle.rational(2, 7), 64)
    assert cf.partial_quotients == [3, 2]
    assert cf.terminated
    cv = convergents(cf)
    assert cv.pairs[-1] == (2, 7)


def test_zero_angle_degenerate():
    with pytest.raises(DegenerateAngle):
        cf_expand(Angle.rational(0, 1), 8)


def test_gauss_orbit_step_relation():
    cf = cf_expand(SQRT2M1, 20)
    with mp.workprec(80):
        for a, b in zip(cf.gauss_orbit, cf.gauss_orbit[1:]):
            step = 1 / a
            assert abs((step - mp.floor(step)) - b) < mp.mpf(2) ** -60


# ---------------------------------------------------------------------------
# frac and normalization

def test_frac_examples():
    assert frac(Angle.rational(11, 4)) == Angle.rational(3, 4)
    assert frac(Angle.rational(-1, 4)) == Angle.rational(3, 4)
    one_plus = Angle.quadratic(1, 1, 5, 2)  # (1+sqrt5)/2
    assert frac(one_plus) == GOLDEN


def test_quadratic_normalization():
    # (2 + 2*sqrt(8))/4 = (1 + 2*sqrt(2))/2
    a = Angle.quadratic(2, 2, 8, 4)
    assert (a.u, a.v, a.D, a.w) == (1, 2, 2, 2)
    with pytest.raises(DegenerateAngle):
        Angle.quadratic(1, 1, 9, 2)  # perfect-square D is rational
    with pytest.raises(DegenerateAngle):
        Angle.rational(1, 0)


# ---------------------------------------------------------------------------
# convergents: the three exact invariants

def _check_invariants(theta: Angle, depth: int = 40):
    cf = cf_expand(theta, depth)
    cv = convergents(cf)
    seq = [(0, 1)] + cv.pairs
    for n in range(1, len(seq)):
        p1, q1 = seq[n]
        p0, q0 = seq[n - 1]
        assert p1 * q0 - p0 * q1 == (-1) ** (n - 1)
        assert math.gcd(p1, q1) == 1
        assert q1 >= fib(n)
        if n >= 2:
            assert q1 > seq[n - 1][1] or n == 1
    if theta.kind == "quadratic":
        # (a): 1/(2 q_n q_{n+1}) < |theta - p_n/q_n| < 1/(q_n q_{n+1}), exact
        for n in range(1, len(cv.pairs)):
            p, q = cv.pairs[n - 1]
            q_next = cv.pairs[n][1]
            assert cmp_abs_diff(theta, p, q, Fraction(1, 2 * q * q_next)) > 0
            assert cmp_abs_diff(theta, p, q, Fraction(1, q * q_next)) < 0


def test_convergent_invariants_fixed():
    assert [q for _, q in convergents(cf_expand(GOLDEN, 6)).pairs] == [1, 2, 3, 5, 8, 13]
    for t in (GOLDEN, SQRT2M1, Angle.rational(355, 452), Angle.rational(2, 7)):
        _check_invariants(t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_convergent_invariants_random(seed):
    t = quadratic_angles(1, seed=seed)[0]
    _check_invariants(t, depth=30)


def test_legendre_membership():
    # fact (c): |theta - p/q| < 1/(2q^2) forces p/q to be a convergent
    for t in (GOLDEN, SQRT2M1, quadratic_angles(1, seed=77)[0]):
        cv = convergents(cf_expand(t, 20))
        members = set(cv.pairs)
        for p, q in cv.pairs[:12]:
            if cmp_abs_diff(t, p, q, Fraction(1, 2 * q * q)) < 0:
                assert (p, q) in members
        # nearby non-convergents must fail the hypothesis
        for p, q in cv.pairs[2:10]:
            if (p + 1, q) not in members:
                assert cmp_abs_diff(t, p + 1, q, Fraction(1, 2 * q * q)) > 0


# ---------------------------------------------------------------------------
# mul_mod1

def test_mul_mod1_examples():
    assert mul_mod1(GOLDEN, 1) == GOLDEN
    assert mul_mod1(GOLDEN, 2) == Angle.quadratic(-2, 1, 5, 1)  # sqrt5 - 2
    assert mul_mod1(Angle.rational(2, 7), 3) == Angle.rational(6, 7)


def test_mul_mod1_matches_float():
    with mp.workprec(192):
        for t in (GOLDEN, SQRT2M1, quadratic_angles(1, seed=5)[0]):
            tv = t.to_mpf(192)
            for m in (2, 3, 7, 64):
                direct = m * tv - mp.floor(m * tv)
                exact = mul_mod1(t, m).to_mpf(192)
                assert abs(direct - exact) < mp.mpf(2) ** -150


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 9), st.integers(2, 9))
def test_mul_mod1_composes(seed, m, n):
    t = quadratic_angles(1, seed=seed)[0]
    assert mul_mod1(mul_mod1(t, m), n) == mul_mod1(t, m * n)


# ---------------------------------------------------------------------------
# angle_reduce

def test_angle_reduce_zero_and_period():
    assert angle_reduce(GOLDEN, 0, 64) == 0
    assert angle_reduce(Angle.rational(2, 7), 7, 64) == 0
    assert angle_reduce(Angle.rational(2, 7), 3, 64) == mp.mpf(6) / 7


def test_angle_reduce_fibonacci_decay():
    # frac(F_k g) sits at distance g^k from an integer, between
    # 1/(2 F_{k+1}) and 1/F_{k+1}
    for k in range(5, 26):
        v = angle_reduce(GOLDEN, fib(k), 96)
        d = min(v, 1 - v)
        assert 1.0 / (2 * fib(k + 1)) < float(d) < 1.0 / fib(k + 1)


def test_angle_reduce_real_kind_exhaustion():
    t = Angle.real(mp.mpf(1) / mp.sqrt(mp.mpf(2)), 64)
    with pytest.raises(PrecisionExhausted):
        angle_reduce(t, 2 ** 70, 64)


# ---------------------------------------------------------------------------
# parsing and real kind

def test_parse_angle_forms():
    assert parse_angle("2/7") == Angle.rational(2, 7)
    assert parse_angle("quad:-1,1,5,2") == GOLDEN
    r = parse_angle("0.7390851332151607")
    assert r.kind == "real"
    assert abs(float(r.to_mpf(53)) - 0.7390851332151607) < 1e-15


def test_parse_angle_malformed():
    with pytest.raises((ValueError, DegenerateAngle)):
        parse_angle("not-an-angle")


def test_real_kind_expansion_flags_exhaustion():
    t = Angle.real(mp.mpf("0.318309886183790671537767526745"), 96)
    cf = cf_expand(t, 64)
    assert all(a >= 1 for a in cf.partial_quotients)
    assert cf.exhausted  # 96 bits cannot honestly support 64 quotients
