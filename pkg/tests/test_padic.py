import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cuspidal.padic import (
    FieldSpec,
    PPower,
    PrecisionLossError,
    binomial_scalar,
    digit_sum,
    embed_rational,
    factorial_valuation,
    falling_factorial,
    field_arithmetic,
    norm,
    rational_valuation,
)

Q5 = FieldSpec(p=5, precision_cap=20)
Q5RAM = FieldSpec(p=5, e=2, precision_cap=20)


def test_fieldspec_rejects_bad_parameters():
    with pytest.raises(ValueError):
        FieldSpec(p=6)
    with pytest.raises(ValueError):
        FieldSpec(p=5, e=0)
    with pytest.raises(ValueError):
        FieldSpec(p=5, precision_cap=0)


def test_embed_half_in_Z5():
    x = embed_rational(Q5, 1, 2)
    assert x.valuation() == 0
    # 1/2 = 3 + 2*5 + 2*5^2 + ...  (long-division oracle mod 5^k below)
    assert x.unit_digits(6) == (3, 2, 2, 2, 2, 2)
    val = sum(d * 5**i for i, d in enumerate(x.unit_digits(20)))
    assert (2 * val) % 5**20 == 1


def test_embed_p_and_zero():
    assert embed_rational(Q5, 5, 1).valuation() == 1
    z = embed_rational(Q5, 0, 7)
    assert z.is_exactly_zero()
    assert z.valuation() is None  # +infinity
    with pytest.raises(ZeroDivisionError):
        embed_rational(Q5, 3, 0)


def test_add_and_mul_trivia():
    half = embed_rational(Q5, 1, 2)
    one = field_arithmetic(half, half, "add")
    assert one == Q5.one()
    assert one.valuation() == 0
    p = Q5.exact(5)
    assert (p * p).valuation() == 2


def test_cancellation_signals_precision_loss():
    x = embed_rational(Q5, 7, 3)
    d = field_arithmetic(x, x, "sub")
    assert d.is_precision_loss()
    assert d.valuation_lower_bound() == Q5.precision_cap
    with pytest.raises(PrecisionLossError):
        d.valuation()
    with pytest.raises(PrecisionLossError):
        Q5.one() / d


def test_norm_values():
    assert norm(Q5.exact(5)) == PPower(5, Fraction(-1))
    assert norm(Q5.exact(7)) == PPower(5, Fraction(0))
    assert norm(Q5RAM.uniformizer()) == PPower(5, Fraction(-1, 2))
    assert norm(Q5.zero()).is_zero()


def test_ppower_comparisons():
    assert PPower(5, Fraction(-1)) < PPower(5, Fraction(0))
    assert PPower.zero(5) < PPower(5, Fraction(-10))
    assert PPower(5, Fraction(0)) <= 1
    assert PPower(5, Fraction(1, 2)) > 1


def test_ramified_arithmetic():
    pi = Q5RAM.uniformizer()
    assert (pi * pi).valuation() == 1
    assert (pi**3).valuation() == Fraction(3, 2)
    x = Q5RAM.exact(1, 2) + pi  # 1/2 + pi
    assert x.valuation() == 0
    inv = x.inverse()
    assert (x * inv) == Q5RAM.one()
    assert (x * inv - 1).is_exactly_zero()


def test_binomial_examples():
    assert binomial_scalar(Q5.exact(1, 2), 2) == Q5.exact(-1, 8)
    assert binomial_scalar(Q5.exact(1, 2), 2).valuation() == 0
    assert binomial_scalar(Q5.exact(9, 7), 0) == Q5.one()
    assert binomial_scalar(Q5.exact(4), 5).is_exactly_zero()


def test_factorial_valuation_examples():
    assert factorial_valuation(5, 25) == 6
    assert factorial_valuation(7, 0) == 0
    assert factorial_valuation(3, 9) == 4


def test_factorial_valuation_brute_force():
    for i in range(0, 10_001, 37):
        brute = 0
        q = 5
        while q <= i:
            brute += i // q
            q *= 5
        assert factorial_valuation(5, i) == brute


def test_digits_of_negative_valuation():
    x = Q5.exact(1, 5)
    assert x.valuation() == -1
    assert x.unit_digits(3) == (1, 0, 0)
    y = Q5RAM.exact(1, 1, -1)  # pi^(-1)
    assert y.valuation() == Fraction(-1, 2)
    assert y.unit_digits(2)[0] == 1


def test_is_rational_integer():
    assert Q5.exact(7).is_rational_integer()
    assert not Q5.exact(1, 2).is_rational_integer()
    assert not Q5RAM.uniformizer().is_rational_integer()
    with pytest.raises(PrecisionLossError):
        embed_rational(Q5, 3, 1).is_rational_integer()


rationals = st.fractions(
    min_value=Fraction(-1000), max_value=Fraction(1000), max_denominator=60
)


@settings(max_examples=300, deadline=None)
@given(rationals, rationals, rationals)
def test_ultrametric_inequality(a, b, c):
    spec = FieldSpec(p=3, precision_cap=30)
    xs = [spec.exact(q) for q in (a, b, c)]
    for x, y in [(xs[0], xs[1]), (xs[1], xs[2]), (xs[0], xs[2])]:
        s = x + y
        vx, vy = x.valuation(), y.valuation()
        vs = s.valuation()
        floor = min(v for v in (vx, vy) if v is not None) if (vx, vy) != (None, None) else None
        if floor is None:
            assert vs is None
            continue
        assert vs is None or vs >= floor
        if vx != vy:
            assert vs == floor


@settings(max_examples=200, deadline=None)
@given(rationals, rationals)
def test_embed_is_ring_morphism(a, b):
    spec = FieldSpec(p=7, precision_cap=24)
    ea, eb = spec.exact(a).capped(), spec.exact(b).capped()
    prod = ea * eb
    direct = spec.exact(a * b).capped()
    assert prod == direct  # equality at shared precision
    assert (spec.exact(a) + spec.exact(b)) == spec.exact(a + b)


@settings(max_examples=120, deadline=None)
@given(
    st.fractions(min_value=Fraction(-50), max_value=Fraction(50), max_denominator=24),
    st.integers(min_value=1, max_value=30),
)
def test_binomial_pascal(mu_q, n):
    spec = FieldSpec(p=5, precision_cap=40)
    mu = spec.exact(mu_q)
    lhs = binomial_scalar(mu, n)
    rhs = binomial_scalar(mu - 1, n - 1) + binomial_scalar(mu - 1, n)
    assert (lhs - rhs).is_exactly_zero()


def test_falling_factorial_matches_rational_oracle():
    mu = Q5.exact(1, 3)
    got = falling_factorial(mu, 4)
    expect = Fraction(1, 3) * Fraction(-2, 3) * Fraction(-5, 3) * Fraction(-8, 3)
    assert got == Q5.exact(expect)


def test_rational_valuation_and_digit_sum():
    assert rational_valuation(Fraction(50, 3), 5) == 2
    assert rational_valuation(Fraction(3, 25), 5) == -2
    assert rational_valuation(Fraction(0), 5) is None
    assert digit_sum(5, 26) == 2  # 101_5


def test_mixed_spec_rejected():
    with pytest.raises(ValueError):
        Q5.one() + Q5RAM.one()


def test_division_tracks_relative_precision():
    x = embed_rational(Q5, 3, 1)
    y = embed_rational(Q5, 2, 1)
    q = x / y
    assert q.relative_precision() == Q5.precision_cap
    assert q * y == x
