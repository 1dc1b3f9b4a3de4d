"""Exact dyadic arithmetic, checked against fractions.Fraction."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtq import Dyadic
from dtq.dyadic import ONE, ZERO

dyadics = st.builds(
    Dyadic,
    st.integers(min_value=-(2**80), max_value=2**80),
    st.integers(min_value=0, max_value=90),
)


def test_canonical_form():
    assert Dyadic(4, 3) == Dyadic(1, 1)
    assert Dyadic(4, 3).num == 1
    assert Dyadic(4, 3).exp == 1
    assert Dyadic(0, 57).exp == 0
    assert Dyadic(-6, 4) == Dyadic(-3, 3)
    # already-canonical values are untouched
    assert Dyadic(3, 2).num == 3 and Dyadic(3, 2).exp == 2
    # integers normalise to exponent zero only when the shift allows it
    assert Dyadic(8, 2) == Dyadic(2, 0)


def test_invalid_construction():
    with pytest.raises(ValueError):
        Dyadic(1, -1)
    with pytest.raises(TypeError):
        Dyadic(1.5, 0)
    with pytest.raises(TypeError):
        Dyadic(True, 0)


def test_arithmetic_examples():
    assert Dyadic(3, 2) + Dyadic(1, 1) == Dyadic(5, 2)
    assert Dyadic(1, 0) - Dyadic(1, 3) == Dyadic(7, 3)
    assert Dyadic(3, 2) * Dyadic(5, 1) == Dyadic(15, 3)
    assert -Dyadic(3, 2) == Dyadic(-3, 2)
    assert abs(Dyadic(-3, 2)) == Dyadic(3, 2)
    assert Dyadic(5, 3).half() == Dyadic(5, 4)
    assert Dyadic(5, 3).shifted(2) == Dyadic(5, 1)
    assert Dyadic(1, 2).shifted(4) == Dyadic(4, 0)
    assert Dyadic(1, 0).shifted(-3) == Dyadic(1, 3)


def test_integer_mixing():
    assert Dyadic(1, 1) + 1 == Dyadic(3, 1)
    assert 2 - Dyadic(1, 2) == Dyadic(7, 2)
    assert 3 * Dyadic(1, 1) == Dyadic(3, 1)
    with pytest.raises(TypeError):
        Dyadic(1, 0) + 0.5
    with pytest.raises(TypeError):
        Dyadic(1, 0) + True


@given(dyadics, dyadics)
def test_add_matches_fraction(a, b):
    assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()


@given(dyadics, dyadics)
def test_sub_matches_fraction(a, b):
    assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()


@given(dyadics, dyadics)
def test_mul_matches_fraction(a, b):
    assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()


@given(dyadics, dyadics)
def test_ordering_matches_fraction(a, b):
    assert (a < b) == (a.as_fraction() < b.as_fraction())
    assert (a <= b) == (a.as_fraction() <= b.as_fraction())
    assert (a == b) == (a.as_fraction() == b.as_fraction())


@given(dyadics)
def test_str_parse_roundtrip(a):
    assert Dyadic.parse(str(a)) == a


@given(dyadics)
def test_hash_consistent_with_fraction(a):
    assert hash(a) == hash(a.as_fraction())


def test_parse_examples():
    assert Dyadic.parse("3/2^2") == Dyadic(3, 2)
    assert Dyadic.parse(" -5 / 2^3 ") == Dyadic(-5, 3)
    assert Dyadic.parse("0/2^0") == ZERO
    for bad in ("", "3/4", "1/2^-1", "x/2^2", "1/2^2 junk"):
        with pytest.raises(ValueError):
            Dyadic.parse(bad)


def test_float_conversion():
    assert float(Dyadic(3, 2)) == 0.75
    assert float(Dyadic(1, 0)) == 1.0
    # correctly rounded even when the numerator exceeds 53 bits
    big = Dyadic(2**60 + 1, 60)
    assert float(big) == float(Fraction(2**60 + 1, 2**60))


def test_constants_and_bool():
    assert ZERO == Dyadic(0, 0)
    assert ONE == Dyadic(1, 0)
    assert not ZERO
    assert ONE
    assert math.isclose(float(ONE.half()), 0.5)


def test_comparison_across_exponents():
    # requires aligning to a common denominator, not comparing numerators
    assert Dyadic(3, 2) < Dyadic(7, 3)
    assert Dyadic(1, 10) < Dyadic(1, 0)
    assert Dyadic(-1, 0) < Dyadic(-1, 10)
