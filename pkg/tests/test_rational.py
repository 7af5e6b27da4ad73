from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beltflow.rational import (
    ONE,
    ZERO,
    binary_expansion,
    bit,
    format_rational,
    from_expansion,
    make,
    parse_rational,
)


def test_make_and_constants():
    assert make(3, 6) == Fraction(1, 2)
    assert make(5) == 5
    assert ZERO == 0 and ONE == 1
    with pytest.raises(ZeroDivisionError):
        make(1, 0)


@pytest.mark.parametrize(
    "text,value",
    [("0", ZERO), ("1", ONE), ("3/5", Fraction(3, 5)), ("-7/2", Fraction(-7, 2)),
     ("+4/6", Fraction(2, 3)), ("12", Fraction(12))],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["", "1/0", "0.5", "x", "1/2/3", "1 /2"])
def test_parse_rational_rejects(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(bad)


def test_format_roundtrip():
    for q in (ZERO, ONE, Fraction(6, 7), Fraction(-3, 4), Fraction(5)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(1, 2)) == "1/2"
    assert format_rational(Fraction(4, 2)) == "2"


# binary expansions: prefix + repeating period, earliest period start,
# shortest period.  All expected tuples below were worked out by long
# division on paper before being frozen here.
@pytest.mark.parametrize(
    "q,prefix,period",
    [
        (ZERO, (), (0,)),
        (Fraction(1, 2), (1,), (0,)),
        (Fraction(3, 8), (0, 1, 1), (0,)),
        (Fraction(1, 3), (), (0, 1)),
        (Fraction(2, 3), (), (1, 0)),
        (Fraction(5, 6), (1,), (1, 0)),
        (Fraction(1, 5), (), (0, 0, 1, 1)),
    ],
)
def test_binary_expansion_frozen(q, prefix, period):
    assert binary_expansion(q) == (prefix, period)


@pytest.mark.parametrize(
    "q,prefix,period",
    [
        (Fraction(1, 2), (0,), (1,)),          # 0.1(0) rewritten as 0.0(1)
        (Fraction(1, 3), (0,), (1, 0)),        # rotate the period to a 1
        (Fraction(2, 3), (), (1, 0)),          # already starts with a 1
        (Fraction(3, 8), (0, 1, 0), (1,)),
        (ONE - Fraction(1, 2**5), (1, 1, 1, 1, 0), (1,)),
    ],
)
def test_binary_expansion_period_starting_one(q, prefix, period):
    assert binary_expansion(q, period_starts_with_one=True) == (prefix, period)


def test_binary_expansion_domain():
    with pytest.raises(ValueError):
        binary_expansion(ONE)
    with pytest.raises(ValueError):
        binary_expansion(Fraction(-1, 2))
    with pytest.raises(ValueError):
        binary_expansion(ZERO, period_starts_with_one=True)


def test_from_expansion():
    assert from_expansion((1,), (1, 0)) == Fraction(5, 6)
    assert from_expansion((), (0, 1)) == Fraction(1, 3)
    assert from_expansion((0, 1, 1), (0,)) == Fraction(3, 8)
    with pytest.raises(ValueError):
        from_expansion((1, 0), ())


rationals_01 = st.integers(1, 400).flatmap(
    lambda q: st.integers(0, q - 1).map(lambda p: Fraction(p, q))
)


@given(rationals_01)
@settings(max_examples=200)
def test_expansion_roundtrip(q):
    prefix, period = binary_expansion(q)
    assert from_expansion(prefix, period) == q
    # canonical form: the period is minimal and starts as early as possible,
    # so a period of all zeros only ever has length 1
    if set(period) == {0}:
        assert period == (0,)


@given(rationals_01.filter(lambda q: q > 0))
@settings(max_examples=200)
def test_expansion_roundtrip_period_one(q):
    prefix, period = binary_expansion(q, period_starts_with_one=True)
    assert period[0] == 1
    assert from_expansion(prefix, period) == q


@given(rationals_01, st.integers(1, 40))
@settings(max_examples=200)
def test_bit_matches_expansion(q, k):
    prefix, period = binary_expansion(q)
    if k <= len(prefix):
        expected = prefix[k - 1]
    else:
        expected = period[(k - len(prefix) - 1) % len(period)]
    assert bit(q, k) == expected


def test_bit_domain():
    assert bit(ONE, 3) == 0  # 1.000..., nothing after the point
    with pytest.raises(ValueError):
        bit(Fraction(3, 2), 1)
    with pytest.raises(ValueError):
        bit(Fraction(1, 3), 0)
