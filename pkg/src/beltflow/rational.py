"""Exact rational numbers and binary expansions.

The package-wide numeric type is ``Rational``, an alias of
:class:`fractions.Fraction`: arbitrary-precision, always reduced, exact
comparison and arithmetic.  Solver denominators grow quickly (7, 55, 504, ...
show up in small networks already), so fixed-width arithmetic would be a
correctness bug, not an optimization.

Binary expansions here are the eventually-periodic kind: every rational in
[0, 1) is 0.prefix(period)^w for a finite prefix and a nonempty repeating
period.  The canonical form returned by :func:`binary_expansion` uses the
earliest possible period start and the shortest period; terminating
expansions get the all-zero period, e.g. 1/2 -> prefix "1", period "0".
"""

import re
from fractions import Fraction

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"[+-]?\d+(?:/\d+)?")


def make(num, den=1):
    """Reduced rational num/den.  Raises ZeroDivisionError when den == 0."""
    return Fraction(num, den)


def parse_rational(text):
    """Parse 'p/q' or 'p' with optional sign into a Rational.

    Anything else (floats, names, empty) raises ValueError.  The denominator,
    when present, must be a positive integer literal.
    """
    s = text.strip()
    if not _RATIONAL_RE.fullmatch(s):
        raise ValueError("not a rational literal: %r" % (text,))
    if "/" in s:
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError("zero denominator in %r" % (text,))
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(r):
    """Render as 'p/q', or just 'p' when the denominator is 1."""
    if r.denominator == 1:
        return str(r.numerator)
    return "%d/%d" % (r.numerator, r.denominator)


def binary_expansion(r, period_starts_with_one=False):
    """Expansion of r in [0, 1) as (prefix, period), two tuples of bits.

    binary(r) = 0.prefix (period)^w with the earliest period start and the
    minimal period length.  Dyadic rationals terminate and get period (0,);
    with period_starts_with_one=True they are rewritten to the all-ones tail
    instead (1/2 -> prefix (0,), period (1,)), and other rationals have the
    period rotated to begin with its first 1 bit, extending the prefix by the
    skipped bits.  r == 0 cannot satisfy period_starts_with_one.
    """
    if not (ZERO <= r < ONE):
        raise ValueError("binary_expansion needs 0 <= r < 1, got %s" % (r,))
    p, q = r.numerator, r.denominator
    seen = {}  # remainder -> index of the bit it produces
    bits = []
    n = p
    while n not in seen:
        seen[n] = len(bits)
        n *= 2
        bits.append(n // q)
        n %= q
    start = seen[n]
    prefix, period = bits[:start], bits[start:]

    if period_starts_with_one and 1 not in period:
        # Terminating expansion: trade the final 1 for an all-ones tail,
        # 0.x1(0)^w == 0.x0(1)^w.  Impossible for r == 0.
        if r == 0:
            raise ValueError("0 has no expansion with a 1 in the period")
        assert prefix and prefix[-1] == 1
        prefix = prefix[:-1] + [0]
        period = [1]
    elif period_starts_with_one and period[0] != 1:
        shift = period.index(1)
        prefix = prefix + period[:shift]
        period = period[shift:] + period[:shift]
    return tuple(prefix), tuple(period)


def from_expansion(prefix, period):
    """Exact value of 0.prefix(period)^w; inverse of binary_expansion."""
    if not period:
        raise ValueError("period must be nonempty")
    a, m = len(prefix), len(period)
    x = 0
    for b in prefix:
        x = 2 * x + b
    y = 0
    for b in period:
        y = 2 * y + b
    return (Fraction(x) + Fraction(y, 2**m - 1)) / 2**a


def bit(r, k):
    """Bit of weight 2^-k (k >= 1) of r in [0, 1].

    Uses the expansion that does not end in all ones, so dyadic rationals
    read off their terminating form; by the same rule r == 1 is treated as
    1.000... and every fractional bit is 0.
    """
    if not (ZERO <= r <= ONE):
        raise ValueError("bit needs 0 <= r <= 1, got %s" % (r,))
    if k < 1:
        raise ValueError("bit index must be >= 1, got %s" % (k,))
    return ((r.numerator << k) // r.denominator) & 1
