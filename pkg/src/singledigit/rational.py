"""Exact rational arithmetic with magnitude caps and guarded exponentiation.

Every value in this package is a `fractions.Fraction`: arbitrary precision,
always stored in lowest terms with a positive denominator, zero as 0/1.
No floating point is used anywhere.

Operations that can produce an unusable result (division by zero, a
non-integer or oversized exponent, a value outside the configured caps)
raise a subclass of `EvalDiscard`.  A discard means "this candidate
expression is invalid, drop it", never "abort the run".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction

# discard reasons, also used as the machine-readable labels in reports
DIV_BY_ZERO = "div-by-zero"
POW_DOMAIN = "pow-domain"
OVERFLOW = "overflow"


class EvalDiscard(ArithmeticError):
    """A candidate expression must be discarded (not a crash)."""

    reason = "discard"


class DivByZero(EvalDiscard):
    reason = DIV_BY_ZERO


class PowDomain(EvalDiscard):
    reason = POW_DOMAIN


class Overflow(EvalDiscard):
    reason = OVERFLOW


@dataclass(frozen=True)
class Caps:
    """Magnitude bounds that keep the search space finite.

    Values whose numerator or denominator exceed the bounds are pruned;
    exponents beyond `max_exponent_magnitude` are rejected.  Caps are
    configuration, not constants.
    """

    max_abs_numerator: int = 10**12
    max_denominator: int = 10**6
    max_exponent_magnitude: int = 20

    def __post_init__(self):
        if self.max_abs_numerator <= 0 or self.max_denominator <= 0:
            raise ValueError("caps must be strictly positive")
        if not 0 < self.max_exponent_magnitude <= 64:
            raise ValueError("max_exponent_magnitude must be in 1..64")


DEFAULT_CAPS = Caps()


def rat_add(a: Fraction, b: Fraction) -> Fraction:
    """Exact normalized sum."""
    return a + b


def rat_sub(a: Fraction, b: Fraction) -> Fraction:
    """Exact normalized difference."""
    return a - b


def rat_mul(a: Fraction, b: Fraction) -> Fraction:
    """Exact normalized product."""
    return a * b


def rat_div(a: Fraction, b: Fraction) -> Fraction:
    """Exact normalized quotient; raises DivByZero when b = 0."""
    if not b:
        raise DivByZero("division by zero")
    return a / b


def rat_within(v: Fraction, caps: Caps) -> bool:
    """True iff |numerator| and denominator fit within the caps."""
    return (
        -caps.max_abs_numerator <= v.numerator <= caps.max_abs_numerator
        and v.denominator <= caps.max_denominator
    )


def rat_pow(
    base: Fraction,
    exp: Fraction,
    caps: Caps = DEFAULT_CAPS,
    allow_negative: bool = False,
) -> Fraction:
    """Exact base**exp for integer exponents within the caps.

    Rejected with PowDomain: fractional exponents, 0**0, exponents whose
    magnitude exceeds `caps.max_exponent_magnitude`, and negative exponents
    unless `allow_negative` (then the result is the reciprocal power and a
    zero base is rejected).  Raises Overflow as soon as any partial product
    of the square-and-multiply loop leaves the caps, so no intermediate
    larger than the capped result is ever built.
    """
    if exp.denominator != 1:
        raise PowDomain("exponent is not an integer")
    e = exp.numerator
    if e < 0 and not allow_negative:
        raise PowDomain("negative exponent")
    if abs(e) > caps.max_exponent_magnitude:
        raise PowDomain("exponent magnitude %d exceeds cap" % abs(e))
    n, d = base.numerator, base.denominator
    if e == 0:
        if n == 0:
            raise PowDomain("0**0")
        return Fraction(1)
    if e < 0:
        if n == 0:
            raise PowDomain("0 raised to a negative exponent")
        n, d = (d, n) if n > 0 else (-d, -n)
        e = -e
    if n == 0:
        return Fraction(0)
    # cheap magnitude pre-check: 2**(bitlen-1) <= |n|, so this cannot
    # reject a result that would fit
    if (abs(n).bit_length() - 1) * e > caps.max_abs_numerator.bit_length():
        raise Overflow("power numerator exceeds cap")
    if (d.bit_length() - 1) * e > caps.max_denominator.bit_length():
        raise Overflow("power denominator exceeds cap")
    rn, rd = 1, 1
    bn, bd = n, d
    maxnum, maxden = caps.max_abs_numerator, caps.max_denominator
    while e:
        if e & 1:
            rn *= bn
            rd *= bd
            if not (-maxnum <= rn <= maxnum) or rd > maxden:
                raise Overflow("power exceeds caps")
        e >>= 1
        if e:
            bn *= bn
            bd *= bd
            if not (-maxnum <= bn <= maxnum) or bd > maxden:
                raise Overflow("power exceeds caps")
    # n, d coprime implies rn, rd coprime: no reduction needed
    return Fraction(rn, rd)
