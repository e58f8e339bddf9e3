"""Digit-symmetric identity families.

A family is a parametric expression in the digit a whose value is the
same constant for every a in its domain (or follows a stated closed form
in a, for the families whose constant shifts with the digit).  Checking
is exhaustive over the finite domain with exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .expr import Expr, Leaf, Node, Op, evaluate
from .rational import Caps, DEFAULT_CAPS

ALL_DIGITS = tuple(range(1, 10))
EVEN_DIGITS = (2, 4, 6, 8)
ODD_DIGITS = (1, 3, 5, 7, 9)


def f_n_10(n: int) -> Fraction:
    """The repunit series value 10**n + 10**(n-1) + ... + 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return Fraction((10 ** (n + 1) - 1) // 9)


@dataclass(frozen=True)
class Family:
    """One identity family: build the expression for digit a, compare with
    the expected exact value."""

    name: str
    formula: str
    builder: Callable[[int], Expr]
    expected: Callable[[int], Fraction]
    domain: tuple[int, ...] = ALL_DIGITS

    def expected_label(self) -> str:
        vals = [self.expected(a) for a in self.domain]
        if len(set(vals)) == 1:
            return str(vals[0])
        return ", ".join("a=%d: %s" % (a, v) for a, v in zip(self.domain, vals))


@dataclass(frozen=True)
class FamilyCheck:
    family: str
    passed: bool
    failed_digit: int | None = None
    actual: Fraction | None = None
    reason: str | None = None


def _rep(a: int, repeat: int = 1) -> Leaf:
    return Leaf(a, repeat)


def _add(*parts: Expr) -> Expr:
    e = parts[0]
    for p in parts[1:]:
        e = Node(Op.ADD, e, p)
    return e


def _sub(l: Expr, r: Expr) -> Expr:
    return Node(Op.SUB, l, r)


def _mul(l: Expr, r: Expr) -> Expr:
    return Node(Op.MUL, l, r)


def _div(l: Expr, r: Expr) -> Expr:
    return Node(Op.DIV, l, r)


def _const(v) -> Callable[[int], Fraction]:
    f = Fraction(v)
    return lambda a: f


def builtin_families() -> list[Family]:
    """The built-in families, in report order."""
    return [
        Family("FIVE", "(aa - a)/(a + a) = 5",
               lambda a: _div(_sub(_rep(a, 2), _rep(a)), _add(_rep(a), _rep(a))),
               _const(5)),
        Family("FIFTYFIVE", "(aaa - a)/(a + a) = 55",
               lambda a: _div(_sub(_rep(a, 3), _rep(a)), _add(_rep(a), _rep(a))),
               _const(55)),
        Family("SIX", "(aa + a)/(a + a) = 6",
               lambda a: _div(_add(_rep(a, 2), _rep(a)), _add(_rep(a), _rep(a))),
               _const(6)),
        Family("FIFTYSIX", "(aaa + a)/(a + a) = 56",
               lambda a: _div(_add(_rep(a, 3), _rep(a)), _add(_rep(a), _rep(a))),
               _const(56)),
        Family("ELEVEN_A", "aa/a = 11",
               lambda a: _div(_rep(a, 2), _rep(a)),
               _const(11)),
        Family("ELEVEN_B", "(aa + aa)/(a + a) = 11",
               lambda a: _div(_add(_rep(a, 2), _rep(a, 2)), _add(_rep(a), _rep(a))),
               _const(11)),
        Family("THIRTYSEVEN", "aaa/(a + a + a) = 37",
               lambda a: _div(_rep(a, 3), _add(_rep(a), _rep(a), _rep(a))),
               _const(37)),
        Family("HUNDRED", "(aaa - aa)/(a + a) = 100",
               lambda a: _div(_sub(_rep(a, 3), _rep(a, 2)), _add(_rep(a), _rep(a))),
               _const(100)),
        Family("HUNDRED_ONE", "aaaa/aa = 101",
               lambda a: _div(_rep(a, 4), _rep(a, 2)),
               _const(101)),
        Family("ONE_ELEVEN", "aaa/a = 111",
               lambda a: _div(_rep(a, 3), _rep(a)),
               _const(111), domain=tuple(range(2, 10))),
        Family("NINE_TWENTYFIVE", "(aaaaa - aa)/(aa + a) = 925",
               lambda a: _div(_sub(_rep(a, 5), _rep(a, 2)), _add(_rep(a, 2), _rep(a))),
               _const(925)),
        Family("NINE_TWENTYSIX", "(aaaaa + a)/(aa + a) = 926",
               lambda a: _div(_add(_rep(a, 5), _rep(a)), _add(_rep(a, 2), _rep(a))),
               _const(926)),
        Family("EVEN_HALF", "(a * a)/(a + a) = a/2",
               lambda a: _div(_mul(_rep(a), _rep(a)), _add(_rep(a), _rep(a))),
               lambda a: Fraction(a, 2), domain=EVEN_DIGITS),
        Family("ODD_MINUS", "(a * a - a)/(a + a) = (a - 1)/2",
               lambda a: _div(_sub(_mul(_rep(a), _rep(a)), _rep(a)),
                              _add(_rep(a), _rep(a))),
               lambda a: Fraction(a - 1, 2), domain=ODD_DIGITS),
        Family("ODD_PLUS", "(a * a + a)/(a + a) = (a + 1)/2",
               lambda a: _div(_add(_mul(_rep(a), _rep(a)), _rep(a)),
                              _add(_rep(a), _rep(a))),
               lambda a: Fraction(a + 1, 2), domain=ODD_DIGITS),
        Family("CASCADE_NEXT", "aaa + aaa/a = 111 * (a + 1)",
               lambda a: _add(_rep(a, 3), _div(_rep(a, 3), _rep(a))),
               lambda a: Fraction(111 * (a + 1)), domain=tuple(range(1, 9))),
        Family("CASCADE_MIX", "aaa + aaaa/aa = 111 * a + 101",
               lambda a: _add(_rep(a, 3), _div(_rep(a, 4), _rep(a, 2))),
               lambda a: Fraction(111 * a + 101), domain=tuple(range(1, 9))),
    ]


def check_family(family: Family, caps: Caps = DEFAULT_CAPS) -> FamilyCheck:
    """Pass iff the family's expression matches its expected value for
    every digit in the domain; the first failing digit is reported."""
    for a in family.domain:
        outcome = evaluate(family.builder(a), caps)
        if not outcome.ok:
            return FamilyCheck(family.name, False, failed_digit=a,
                               reason=outcome.reason)
        if outcome.value != family.expected(a):
            return FamilyCheck(family.name, False, failed_digit=a,
                               actual=outcome.value)
    return FamilyCheck(family.name, True)
