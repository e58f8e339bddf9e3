"""Expression trees over a single digit.

A tree is either a repdigit leaf (`Leaf(4, 3)` is 444) or a binary node
over one of +, -, *, /, ^.  All leaves of a tree must carry the same
digit.  The module provides exact evaluation against magnitude caps,
digit-occurrence counting, a canonical form (commutative operands sorted
under a fixed total order), and a bidirectional ASCII text format.

Grammar of the text format (also the on-disk corpus format):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '×' | '/') factor)*
    factor := atom ('^' atom)?
    atom   := repdigit | '(' expr ')'

'^' binds a single atom on each side, so chained '^' is a parse error;
whitespace is ignored; '×' is accepted on input, '*' is emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Union

from .rational import (
    Caps,
    DEFAULT_CAPS,
    DivByZero,
    EvalDiscard,
    Overflow,
    rat_pow,
    rat_within,
)


class Op(Enum):
    # definition order is the tag order used by the canonical total order
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    POW = "^"

    @property
    def symbol(self) -> str:
        return self.value


OP_INDEX = {op: i for i, op in enumerate(Op)}
PRECEDENCE = {Op.ADD: 1, Op.SUB: 1, Op.MUL: 2, Op.DIV: 2, Op.POW: 3}


@dataclass(frozen=True)
class Leaf:
    """A repdigit: `repeat` copies of `digit` read as a decimal numeral."""

    digit: int
    repeat: int = 1

    def __post_init__(self):
        if not 1 <= self.digit <= 9:
            raise ValueError("digit must be in 1..9")
        if self.repeat < 1:
            raise ValueError("repeat must be >= 1")


@dataclass(frozen=True)
class Node:
    op: Op
    left: "Expr"
    right: "Expr"


Expr = Union[Leaf, Node]


def repdigit_value(digit: int, repeat: int) -> Fraction:
    """Exact value of the repdigit with `repeat` copies of `digit`."""
    if not 1 <= digit <= 9:
        raise ValueError("digit must be in 1..9")
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    return Fraction(digit * (10**repeat - 1) // 9)


@dataclass(frozen=True)
class EvalOutcome:
    """Either an exact value or a single discard reason."""

    value: Fraction | None = None
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.reason is None


def evaluate_exact(e: Expr, caps: Caps = DEFAULT_CAPS,
                   allow_negative_exponents: bool = False) -> Fraction:
    """Exact value of `e`; raises an EvalDiscard subclass on failure.

    Every node value, leaves included, must satisfy the caps; the left
    subtree is evaluated before the right, so the first failure in
    evaluation order wins.
    """
    if isinstance(e, Leaf):
        v = repdigit_value(e.digit, e.repeat)
        if not rat_within(v, caps):
            raise Overflow("repdigit exceeds caps")
        return v
    a = evaluate_exact(e.left, caps, allow_negative_exponents)
    b = evaluate_exact(e.right, caps, allow_negative_exponents)
    op = e.op
    if op is Op.ADD:
        v = a + b
    elif op is Op.SUB:
        v = a - b
    elif op is Op.MUL:
        v = a * b
    elif op is Op.DIV:
        if not b:
            raise DivByZero("division by zero")
        v = a / b
    else:
        v = rat_pow(a, b, caps, allow_negative_exponents)
    if not rat_within(v, caps):
        raise Overflow("value exceeds caps")
    return v


def evaluate(e: Expr, caps: Caps = DEFAULT_CAPS,
             allow_negative_exponents: bool = False) -> EvalOutcome:
    """Evaluate `e`, turning discard signals into an EvalOutcome."""
    try:
        return EvalOutcome(value=evaluate_exact(e, caps, allow_negative_exponents))
    except EvalDiscard as exc:
        return EvalOutcome(reason=exc.reason)


def digit_count(e: Expr) -> int:
    """Number of digit occurrences: the quantity the solver minimizes."""
    if isinstance(e, Leaf):
        return e.repeat
    return digit_count(e.left) + digit_count(e.right)


def expr_digit(e: Expr) -> int:
    """The digit of the first leaf (all leaves agree for valid trees)."""
    while isinstance(e, Node):
        e = e.left
    return e.digit


def leaves(e: Expr) -> Iterator[Leaf]:
    if isinstance(e, Leaf):
        yield e
    else:
        yield from leaves(e.left)
        yield from leaves(e.right)


def sort_key(e: Expr):
    """Key for the canonical total order on expressions.

    Leaves sort before nodes; leaves by (digit, repeat); nodes by op tag
    then children lexicographically.  The key encodes the whole tree, so
    equal keys mean structurally equal expressions.
    """
    if isinstance(e, Leaf):
        return (0, e.digit, e.repeat)
    return (1, OP_INDEX[e.op], sort_key(e.left), sort_key(e.right))


def expr_from_key(key) -> Expr:
    """Inverse of `sort_key`."""
    if key[0] == 0:
        return Leaf(key[1], key[2])
    return Node(_OPS_BY_INDEX[key[1]], expr_from_key(key[2]), expr_from_key(key[3]))


_OPS_BY_INDEX = list(Op)


def canonicalize(e: Expr) -> Expr:
    """Sort the operands of + and * under the canonical order; idempotent.

    Subtraction, division and potentiation keep their operand order.
    """
    if isinstance(e, Leaf):
        return e
    left = canonicalize(e.left)
    right = canonicalize(e.right)
    if e.op in (Op.ADD, Op.MUL) and sort_key(right) < sort_key(left):
        left, right = right, left
    if left is e.left and right is e.right:
        return e
    return Node(e.op, left, right)


class ParseError(ValueError):
    """Syntax error with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__("%s (at offset %d)" % (message, offset))
        self.message = message
        self.offset = offset


_TOKEN_OPS = {"+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "×": Op.MUL, "/": Op.DIV}


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    """Tokens are ('num', Leaf, offset) | ('op', symbol, offset) | parens."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            numeral = text[start:i]
            if len(set(numeral)) != 1:
                raise ParseError("numeral %r is not a repdigit" % numeral, start)
            if numeral[0] == "0":
                raise ParseError("numeral digit must be 1..9", start)
            tokens.append(("num", Leaf(int(numeral[0]), len(numeral)), start))
            continue
        if c in _TOKEN_OPS:
            tokens.append(("op", _TOKEN_OPS[c], i))
        elif c == "^":
            tokens.append(("pow", Op.POW, i))
        elif c == "(":
            tokens.append(("lparen", c, i))
        elif c == ")":
            tokens.append(("rparen", c, i))
        else:
            raise ParseError("unknown token %r" % c, i)
        i += 1
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.digit: int | None = None

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        offset = tok[2] if tok else len(self.text)
        raise ParseError(message, offset)

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty input", 0)
        e = self.expr()
        if self.peek() is not None:
            self.fail("unexpected token")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in (Op.ADD, Op.SUB):
                self.next()
                e = Node(tok[1], e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in (Op.MUL, Op.DIV):
                self.next()
                e = Node(tok[1], e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        e = self.atom()
        tok = self.peek()
        if tok and tok[0] == "pow":
            self.next()
            e = Node(Op.POW, e, self.atom())
            tok = self.peek()
            if tok and tok[0] == "pow":
                self.fail("chained '^' is not allowed")
        return e

    def atom(self) -> Expr:
        tok = self.next()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        kind, value, offset = tok
        if kind == "num":
            if self.digit is None:
                self.digit = value.digit
            elif value.digit != self.digit:
                raise ParseError(
                    "mixed digits: %d after %d" % (value.digit, self.digit), offset
                )
            return value
        if kind == "lparen":
            e = self.expr()
            closing = self.next()
            if closing is None or closing[0] != "rparen":
                raise ParseError("unbalanced parentheses", offset)
            return e
        raise ParseError("unexpected token", offset)


def parse(text: str) -> Expr:
    """Parse the ASCII expression format; all numerals must be repdigits
    of one shared digit."""
    return _Parser(text).parse()


def render(e: Expr) -> str:
    """Print with the minimal parentheses that preserve the tree structure.

    '+' and '-' are spaced, '*', '/' and '^' are tight; round-trips through
    `parse` to a structurally equal tree.
    """
    if isinstance(e, Leaf):
        return str(e.digit) * e.repeat
    prec = PRECEDENCE[e.op]
    ls = render(e.left)
    rs = render(e.right)
    if e.op is Op.POW:
        # grammar allows only atoms around '^'
        if isinstance(e.left, Node):
            ls = "(%s)" % ls
        if isinstance(e.right, Node):
            rs = "(%s)" % rs
        return "%s^%s" % (ls, rs)
    if isinstance(e.left, Node) and PRECEDENCE[e.left.op] < prec:
        ls = "(%s)" % ls
    if isinstance(e.right, Node) and PRECEDENCE[e.right.op] <= prec:
        rs = "(%s)" % rs
    if e.op in (Op.ADD, Op.SUB):
        return "%s %s %s" % (ls, e.op.symbol, rs)
    return "%s%s%s" % (ls, e.op.symbol, rs)
