"""Minimal-digit-count search over expressions of one repeated digit.

Level-set dynamic programming: S_k maps every value first reachable with
exactly k digit occurrences to one canonical witness expression.  Level k
is seeded with the k-digit repdigit leaf and grows by combining S_i with
S_{k-i} under the configured operations, pruning values outside the caps.

Values already reachable with fewer digits are not stored again: any
expression using a sub-expression for such a value can be rewritten with
the cheaper witness without changing the value, so dropping repeats never
changes a minimal count.  Witnesses are tie-broken by the canonical total
order on expressions, which makes the construction deterministic and
independent of worker count.

The hot loop works on packed integers (value n/d packed as n * 2**s + d)
and on `sort_key`-encoded witness tuples rather than Expr objects; the
public surface converts back to `Fraction` and `Expr`.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterator, Union

from .expr import (
    Expr,
    Leaf,
    Node,
    Op,
    OP_INDEX,
    digit_count,
    evaluate,
    expr_from_key,
)
from .rational import Caps, DEFAULT_CAPS

ALL_OPS = frozenset(Op)
ORACLE_MAX_DIGITS = 5

_OP_ADD = OP_INDEX[Op.ADD]
_OP_SUB = OP_INDEX[Op.SUB]
_OP_MUL = OP_INDEX[Op.MUL]
_OP_DIV = OP_INDEX[Op.DIV]
_OP_POW = OP_INDEX[Op.POW]


class BudgetTooLarge(RuntimeError):
    """The level sets outgrew `max_states`; lower the budget or tighten caps."""

    def __init__(self, states: int, limit: int, level: int):
        super().__init__(
            "level-set construction reached %d states at level %d "
            "(limit %d); lower max_digits or tighten the caps" % (states, level, limit)
        )
        self.states = states
        self.limit = limit
        self.level = level


class OracleBudgetExceeded(ValueError):
    """The brute-force oracle only supports small digit budgets."""


@dataclass(frozen=True)
class SearchConfig:
    digit: int
    max_digits: int
    caps: Caps = DEFAULT_CAPS
    ops: frozenset = ALL_OPS
    allow_negative_exponents: bool = False
    max_states: int = 25_000_000
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ops", frozenset(self.ops))
        if not 1 <= self.digit <= 9:
            raise ValueError("digit must be in 1..9")
        if self.max_digits < 1:
            raise ValueError("max_digits must be >= 1")
        if not self.ops:
            raise ValueError("ops must be non-empty")
        if not self.ops <= ALL_OPS:
            raise ValueError("ops must be a subset of {+, -, *, /, ^}")
        if self.max_states < 1:
            raise ValueError("max_states must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


class LevelSet:
    """Values first reachable with exactly `k` digits, with one canonical
    witness expression per value.

    Storage is packed; `items()` / `values()` yield in ascending
    (numerator, denominator) order.
    """

    __slots__ = ("k", "digit", "_shift", "_best", "_ns", "_ds", "_ws")

    def __init__(self, k: int, digit: int, shift: int, best: dict):
        self.k = k
        self.digit = digit
        self._shift = shift
        self._best = best
        # flat parallel views for the combination kernel
        ns, ds, ws = [], [], []
        m = 1 << shift
        for key, w in best.items():
            n, d = divmod(key, m)
            ns.append(n)
            ds.append(d)
            ws.append(w)
        self._ns = ns
        self._ds = ds
        self._ws = ws

    def _pack(self, value: Fraction) -> int:
        return value.numerator * (1 << self._shift) + value.denominator

    def __len__(self) -> int:
        return len(self._best)

    def __contains__(self, value) -> bool:
        return self._pack(Fraction(value)) in self._best

    def expr(self, value) -> Expr | None:
        w = self._best.get(self._pack(Fraction(value)))
        return expr_from_key(w) if w is not None else None

    def items(self) -> Iterator[tuple[Fraction, Expr]]:
        m = 1 << self._shift
        for key in sorted(self._best):
            n, d = divmod(key, m)
            yield Fraction(n, d), expr_from_key(self._best[key])

    def values(self) -> Iterator[Fraction]:
        m = 1 << self._shift
        for key in sorted(self._best):
            n, d = divmod(key, m)
            yield Fraction(n, d)

    @property
    def best(self) -> dict[Fraction, Expr]:
        """Materialized value -> witness map (O(n); prefer the iterators)."""
        return dict(self.items())


@dataclass(frozen=True)
class Solution:
    digit: int
    target: Fraction
    expr: Expr
    count: int


@dataclass(frozen=True)
class NotFoundWithinBudget:
    target: Fraction
    budget: int


SolveResult = Union[Solution, NotFoundWithinBudget]


def _combine_block(A, B, astart, aend, same, cfg_ints, seen, out):
    """Generate all candidates pairing rows [astart, aend) of level i with
    level j and min-merge them into `out`.

    For i == j (`same`) only the upper triangle is paired; subtraction,
    division and potentiation are applied in both operand orders, so every
    ordered combination is still produced exactly once per unordered pair.
    """
    (maxnum, maxden, maxexp, shift, num_bits, den_bits,
     do_add, do_sub, do_mul, do_div, do_pow, neg_exp) = cfg_ints
    m = 1 << shift
    Ans, Ads, Aws = A
    Bns, Bds, Bws = B
    in_seen = seen.__contains__
    out_get = out.get
    for ai in range(astart, aend):
        an = Ans[ai]
        ad = Ads[ai]
        aw = Aws[ai]
        if same:
            rows = zip(Bns[ai:], Bds[ai:], Bws[ai:])
        else:
            rows = zip(Bns, Bds, Bws)
        for bn, bd, bw in rows:
            if do_add:
                if ad == 1 and bd == 1:
                    n = an + bn
                    d = 1
                else:
                    g = gcd(ad, bd)
                    if g == 1:
                        n = an * bd + bn * ad
                        d = ad * bd
                    else:
                        adg = ad // g
                        bdg = bd // g
                        t = an * bdg + bn * adg
                        g2 = gcd(t, g)
                        n = t // g2
                        d = adg * (bd // g2)
                if -maxnum <= n <= maxnum and d <= maxden:
                    key = n * m + d
                    if not in_seen(key):
                        if aw <= bw:
                            wit = (1, _OP_ADD, aw, bw)
                        else:
                            wit = (1, _OP_ADD, bw, aw)
                        cur = out_get(key)
                        if cur is None or wit < cur:
                            out[key] = wit
            if do_sub:
                if ad == 1 and bd == 1:
                    n = an - bn
                    d = 1
                else:
                    g = gcd(ad, bd)
                    if g == 1:
                        n = an * bd - bn * ad
                        d = ad * bd
                    else:
                        adg = ad // g
                        bdg = bd // g
                        t = an * bdg - bn * adg
                        g2 = gcd(t, g)
                        n = t // g2
                        d = adg * (bd // g2)
                if -maxnum <= n <= maxnum and d <= maxden:
                    key = n * m + d
                    if not in_seen(key):
                        wit = (1, _OP_SUB, aw, bw)
                        cur = out_get(key)
                        if cur is None or wit < cur:
                            out[key] = wit
                    key = d - n * m  # the negation: (-n) * m + d
                    if not in_seen(key):
                        wit = (1, _OP_SUB, bw, aw)
                        cur = out_get(key)
                        if cur is None or wit < cur:
                            out[key] = wit
            if do_mul:
                if ad == 1 and bd == 1:
                    n = an * bn
                    d = 1
                else:
                    g1 = gcd(an, bd) if an else bd
                    g2 = gcd(bn, ad) if bn else ad
                    n = (an // g1) * (bn // g2)
                    d = (ad // g2) * (bd // g1)
                if -maxnum <= n <= maxnum and d <= maxden:
                    key = n * m + d
                    if not in_seen(key):
                        if aw <= bw:
                            wit = (1, _OP_MUL, aw, bw)
                        else:
                            wit = (1, _OP_MUL, bw, aw)
                        cur = out_get(key)
                        if cur is None or wit < cur:
                            out[key] = wit
            if do_div:
                if bn:
                    g1 = gcd(an, bn) if an else bn
                    g2 = gcd(ad, bd)
                    n = (an // g1) * (bd // g2)
                    d = (ad // g2) * (bn // g1)
                    if d < 0:
                        n = -n
                        d = -d
                    if -maxnum <= n <= maxnum and d <= maxden:
                        key = n * m + d
                        if not in_seen(key):
                            wit = (1, _OP_DIV, aw, bw)
                            cur = out_get(key)
                            if cur is None or wit < cur:
                                out[key] = wit
                if an:
                    g1 = gcd(bn, an) if bn else an
                    g2 = gcd(bd, ad)
                    n = (bn // g1) * (ad // g2)
                    d = (bd // g2) * (an // g1)
                    if d < 0:
                        n = -n
                        d = -d
                    if -maxnum <= n <= maxnum and d <= maxden:
                        key = n * m + d
                        if not in_seen(key):
                            wit = (1, _OP_DIV, bw, aw)
                            cur = out_get(key)
                            if cur is None or wit < cur:
                                out[key] = wit
            if do_pow:
                # a ** b then b ** a; exponents must be integers within cap
                for xn, xd, xw, en, ed, ew in (
                    (an, ad, aw, bn, bd, bw),
                    (bn, bd, bw, an, ad, aw),
                ):
                    if ed != 1:
                        continue
                    e = en
                    if e < 0:
                        if not neg_exp or xn == 0 or -e > maxexp:
                            continue
                        xn, xd = (xd, xn) if xn > 0 else (-xd, -xn)
                        e = -e
                    elif e > maxexp:
                        continue
                    if e == 0:
                        if xn == 0:
                            continue
                        n, d = 1, 1
                    elif xn == 0:
                        n, d = 0, 1
                    else:
                        if (abs(xn).bit_length() - 1) * e > num_bits or (
                            xd.bit_length() - 1
                        ) * e > den_bits:
                            continue
                        n = xn**e
                        if not -maxnum <= n <= maxnum:
                            continue
                        d = xd**e
                        if d > maxden:
                            continue
                    key = n * m + d
                    if not in_seen(key):
                        wit = (1, _OP_POW, xw, ew)
                        cur = out_get(key)
                        if cur is None or wit < cur:
                            out[key] = wit


def _merge(best: dict, local: dict) -> None:
    best_get = best.get
    for key, wit in local.items():
        cur = best_get(key)
        if cur is None or wit < cur:
            best[key] = wit


_PARALLEL_MIN_PAIRS = 65536


def _combine_chunk(A, B, astart, aend, same, cfg_ints, seen):
    local: dict[int, tuple] = {}
    _combine_block(A, B, astart, aend, same, cfg_ints, seen, local)
    return local


def iter_level_sets(cfg: SearchConfig) -> Iterator[LevelSet]:
    """Yield S_1, S_2, ... lazily up to cfg.max_digits.

    Raises BudgetTooLarge when the total number of stored states would
    exceed cfg.max_states.  The result is independent of cfg.threads: the
    per-chunk candidate maps are combined by the same order-insensitive
    min-merge the sequential path uses.
    """
    caps = cfg.caps
    shift = caps.max_denominator.bit_length()
    m = 1 << shift
    ops = cfg.ops
    cfg_ints = (
        caps.max_abs_numerator,
        caps.max_denominator,
        caps.max_exponent_magnitude,
        shift,
        caps.max_abs_numerator.bit_length(),
        caps.max_denominator.bit_length(),
        Op.ADD in ops,
        Op.SUB in ops,
        Op.MUL in ops,
        Op.DIV in ops,
        Op.POW in ops,
        cfg.allow_negative_exponents,
    )
    seen: set[int] = set()
    levels: list[LevelSet] = []
    states = 0
    executor = (
        ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    )
    try:
        for k in range(1, cfg.max_digits + 1):
            best: dict[int, tuple] = {}
            leaf_value = cfg.digit * (10**k - 1) // 9
            if leaf_value <= caps.max_abs_numerator:
                key = leaf_value * m + 1
                if key not in seen:
                    best[key] = (0, cfg.digit, k)
            for i in range(1, k // 2 + 1):
                j = k - i
                li, lj = levels[i - 1], levels[j - 1]
                A = (li._ns, li._ds, li._ws)
                B = (lj._ns, lj._ds, lj._ws)
                same = i == j
                if executor is None or len(li) * len(lj) < _PARALLEL_MIN_PAIRS:
                    _combine_block(A, B, 0, len(li), same, cfg_ints, seen, best)
                else:
                    step = max(1, (len(li) + cfg.threads * 4 - 1) // (cfg.threads * 4))
                    futures = [
                        executor.submit(
                            _combine_chunk, A, B, lo, min(lo + step, len(li)),
                            same, cfg_ints, seen,
                        )
                        for lo in range(0, len(li), step)
                    ]
                    for fut in futures:
                        _merge(best, fut.result())
            states += len(best)
            if states > cfg.max_states:
                raise BudgetTooLarge(states, cfg.max_states, k)
            level = LevelSet(k, cfg.digit, shift, best)
            levels.append(level)
            seen.update(best)
            yield level
    finally:
        if executor is not None:
            executor.shutdown(wait=False)


def build_level_sets(cfg: SearchConfig) -> list[LevelSet]:
    """All level sets S_1 .. S_max_digits (see iter_level_sets)."""
    return list(iter_level_sets(cfg))


def _check_solution(sol: Solution, cfg: SearchConfig) -> Solution:
    outcome = evaluate(sol.expr, cfg.caps, cfg.allow_negative_exponents)
    assert outcome.ok and outcome.value == sol.target, (
        "unsound solution for %s" % (sol.target,)
    )
    assert digit_count(sol.expr) == sol.count
    return sol


def solve(target, cfg: SearchConfig) -> SolveResult:
    """Smallest-digit-count expression for `target`, or NotFoundWithinBudget.

    Levels are built lazily, so a hit at a small count never pays for the
    deeper levels.
    """
    t = Fraction(target)
    for level in iter_level_sets(cfg):
        e = level.expr(t)
        if e is not None:
            return _check_solution(Solution(cfg.digit, t, e, level.k), cfg)
    return NotFoundWithinBudget(t, cfg.max_digits)


def solve_range(lo: int, hi: int, cfg: SearchConfig) -> list[tuple[int, SolveResult]]:
    """One result per integer target in [lo, hi], from one shared level-set
    construction.  Stops building levels as soon as every target is solved."""
    if lo > hi:
        raise ValueError("lo must be <= hi")
    found: dict[int, Solution] = {}
    remaining = set(range(lo, hi + 1))
    for level in iter_level_sets(cfg):
        for t in sorted(remaining):
            e = level.expr(t)
            if e is not None:
                found[t] = _check_solution(
                    Solution(cfg.digit, Fraction(t), e, level.k), cfg
                )
                remaining.discard(t)
        if not remaining:
            break
    return [
        (t, found.get(t, NotFoundWithinBudget(Fraction(t), cfg.max_digits)))
        for t in range(lo, hi + 1)
    ]


def _oracle_trees(digit: int, max_digits: int, ops: tuple) -> list[list[Expr]]:
    """All expression trees with exactly k leaves-digit occurrences, for
    k = 1..max_digits, with no deduplication or canonicalization."""
    by_size: list[list[Expr]] = [[]]
    for k in range(1, max_digits + 1):
        trees: list[Expr] = [Leaf(digit, k)]
        for i in range(1, k):
            for op in ops:
                trees.extend(
                    Node(op, left, right)
                    for left, right in itertools.product(by_size[i], by_size[k - i])
                )
        by_size.append(trees)
    return by_size


@lru_cache(maxsize=64)
def _oracle_counts(cfg: SearchConfig) -> dict[Fraction, int]:
    ops = tuple(sorted(cfg.ops, key=OP_INDEX.get))
    counts: dict[Fraction, int] = {}
    for k, trees in enumerate(_oracle_trees(cfg.digit, cfg.max_digits, ops)):
        for tree in trees:
            outcome = evaluate(tree, cfg.caps, cfg.allow_negative_exponents)
            if outcome.ok and outcome.value not in counts:
                counts[outcome.value] = k
    return counts


def oracle_minimal_count(target, cfg: SearchConfig) -> Union[int, NotFoundWithinBudget]:
    """Minimal digit count by naive enumeration of every expression tree.

    An independent check on the level-set construction; exponential, so
    max_digits is capped at ORACLE_MAX_DIGITS.
    """
    if cfg.max_digits > ORACLE_MAX_DIGITS:
        raise OracleBudgetExceeded(
            "oracle supports max_digits <= %d" % ORACLE_MAX_DIGITS
        )
    count = _oracle_counts(cfg).get(Fraction(target))
    if count is None:
        return NotFoundWithinBudget(Fraction(target), cfg.max_digits)
    return count
