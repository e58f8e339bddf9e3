"""Solver and verifier for minimal single-digit representations.

Find expressions for natural numbers built from copies of one digit,
repdigit concatenation and the operations +, -, *, /, ^, minimizing the
number of digit occurrences; verify corpora of such representations with
exact rational arithmetic.
"""

from .rational import Caps, DEFAULT_CAPS, Rational, rat_add, rat_div, rat_mul, rat_pow, rat_sub, rat_within
from .expr import Expr, Leaf, Node, Op, ParseError, canonicalize, digit_count, evaluate, parse, render, repdigit_value
from .solver import (
    BudgetTooLarge,
    LevelSet,
    NotFoundWithinBudget,
    OracleBudgetExceeded,
    SearchConfig,
    Solution,
    build_level_sets,
    oracle_minimal_count,
    solve,
    solve_range,
)
from .symmetry import Family, builtin_families, check_family, f_n_10
from .corpus import CorpusEntry, FormatError, VerifyReport, load_corpus, load_errata, verify_corpus, verify_entry

__version__ = "0.1.0"
