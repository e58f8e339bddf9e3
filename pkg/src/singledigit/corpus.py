"""Corpus ingestion and verification.

Corpus files are UTF-8, line oriented: a section header `digit: <d>`
starts a digit section, entry lines read `<target> = <expression>`, `#`
begins a comment, blank lines are ignored.  Expressions are kept verbatim
(including any defects in the source tables) and checked by exact
evaluation; defects surface as mismatch or parse-error statuses rather
than being repaired.

An errata file uses the same sectioned format with entry lines
`<target> = <original> => <corrected>`; a bad corpus line is
"acknowledged" when an erratum matches it (digit, target and
whitespace-insensitive text) and the corrected expression verifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from . import solver as _solver
from .expr import digit_count, evaluate, expr_digit, parse, render, ParseError
from .rational import Caps, DEFAULT_CAPS

VERIFIED = "verified"
MISMATCH = "mismatch"
PARSE_ERROR = "parse-error"


class FormatError(ValueError):
    """Corpus or errata file violates the line format."""

    def __init__(self, message: str, path, line: int):
        super().__init__("%s:%d: %s" % (path, line, message))
        self.path = str(path)
        self.line = line


@dataclass
class CorpusEntry:
    """One transcribed source line and, after verification, its status."""

    digit: int
    target: int
    raw: str
    line: int
    source: str = ""
    status: str | None = None
    actual: Fraction | None = None  # evaluated value when it differs
    detail: str = ""  # parse error text or discard reason
    errata_applied: bool = False
    corrected: str | None = None
    acknowledged: bool = False

    def to_dict(self) -> dict:
        return {
            "digit": self.digit,
            "target": self.target,
            "raw": self.raw,
            "line": self.line,
            "source": self.source,
            "status": self.status,
            "actual": None if self.actual is None else str(self.actual),
            "detail": self.detail,
            "errata_applied": self.errata_applied,
            "corrected": self.corrected,
            "acknowledged": self.acknowledged,
        }


def _entry_lines(path):
    """Yield (lineno, digit, payload) for entry lines, tracking headers."""
    digit = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("digit:"):
            value = stripped[len("digit:"):].strip()
            if not value.isdigit() or not 1 <= int(value) <= 9:
                raise FormatError("section digit must be 1..9", path, lineno)
            digit = int(value)
            continue
        if digit is None:
            raise FormatError("entry before any 'digit:' header", path, lineno)
        yield lineno, digit, stripped


def _split_target(payload: str, path, lineno: int) -> tuple[int, str]:
    head, sep, rest = payload.partition("=")
    if not sep:
        raise FormatError("expected '<target> = <expression>'", path, lineno)
    head = head.strip()
    if not head.isdigit():
        raise FormatError("target %r is not a nonnegative integer" % head, path, lineno)
    return int(head), rest.strip()


def load_corpus(path) -> list[CorpusEntry]:
    """Entries in source order with line numbers; statuses unset."""
    entries = []
    for lineno, digit, payload in _entry_lines(path):
        target, raw = _split_target(payload, path, lineno)
        if not raw:
            raise FormatError("empty expression", path, lineno)
        entries.append(CorpusEntry(digit, target, raw, lineno, source=str(path)))
    return entries


def _squash(text: str) -> str:
    return "".join(text.split())


def load_errata(path) -> dict[tuple[int, int, str], str]:
    """Map (digit, target, whitespace-squashed original) -> corrected text."""
    errata = {}
    for lineno, digit, payload in _entry_lines(path):
        target, rest = _split_target(payload, path, lineno)
        original, sep, corrected = rest.partition("=>")
        if not sep or not original.strip() or not corrected.strip():
            raise FormatError("expected '<target> = <original> => <corrected>'",
                              path, lineno)
        errata[(digit, target, _squash(original))] = corrected.strip()
    return errata


def verify_entry(entry: CorpusEntry, caps: Caps = DEFAULT_CAPS) -> CorpusEntry:
    """Set the entry's status by parsing and exact evaluation.

    verified: parses, uses the section digit only, evaluates to the target.
    mismatch: parses on the right digit but evaluates to something else
    (or to a discard).  parse-error: anything else, including numerals of
    a foreign digit.
    """
    entry.status = None
    entry.actual = None
    entry.detail = ""
    try:
        tree = parse(entry.raw)
    except ParseError as exc:
        entry.status = PARSE_ERROR
        entry.detail = str(exc)
        return entry
    if expr_digit(tree) != entry.digit:
        entry.status = PARSE_ERROR
        entry.detail = "expression uses digit %d in a digit-%d section" % (
            expr_digit(tree), entry.digit)
        return entry
    outcome = evaluate(tree, caps)
    if not outcome.ok:
        entry.status = MISMATCH
        entry.detail = outcome.reason
    elif outcome.value == entry.target:
        entry.status = VERIFIED
    else:
        entry.status = MISMATCH
        entry.actual = outcome.value
    return entry


@dataclass
class VerifyReport:
    """Tallies and listings for one verification run.

    `tallies` maps each digit to its verified / mismatch / parse-error /
    errata-corrected counts; the three status counts partition the
    entries.  Solver comparison fields are filled only when a search
    configuration was supplied.
    """

    entries: list[CorpusEntry] = field(default_factory=list)
    tallies: dict[int, dict[str, int]] = field(default_factory=dict)
    solver_budget: int | None = None
    solver_compared: int = 0
    solver_improved: list[dict] = field(default_factory=list)
    solver_unresolved: list[dict] = field(default_factory=list)

    @property
    def mismatches(self) -> list[CorpusEntry]:
        return [e for e in self.entries if e.status == MISMATCH]

    @property
    def parse_errors(self) -> list[CorpusEntry]:
        return [e for e in self.entries if e.status == PARSE_ERROR]

    @property
    def unacknowledged(self) -> list[CorpusEntry]:
        return [e for e in self.entries
                if e.status != VERIFIED and not e.acknowledged]

    @property
    def clean(self) -> bool:
        return not self.unacknowledged

    def total(self, key: str) -> int:
        return sum(t[key] for t in self.tallies.values())

    def to_dict(self) -> dict:
        problems = [e.to_dict() for e in self.entries if e.status != VERIFIED]
        return {
            "tallies": {str(d): dict(t) for d, t in sorted(self.tallies.items())},
            "totals": {
                "entries": len(self.entries),
                VERIFIED: self.total(VERIFIED),
                MISMATCH: self.total(MISMATCH),
                PARSE_ERROR: self.total(PARSE_ERROR),
                "errata-corrected": self.total("errata-corrected"),
                "unacknowledged": len(self.unacknowledged),
            },
            "problems": problems,
            "solver": None if self.solver_budget is None else {
                "budget": self.solver_budget,
                "compared": self.solver_compared,
                "improved": self.solver_improved,
                "unresolved": self.solver_unresolved,
            },
        }


def _blank_tally() -> dict[str, int]:
    return {VERIFIED: 0, MISMATCH: 0, PARSE_ERROR: 0, "errata-corrected": 0}


def verify_corpus(
    entries: list[CorpusEntry],
    caps: Caps = DEFAULT_CAPS,
    solver_cfg: "_solver.SearchConfig | None" = None,
    errata: dict | None = None,
) -> VerifyReport:
    """Verify every entry; apply errata to failures; optionally compare
    verified entries against the solver.

    With `solver_cfg`, each verified entry is solved at budget
    min(its own digit count, solver_cfg.max_digits); the config's digit is
    overridden per corpus section.  Strict improvements (solver count
    below the source count) and entries the solver could not resolve
    within the source count are listed in the report.
    """
    report = VerifyReport(entries=entries)
    for entry in entries:
        verify_entry(entry, caps)
        tally = report.tallies.setdefault(entry.digit, _blank_tally())
        tally[entry.status] += 1
        if entry.status != VERIFIED and errata:
            corrected = errata.get((entry.digit, entry.target, _squash(entry.raw)))
            if corrected is not None:
                entry.corrected = corrected
                entry.errata_applied = True
                probe = CorpusEntry(entry.digit, entry.target, corrected, entry.line)
                if verify_entry(probe, caps).status == VERIFIED:
                    entry.acknowledged = True
                    tally["errata-corrected"] += 1
                else:
                    entry.detail += "; erratum %r does not verify" % corrected
    if solver_cfg is not None:
        _compare_with_solver(report, caps, solver_cfg)
    return report


def _compare_with_solver(report: VerifyReport, caps: Caps,
                         cfg: "_solver.SearchConfig") -> None:
    report.solver_budget = cfg.max_digits
    by_digit: dict[int, list[tuple[CorpusEntry, int]]] = {}
    for entry in report.entries:
        if entry.status != VERIFIED:
            continue
        paper_count = digit_count(parse(entry.raw))
        by_digit.setdefault(entry.digit, []).append((entry, paper_count))
        report.solver_compared += 1
    for digit in sorted(by_digit):
        group = by_digit[digit]
        budgets = {e.line: min(c, cfg.max_digits) for e, c in group}
        needed = max(budgets.values())
        pending = list(group)
        digit_cfg = replace(cfg, digit=digit, max_digits=needed, caps=caps)
        for level in _solver.iter_level_sets(digit_cfg):
            still = []
            for entry, paper_count in pending:
                expr = level.expr(entry.target)
                if expr is not None:
                    if level.k < paper_count:
                        report.solver_improved.append({
                            "digit": digit,
                            "target": entry.target,
                            "line": entry.line,
                            "paper_count": paper_count,
                            "solver_count": level.k,
                            "witness": render(expr),
                        })
                elif level.k < budgets[entry.line]:
                    still.append((entry, paper_count))
                else:
                    report.solver_unresolved.append({
                        "digit": digit,
                        "target": entry.target,
                        "line": entry.line,
                        "paper_count": paper_count,
                        "budget": budgets[entry.line],
                    })
            pending = still
            if not pending:
                break


def format_report(report: VerifyReport) -> str:
    """Human-readable table plus problem and solver listings."""
    lines = []
    header = "%-6s %8s %9s %9s %12s %14s" % (
        "digit", "entries", "verified", "mismatch", "parse-error", "errata-fixed")
    lines.append(header)
    for digit in sorted(report.tallies):
        t = report.tallies[digit]
        total = t[VERIFIED] + t[MISMATCH] + t[PARSE_ERROR]
        lines.append("%-6d %8d %9d %9d %12d %14d" % (
            digit, total, t[VERIFIED], t[MISMATCH], t[PARSE_ERROR],
            t["errata-corrected"]))
    lines.append("%-6s %8d %9d %9d %12d %14d" % (
        "all", len(report.entries), report.total(VERIFIED),
        report.total(MISMATCH), report.total(PARSE_ERROR),
        report.total("errata-corrected")))
    problems = [e for e in report.entries if e.status != VERIFIED]
    if problems:
        lines.append("")
        lines.append("problem entries:")
        for e in problems:
            what = ("actual %s" % e.actual) if e.actual is not None else e.detail
            ack = ""
            if e.errata_applied:
                ack = " [erratum: %s]" % e.corrected if e.acknowledged else \
                    " [erratum failed]"
            lines.append("  digit %d line %d: %d = %s  --  %s%s%s" % (
                e.digit, e.line, e.target, e.raw, e.status,
                ": " + what if what else "", ack))
    if report.solver_budget is not None:
        lines.append("")
        lines.append("solver comparison (budget %d): %d compared, %d improved, "
                     "%d unresolved" % (report.solver_budget,
                                        report.solver_compared,
                                        len(report.solver_improved),
                                        len(report.solver_unresolved)))
        for imp in report.solver_improved:
            lines.append("  digit %(digit)d target %(target)d: source uses "
                         "%(paper_count)d, solver found %(solver_count)d: "
                         "%(witness)s" % imp)
        for miss in report.solver_unresolved:
            lines.append("  digit %(digit)d target %(target)d: not found within "
                         "%(budget)d digits (source uses %(paper_count)d)" % miss)
    return "\n".join(lines) + "\n"
