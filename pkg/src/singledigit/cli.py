"""Command-line front end: solve / table / verify / symmetry.

Every report embeds a manifest with the fully resolved semantic
configuration, so outputs are self-describing.  Volatile run details
(wall-clock duration, thread count) are kept on a separate line (human
format) or under the "run" key (machine format): with those excluded,
identical flags produce byte-identical output regardless of thread count.

Exit codes: 0 success; 2 flag errors; 3 corpus/errata format errors;
4 verification failures; 5 budget errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time

from . import __version__
from .corpus import FormatError, format_report, load_corpus, load_errata, verify_corpus
from .expr import Op, render
from .rational import Caps
from .solver import BudgetTooLarge, SearchConfig, Solution, solve_range
from .symmetry import builtin_families, check_family

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_VERIFY = 4
EXIT_BUDGET = 5

THREADS_ENV = "SINGLEDIGIT_THREADS"

_OPS_BY_SYMBOL = {op.value: op for op in Op}


class _CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _parse_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m:
        raise _CliError("--range must look like LO..HI, got %r" % text)
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise _CliError("--range bounds out of order: %s" % text)
    return lo, hi


def _parse_ops(text: str) -> frozenset:
    ops = set()
    for c in text:
        if c in ", ":
            continue
        if c not in _OPS_BY_SYMBOL:
            raise _CliError("unknown operation %r in --ops (use +-*/^)" % c)
        ops.add(_OPS_BY_SYMBOL[c])
    if not ops:
        raise _CliError("--ops must name at least one operation")
    return frozenset(ops)


def _parse_digits(text: str) -> list[int]:
    digits = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"([1-9])-([1-9])", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if lo > hi:
                raise _CliError("digit range out of order: %r" % part)
            digits.extend(range(lo, hi + 1))
        elif re.fullmatch(r"[1-9]", part):
            digits.append(int(part))
        else:
            raise _CliError("bad --digits entry %r" % part)
    seen = []
    for d in digits:
        if d not in seen:
            seen.append(d)
    return seen


def _caps_from_args(args) -> Caps:
    try:
        return Caps(args.max_num, args.max_den, args.max_exp)
    except ValueError as exc:
        raise _CliError(str(exc))


def _ops_label(ops) -> str:
    return "".join(op.value for op in Op if op in ops)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-num", type=int, default=Caps().max_abs_numerator,
                   help="cap on |numerator| of any value")
    p.add_argument("--max-den", type=int, default=Caps().max_denominator,
                   help="cap on denominators")
    p.add_argument("--max-exp", type=int, default=Caps().max_exponent_magnitude,
                   help="cap on exponent magnitude")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default $%s or 1)" % THREADS_ENV)
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=10,
                   help="maximum digit occurrences to search")
    p.add_argument("--ops", default="+-*/^",
                   help="operation subset, e.g. '+-*/'")
    p.add_argument("--allow-neg-exp", action="store_true",
                   help="admit negative integer exponents")


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        n = int(os.environ.get(THREADS_ENV, "1") or "1")
    if n < 1:
        raise _CliError("--threads must be >= 1")
    return n


def _manifest(command: str, config: dict) -> dict:
    return {"command": command, "config": config, "version": __version__}


def _emit(args, manifest: dict, human_body: str, machine_body: dict,
          duration: float, threads: int) -> None:
    if args.format == "machine":
        doc = {"manifest": manifest,
               "run": {"duration_s": round(duration, 3), "threads": threads}}
        doc.update(machine_body)
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        head = ["# singledigit %s v%s" % (manifest["command"], manifest["version"])]
        conf = " ".join("%s=%s" % (k, v) for k, v in manifest["config"].items())
        head.append("# config: %s" % conf)
        head.append("# run: duration-s=%.3f threads=%d" % (duration, threads))
        text = "\n".join(head) + "\n" + human_body
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solve_rows(digit, lo, hi, args, threads):
    cfg = SearchConfig(
        digit=digit,
        max_digits=args.budget,
        caps=_caps_from_args(args),
        ops=_parse_ops(args.ops),
        allow_negative_exponents=args.allow_neg_exp,
        threads=threads,
    )
    return solve_range(lo, hi, cfg)


def cmd_solve(args) -> int:
    if (args.target is None) == (args.range is None):
        raise _CliError("exactly one of --target or --range is required")
    if args.target is not None:
        lo = hi = args.target
    else:
        lo, hi = _parse_range(args.range)
    threads = _threads(args)
    t0 = time.perf_counter()
    rows = _solve_rows(args.digit, lo, hi, args, threads)
    duration = time.perf_counter() - t0
    config = {"digit": args.digit, "range": "%d..%d" % (lo, hi),
              "budget": args.budget, "max-num": args.max_num,
              "max-den": args.max_den, "max-exp": args.max_exp,
              "ops": _ops_label(_parse_ops(args.ops)),
              "neg-exp": args.allow_neg_exp}
    body_lines = ["%6s  %5s  %s" % ("target", "count", "expression")]
    machine_rows = []
    for target, result in rows:
        if isinstance(result, Solution):
            body_lines.append("%6d  %5d  %s" % (target, result.count,
                                                render(result.expr)))
            machine_rows.append({"target": target, "count": result.count,
                                 "expr": render(result.expr)})
        else:
            body_lines.append("%6d  %5s  %s" % (target, "-", "NOT-FOUND"))
            machine_rows.append({"target": target, "count": None, "expr": None})
    _emit(args, _manifest("solve", config), "\n".join(body_lines) + "\n",
          {"results": machine_rows}, duration, threads)
    return EXIT_OK


def cmd_table(args) -> int:
    digits = _parse_digits(args.digits)
    lo, hi = _parse_range(args.range)
    threads = _threads(args)
    t0 = time.perf_counter()
    columns = {d: dict(_solve_rows(d, lo, hi, args, threads)) for d in digits}
    duration = time.perf_counter() - t0
    config = {"digits": ",".join(map(str, digits)), "range": "%d..%d" % (lo, hi),
              "budget": args.budget, "max-num": args.max_num,
              "max-den": args.max_den, "max-exp": args.max_exp,
              "ops": _ops_label(_parse_ops(args.ops)),
              "neg-exp": args.allow_neg_exp}
    cells = {}
    for d in digits:
        for t in range(lo, hi + 1):
            result = columns[d][t]
            cells[(t, d)] = render(result.expr) if isinstance(result, Solution) \
                else "NOT-FOUND"
    widths = {d: max([len(str(d))] + [len(cells[(t, d)]) for t in range(lo, hi + 1)])
              for d in digits}
    header = "%6s" % "target" + "".join(
        "  %-*s" % (widths[d], d) for d in digits)
    body_lines = [header]
    for t in range(lo, hi + 1):
        body_lines.append("%6d" % t + "".join(
            "  %-*s" % (widths[d], cells[(t, d)]) for d in digits))
    machine_rows = [
        {"target": t, "cells": {str(d): (cells[(t, d)]
                                         if cells[(t, d)] != "NOT-FOUND" else None)
                                for d in digits}}
        for t in range(lo, hi + 1)
    ]
    _emit(args, _manifest("table", config), "\n".join(body_lines) + "\n",
          {"digits": digits, "rows": machine_rows}, duration, threads)
    return EXIT_OK


def cmd_verify(args) -> int:
    threads = _threads(args)
    caps = _caps_from_args(args)
    entries = []
    for path in args.corpus:
        entries.extend(load_corpus(path))
    errata = load_errata(args.errata) if args.errata else None
    solver_cfg = None
    if args.solver_budget is not None:
        solver_cfg = SearchConfig(digit=1, max_digits=args.solver_budget,
                                  caps=caps, threads=threads)
    t0 = time.perf_counter()
    report = verify_corpus(entries, caps, solver_cfg=solver_cfg, errata=errata)
    duration = time.perf_counter() - t0
    config = {"corpus": ",".join(args.corpus),
              "errata": args.errata or "-",
              "solver-budget": args.solver_budget if args.solver_budget else "-",
              "max-num": args.max_num, "max-den": args.max_den,
              "max-exp": args.max_exp}
    _emit(args, _manifest("verify", config), format_report(report),
          {"report": report.to_dict()}, duration, threads)
    return EXIT_OK if report.clean else EXIT_VERIFY


def cmd_symmetry(args) -> int:
    threads = _threads(args)
    caps = _caps_from_args(args)
    t0 = time.perf_counter()
    results = [(f, check_family(f, caps)) for f in builtin_families()]
    duration = time.perf_counter() - t0
    config = {"max-num": args.max_num, "max-den": args.max_den,
              "max-exp": args.max_exp}
    lines = []
    machine = []
    for family, check in results:
        domain = ",".join(map(str, family.domain))
        if check.passed:
            status = "PASS"
            detail = ""
        else:
            status = "FAIL"
            if check.reason:
                detail = "  a=%d discarded: %s" % (check.failed_digit, check.reason)
            else:
                detail = "  a=%d actual %s" % (check.failed_digit, check.actual)
        lines.append("%-4s %-16s %-28s domain={%s} expected %s%s" % (
            status, family.name, family.formula, domain,
            family.expected_label(), detail))
        machine.append({
            "name": family.name, "formula": family.formula,
            "domain": list(family.domain),
            "expected": family.expected_label(),
            "passed": check.passed,
            "failed_digit": check.failed_digit,
            "actual": None if check.actual is None else str(check.actual),
            "reason": check.reason,
        })
    passed = sum(1 for _, c in results if c.passed)
    lines.append("%d/%d families pass" % (passed, len(results)))
    _emit(args, _manifest("symmetry", config), "\n".join(lines) + "\n",
          {"families": machine}, duration, threads)
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singledigit",
        description="minimal single-digit representations: solver and verifier",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one target or a range for one digit")
    p.add_argument("--digit", type=int, required=True, choices=range(1, 10),
                   metavar="D", help="the digit (1..9)")
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--range", default=None, metavar="LO..HI")
    _add_search_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="joint table: rows=targets, columns=digits")
    p.add_argument("--digits", default="1-9", help="e.g. '1-9' or '1,4,9'")
    p.add_argument("--range", required=True, metavar="LO..HI")
    _add_search_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="verify corpus files by exact evaluation")
    p.add_argument("--corpus", nargs="+", required=True, metavar="FILE")
    p.add_argument("--errata", default=None, metavar="FILE")
    p.add_argument("--solver-budget", type=int, default=None,
                   help="also compare verified entries against the solver")
    p.add_argument("--report", dest="out", default=None,
                   help="report path (default stdout)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("symmetry", help="check the built-in identity families")
    p.add_argument("--report", dest="out", default=None,
                   help="report path (default stdout)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_symmetry)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code
    except FormatError as exc:
        print("format error: %s" % exc, file=sys.stderr)
        return EXIT_FORMAT
    except BudgetTooLarge as exc:
        print("budget error: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print("io error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
