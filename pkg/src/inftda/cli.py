"""Command-line interface.

Exit codes: 0 success, 1 usage/validation, 2 input parse or read failure,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import evaluate, mechanism
from .dgauss import SamplerError, expand_seed
from .model import (
    CsvParseError,
    SchemaError,
    contingency,
    ingest_csv,
    materialize_records,
    write_records_csv,
    write_table_csv,
)

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_RUNTIME = 3

logger = logging.getLogger("inftda")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _csv_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _domain(text: str):
    name, sep, values = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=v1|v2|..., got {text!r}")
    return name.strip(), [v.strip() for v in values.split("|") if v.strip()]


def _check_beta(beta: float) -> None:
    if not 0 < beta < 1:
        raise UsageError(f"--beta must be in (0, 1), got {beta}")


def _rho(text: str):
    try:
        return mechanism.parse_rho(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="input CSV with a header row")
    p.add_argument("--output", required=True, help="output path")
    p.add_argument("--rho", required=True, help="total zCDP budget, decimal or p/q")
    p.add_argument("--beta", type=float, default=0.05, help="failure probability of the bound (default 0.05)")
    p.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
    p.add_argument("--columns", type=_csv_list, help="attribute order, e.g. a,b,c (default: header order)")
    p.add_argument("--domain", type=_domain, action="append", default=[], metavar="NAME=v1|v2",
                   help="declare categories of a column beyond those observed (repeatable)")
    p.add_argument("--zero-noise", action="store_true", help="test mode: add no noise (NOT private)")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker count (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inftda", description="Private synthetic contingency tables by TopDown release.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="release a private table and its error report")
    _add_common(p)
    p.add_argument("--format", choices=("records", "table"), default="records",
                   help="records: one row per synthetic record; table: tuples plus a count column")
    p.add_argument("--timing", action="store_true", help="include runtime_ms in the JSON report")

    p = sub.add_parser("bound", help="print the error bound per level")
    p.add_argument("--rho", required=True, help="total zCDP budget, decimal or p/q")
    p.add_argument("--beta", type=float, default=0.05, help="failure probability (default 0.05)")
    p.add_argument("--sizes", required=True, type=_csv_list, help="domain sizes in hierarchy order, e.g. 2,2")
    p.add_argument("--d", type=_positive_int, help="depth (default: number of sizes)")
    p.add_argument("--k", type=_positive_int, help="level (default: d)")
    p.add_argument("--all-levels", action="store_true", help="print one line for every k = 1..d")

    p = sub.add_parser("evaluate", help="repeat the release and check the bound empirically")
    _add_common(p)
    p.add_argument("--trials", type=_positive_int, default=100, help="number of releases (default 100)")
    p.add_argument("--timing", action="store_true", help="include runtime_ms in the JSON report")
    return parser


def _load(args):
    path = Path(args.input)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return ingest_csv(data, columns=args.columns, domains=dict(args.domain))


def report_path(output: str) -> Path:
    return Path(output).with_suffix(".report.json")


def cmd_run(args) -> int:
    rho = _rho(args.rho)
    _check_beta(args.beta)
    dataset = _load(args)
    start = time.perf_counter()
    key = expand_seed(args.seed)
    dp = mechanism.release(dataset, rho, key, zero_noise=args.zero_noise, workers=args.threads)
    elapsed = (time.perf_counter() - start) * 1000
    if args.format == "records":
        text = write_records_csv(materialize_records(dp))
    else:
        text = write_table_csv(dp)
    report = evaluate.error_report(contingency(dataset), dp, rho, args.beta, args.seed, elapsed)
    Path(args.output).write_text(text, encoding="utf-8")
    report_path(args.output).write_text(report.to_json(args.timing), encoding="utf-8")
    logger.info("released %d records over %d cells in %.1f ms", dp.total, len(dp), elapsed)
    return 0


def cmd_bound(args) -> int:
    rho = _rho(args.rho)
    _check_beta(args.beta)
    try:
        sizes = [int(s) for s in args.sizes]
    except ValueError as exc:
        raise UsageError(f"--sizes must be integers: {exc}") from exc
    if any(s < 2 for s in sizes):
        raise UsageError("every domain size must be at least 2")
    d = args.d if args.d is not None else len(sizes)
    if d > len(sizes):
        raise UsageError(f"--d {d} needs {d} domain sizes, got {len(sizes)}")
    k = args.k if args.k is not None else d
    if k > d:
        raise UsageError(f"--k {k} exceeds depth {d}")
    levels = range(1, d + 1) if args.all_levels else [k]
    for level in levels:
        bound = evaluate.utility_bound(level, d, rho, args.beta, sizes)
        print(f"{bound:.3f}" if not args.all_levels else f"{level}\t{bound:.3f}")
    return 0


def cmd_evaluate(args) -> int:
    rho = _rho(args.rho)
    _check_beta(args.beta)
    dataset = _load(args)
    result = evaluate.bound_experiment(
        dataset,
        rho,
        args.beta,
        args.trials,
        expand_seed(args.seed),
        zero_noise=args.zero_noise,
        workers=args.threads,
        report_seed=args.seed,
    )
    report = result.report
    Path(args.output).write_text(report.to_json(args.timing), encoding="utf-8")
    print(f"{'level':>5}  {'max_err':>8}  {'bound':>10}  {'pass_rate':>9}")
    for entry in report.per_level:
        print(f"{entry.level:>5}  {entry.max_abs_error:>8}  {entry.bound:>10.3f}  {entry.pass_rate:>9.3f}")
    print(f"joint pass rate: {report.joint_pass_rate:.3f} over {report.trials} trials")
    return 0


COMMANDS = {"run": cmd_run, "bound": cmd_bound, "evaluate": cmd_evaluate}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"inftda: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, CsvParseError, SchemaError, UnicodeDecodeError) as exc:
        print(f"inftda: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SamplerError, OSError, ValueError) as exc:
        print(f"inftda: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
