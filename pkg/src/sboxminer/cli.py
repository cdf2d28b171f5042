"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid S-box input,
3 a computed value disagrees with the published one.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import claims
from .analysis import (
    count_vanishing_monomials,
    relation_space_dimension,
    states_min_weight,
    vanishing_monomials,
    weight_one_kernel_count,
)
from .monomials import render
from .report import RENDERERS, Check, ReportDocument
from .sbox import SBoxError, resolve_sbox
from .search import SearchConfig, find_relations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BAD_SBOX = 2
EXIT_MISMATCH = 3

DEFAULT_LIMIT = 10_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Progress:
    """Rate-limited progress lines on stderr."""

    def __init__(self, label: str, every: float = 10.0) -> None:
        self.label = label
        self.every = every
        self.start = time.monotonic()
        self.last = self.start

    def __call__(self, done: int, total: int, tag: str | None = None) -> None:
        now = time.monotonic()
        if now - self.last < self.every and done < total:
            return
        self.last = now
        name = f"{self.label}:{tag}" if tag else self.label
        print(f"[{name}] {done}/{total} smallest-member positions, "
              f"{now - self.start:.0f} s", file=sys.stderr, flush=True)


def _threads_default() -> int:
    raw = os.environ.get("SBOXMINER_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"SBOXMINER_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"SBOXMINER_THREADS must be a positive integer, got {raw!r}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sbox", default="aes",
                        help="'aes', 'identityN' (N = 1..8) or a path to an S-box file")
    common.add_argument("--format", choices=sorted(RENDERERS), default="text")
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--threads", type=_positive, default=None,
                        help="worker threads (default: $SBOXMINER_THREADS or 1)")

    parser = _Parser(prog="sboxminer",
                     description="Mine sparse low-degree relations among S-box input/output bits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", parents=[common], help="find relations with few monomials")
    p.add_argument("--max-terms", type=_positive, required=True)
    p.add_argument("--max-degree", type=_non_negative, required=True)
    p.add_argument("--total-degree", type=_non_negative, default=None,
                   help="bound on the summed degree of all members (default: terms x degree)")
    p.add_argument("--include-constant", action="store_true",
                   help="allow the constant 1 as a member")
    p.add_argument("--limit", type=_non_negative, default=DEFAULT_LIMIT,
                   help=f"report at most this many relations, 0 for no limit "
                        f"(default {DEFAULT_LIMIT})")

    p = sub.add_parser("vanishing", parents=[common], help="count monomials that are always 0")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--max-degree", type=_non_negative, default=None)
    group.add_argument("--exact-degree", type=_non_negative, default=None)
    p.add_argument("--list", action="store_true", help="list the monomials")

    p = sub.add_parser("states", parents=[common], help="states with the fewest one-bits")
    p.add_argument("--expand", action="store_true",
                   help="list every monomial equal to 1 at each state")

    p = sub.add_parser("rank", parents=[common], help="GF(2) rank of the monomial truth vectors")
    p.add_argument("--max-degree", type=_non_negative, default=1)

    for name in ("verify-aes", "verify"):
        p = sub.add_parser(name, parents=[common], help="reproduce the published AES figures")
        p.add_argument("--tier", choices=("fast", "full"), default="fast",
                       help="'full' adds the 5-term degree-5 sweep (long running)")
    return parser


# --- commands -----------------------------------------------------------------

def cmd_mine(args, sbox, threads: int) -> ReportDocument:
    cfg = SearchConfig(
        max_terms=args.max_terms,
        max_degree=args.max_degree,
        total_degree_bound=args.total_degree,
        include_constant=args.include_constant,
        result_limit=args.limit or None,
        worker_count=threads,
    )
    try:
        cfg.validate(sbox)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = find_relations(sbox, cfg, progress=_Progress("mine"))
    relations = [r.as_dict() for r in result]
    doc = ReportDocument(
        command="mine",
        arguments={"sbox": args.sbox, **cfg.as_dict()},
        sbox=sbox,
        results={"pool_size": result.pool_size, "relation_count": len(result),
                 "relations": relations},
        columns=["terms", "total_degree", "constant", "minimal", "relation"],
        rows=[[r.term_count, r.total_degree, r.has_constant, r.minimal, str(r)] for r in result],
        truncated=result.truncated,
    )
    if claims.is_aes(sbox):
        published = claims.published_relation_count(cfg)
        if published is not None:
            doc.checks.append(Check("relations", "relations within the published "
                                    "nonexistence claim (<= 5 terms, degree <= 5)",
                                    published, len(result)))
    return doc


def cmd_vanishing(args, sbox, threads: int) -> ReportDocument:
    if args.max_degree is not None and args.max_degree > sbox.n_vars:
        raise UsageError(f"--max-degree must be at most {sbox.n_vars}")
    if args.exact_degree is not None and args.exact_degree > sbox.n_vars:
        raise UsageError(f"--exact-degree must be at most {sbox.n_vars}")
    count = count_vanishing_monomials(sbox, args.max_degree, args.exact_degree)
    results = {"count": count}
    rows = [[count]]
    columns = ["count"]
    if args.list:
        monomials = vanishing_monomials(sbox, args.max_degree, args.exact_degree)
        results["monomials"] = [render(m) for m in monomials]
        columns = ["degree", "monomial"]
        rows = [[m.degree, render(m)] for m in monomials]
    doc = ReportDocument(
        command="vanishing",
        arguments={"sbox": args.sbox, "max_degree": args.max_degree,
                   "exact_degree": args.exact_degree, "list": args.list},
        sbox=sbox, results=results, columns=columns, rows=rows,
    )
    if claims.is_aes(sbox):
        published = claims.published_vanishing(args.max_degree, args.exact_degree)
        if published is not None:
            doc.checks.append(Check("vanishing", "monomials vanishing on every state",
                                    published, count))
    return doc


def cmd_states(args, sbox, threads: int) -> ReportDocument:
    rows = states_min_weight(sbox)
    columns = ["state", "hex", "weight", "count", "variables"]
    table = [[f"S{r.state}", f"0x{r.state:02x}", r.weight, r.count, list(r.variables)]
             for r in rows]
    if args.expand:
        columns.append("monomials")
        for line, r in zip(table, rows):
            line.append(r.expand(sbox.n_in, sbox.n_out))
    doc = ReportDocument(
        command="states",
        arguments={"sbox": args.sbox, "expand": args.expand},
        sbox=sbox,
        results={"min_weight": rows[0].weight,
                 "states": [r.as_dict(args.expand, sbox.n_in, sbox.n_out) for r in rows]},
        columns=columns, rows=table,
    )
    if claims.is_aes(sbox):
        doc.checks.append(Check("states", "states with the fewest variables equal to 1",
                                sorted(claims.MIN_WEIGHT_STATES), [r.state for r in rows]))
        if args.expand:
            doc.checks.append(Check("rows", "expanded rows match the published table", True,
                                    {r.state: r.expand() for r in rows} == claims.MIN_WEIGHT_ROWS))
    return doc


def cmd_rank(args, sbox, threads: int) -> ReportDocument:
    if args.max_degree > sbox.n_vars:
        raise UsageError(f"--max-degree must be at most {sbox.n_vars}")
    info = relation_space_dimension(sbox, args.max_degree)
    zero_columns = weight_one_kernel_count(sbox, args.max_degree)
    return ReportDocument(
        command="rank",
        arguments={"sbox": args.sbox, "max_degree": args.max_degree},
        sbox=sbox,
        results={"columns": info.rank + info.kernel_dimension, "rank": info.rank,
                 "kernel_dimension": info.kernel_dimension, "weight_one_kernel": zero_columns},
        columns=["max_degree", "rank", "kernel_dimension", "weight_one_kernel"],
        rows=[[args.max_degree, info.rank, info.kernel_dimension, zero_columns]],
    )


def cmd_verify_aes(args, sbox, threads: int) -> ReportDocument:
    progress = _Progress("verify")
    checks = claims.verification_checks(
        sbox, args.tier, threads, progress=lambda tag, d, t: progress(d, t, tag))
    passed = sum(c.passed for c in checks)
    return ReportDocument(
        command="verify-aes",
        arguments={"sbox": args.sbox, "tier": args.tier},
        sbox=sbox,
        results={"checks_passed": passed, "checks_total": len(checks)},
        checks=checks,
    )


COMMANDS = {
    "mine": cmd_mine,
    "vanishing": cmd_vanishing,
    "states": cmd_states,
    "rank": cmd_rank,
    "verify-aes": cmd_verify_aes,
    "verify": cmd_verify_aes,
}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = args.threads if args.threads is not None else _threads_default()
    except UsageError as exc:
        print(f"sboxminer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sbox = resolve_sbox(args.sbox)
    except SBoxError as exc:
        print(f"sboxminer: invalid S-box: {exc}", file=sys.stderr)
        return EXIT_BAD_SBOX
    start = time.perf_counter()
    try:
        doc = COMMANDS[args.command](args, sbox, threads)
    except UsageError as exc:
        print(f"sboxminer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start
    doc.timing = {"elapsed_seconds": round(elapsed, 3), "threads": threads}
    try:
        _emit(RENDERERS[args.format](doc), args.out)
    except OSError as exc:
        print(f"sboxminer: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format != "json":
        print(f"elapsed {elapsed:.2f} s", file=sys.stderr)
    for check in doc.checks:
        if not check.passed:
            print(f"sboxminer: MISMATCH {check.name}: published {check.published}, "
                  f"computed {check.computed}", file=sys.stderr)
    return EXIT_OK if doc.all_passed else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
