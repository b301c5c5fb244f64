"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch, 2 bad arguments,
3 resource limit, 4 recurrence not found.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
import time

from . import engine
from .errors import ResourceLimitError
from .oracle import DEFAULT_BUDGET, brute_gamma2
from .words import MAX_N, enumerate_words

INTERACTIVE_MAX_N = 12

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_LIMIT, EXIT_NOT_FOUND = 0, 1, 2, 3, 4

_UNITS = {"": 1, "b": 1, "kib": 2**10, "mib": 2**20, "gib": 2**30, "kb": 10**3, "mb": 10**6, "gb": 10**9}


class UsageError(ValueError):
    pass


def parse_bytes(text: str) -> int:
    match = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*([a-zA-Z]*)\s*", text)
    if not match or match.group(2).lower() not in _UNITS:
        raise argparse.ArgumentTypeError(f"not a memory size: {text!r} (try 8GiB or 512MiB)")
    return int(float(match.group(1)) * _UNITS[match.group(2).lower()])


def _format_map(values: dict[int, int]) -> str:
    return ";".join(f"{m}:{v}" for m, v in sorted(values.items()))


def _emit(records: list[dict], fmt: str, human: list[str], out) -> None:
    if fmt == "json":
        payload = records[0] if len(records) == 1 else records
        out.write(json.dumps(payload, sort_keys=False) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: _format_map(v) if isinstance(v, dict) else v for k, v in rec.items()})
        out.write(buf.getvalue())
    else:
        out.write("\n".join(human) + "\n")


class Runner:
    def __init__(self, args: argparse.Namespace, out=sys.stdout):
        self.args = args
        self.out = out
        self.max_n = MAX_N if args.allow_large else INTERACTIVE_MAX_N
        self._systems: dict[int, engine.TransferSystem] = {}

    def check_n(self, n: int) -> None:
        if n < 3:
            raise UsageError(f"n must satisfy n >= 3 (got n={n})")
        if n > self.max_n:
            hint = " (pass --allow-large for n up to 15)" if n <= MAX_N else ""
            raise ResourceLimitError(f"n={n} exceeds the cap of {self.max_n}{hint}")

    def system(self, n: int) -> engine.TransferSystem:
        if n not in self._systems:
            self.check_n(n)
            self._systems[n] = engine.build_system(
                n,
                strict_initial=self.args.initial == "strict",
                memory_budget=self.args.memory_budget,
                cache_dir=self.args.cache,
                max_n=self.max_n,
                threads=self.args.threads,
            )
        return self._systems[n]

    def recurrence(self, n: int) -> engine.Recurrence | None:
        return engine.find_recurrence(
            n,
            max_steps=self.args.max_steps,
            max_period=self.args.max_period,
            system=self.system(n),
        )

    def emit(self, records, human) -> None:
        _emit(records, self.args.format, human, self.out)

    # subcommands

    def count(self) -> int:
        n = self.args.n
        self.check_n(n)
        table = enumerate_words(n, max_n=self.max_n)
        rec = {
            "n": n,
            "suitable": len(table),
            "initial": int(table.initial.sum()),
            "initial_strict": int(table.strict_initial.sum()),
            "final": int(table.final.sum()),
        }
        self.emit([rec], [f"n={n}: suitable={rec['suitable']} initial={rec['initial']} "
                          f"(strict {rec['initial_strict']}) final={rec['final']}"])
        return EXIT_OK

    def gamma2(self) -> int:
        n, m = self.args.n, self.args.m
        if m < 2:
            raise UsageError(f"m must satisfy m >= 2 (got m={m})")
        value = engine.gamma2_fixed(n, m, system=self.system(n))
        self.emit([{"n": n, "m": m, "gamma2": value}], [f"gamma2(C_{n} x P_{m}) = {value}"])
        return EXIT_OK

    def recurrence_cmd(self) -> int:
        n = self.args.n
        rec = self.recurrence(n)
        if rec is None:
            self.emit(
                [{"n": n, "found": False, "max_steps": self.args.max_steps}],
                [f"n={n}: no recurrence found within {self.args.max_steps} steps "
                 f"(periods up to {self.args.max_period})"],
            )
            return EXIT_NOT_FOUND
        record = {"found": True, "n": n, "m0": rec.m0, "a": rec.a, "b": rec.b,
                  "boundary": rec.boundary, "remaining": rec.remaining}
        report = engine.conjecture_check(n, rec)
        human = [
            f"n={n}: f(m+{rec.a}) - f(m) = {rec.b} for m >= {rec.m0}",
            "boundary values: " + ", ".join(f"f({m})={v}" for m, v in sorted(rec.boundary.items())),
            "remaining values: " + ", ".join(f"f({m})={v}" for m, v in sorted(rec.remaining.items())),
            f"residue-class pattern (a, b): {'match' if report.pattern_ok else 'MISMATCH'}",
        ]
        self.emit([record], human)
        return EXIT_OK

    def formula(self) -> int:
        n = self.args.n
        if self.args.m is not None:
            ms = [self.args.m]
        elif self.args.m_min is not None and self.args.m_max is not None:
            ms = list(range(self.args.m_min, self.args.m_max + 1))
        else:
            raise UsageError("give --m or both --m-min and --m-max")
        if not ms or min(ms) < 2:
            raise UsageError("m must satisfy m >= 2 and the range must be nonempty")
        rec = self.recurrence(n)
        if rec is None:
            self.out.write(f"n={n}: no recurrence found within {self.args.max_steps} steps\n")
            return EXIT_NOT_FOUND
        form = engine.solve_closed_form(rec)
        records, human = [], []
        for m in ms:
            value, exc = form.evaluate(m), form.is_exception(m)
            records.append({"n": n, "m": m, "gamma2": value, "exception": exc})
            human.append(f"gamma2(C_{n} x P_{m}) = {value}" + ("  [exception value]" if exc else ""))
        self.emit(records, human)
        return EXIT_OK

    def table(self) -> int:
        lo, hi = self.args.n_min, self.args.n_max
        if lo > hi:
            raise UsageError(f"empty range: --n-min {lo} > --n-max {hi}")
        for n in (lo, hi):
            self.check_n(n)
        records, human, metrics = [], [], []
        for n in range(lo, hi + 1):
            t0 = time.perf_counter()
            sys_n = self.system(n)
            t1 = time.perf_counter()
            rec = self.recurrence(n)
            t2 = time.perf_counter()
            if rec is None:
                self.out.write(f"n={n}: no recurrence found within {self.args.max_steps} steps\n")
                return EXIT_NOT_FOUND
            records.append({
                "n": n, "suitable": len(sys_n), "m0": rec.m0, "a": rec.a, "b": rec.b,
                "boundary": rec.boundary, "remaining": rec.remaining,
            })
            human.append(
                f"{n:>3} {len(sys_n):>8} {rec.m0:>3} {rec.a:>2} {rec.b:>3}   "
                + ", ".join(f"f({m})={v}" for m, v in sorted({**rec.remaining, **rec.boundary}.items()))
            )
            metrics.append(f"  n={n}: nnz={sys_n.A.nnz} matrix_kib={sys_n.A.nnz * 4 / 1024:.2f} "
                           f"build_s={t1 - t0:.2f} vectors_s={t2 - t1:.2f}")
        human = ["  n        s  m0  a   b   values"] + human + ["runtime metrics (informational):"] + metrics
        self.emit(records, human)
        return EXIT_OK

    def verify(self) -> int:
        n, m = self.args.n, self.args.m
        if m < 2:
            raise UsageError(f"m must satisfy m >= 2 (got m={m})")
        self.check_n(n)
        oracle = brute_gamma2(n, m, budget=self.args.budget)
        value = engine.gamma2_fixed(n, m, system=self.system(n))
        verdict = "PASS" if value == oracle else "FAIL"
        self.emit(
            [{"n": n, "m": m, "engine": value, "oracle": oracle, "result": verdict}],
            [f"{verdict} (engine {value} {'=' if value == oracle else '!='} oracle {oracle})"],
        )
        return EXIT_OK if verdict == "PASS" else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json", "csv"), default="human")
    common.add_argument("--max-steps", type=int, default=engine.DEFAULT_MAX_STEPS)
    common.add_argument("--max-period", type=int, default=engine.DEFAULT_MAX_PERIOD)
    common.add_argument("--memory-budget", type=parse_bytes, default=engine.DEFAULT_MEMORY_BUDGET,
                        help="cap on transition-matrix memory, e.g. 8GiB (default)")
    common.add_argument("--cache", metavar="DIR", help="directory for cached transition matrices")
    common.add_argument("--allow-large", action="store_true",
                        help=f"allow n up to {MAX_N} (long runs, several GiB)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--initial", choices=("strict", "verbatim"), default="strict",
                        help="initial-word set for the first column (verbatim is diagnostic)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gamma2cyl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="count suitable/initial/final words")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("gamma2", parents=[common], help="gamma2(C_n x P_m) for fixed n, m")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("recurrence", parents=[common], help="find (m0, a, b) for fixed n")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("formula", parents=[common], help="evaluate the solved recurrence")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--m-min", type=int)
    p.add_argument("--m-max", type=int)

    p = sub.add_parser("table", parents=[common], help="reproduce the results tables for a range of n")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)

    p = sub.add_parser("verify", parents=[common], help="compare the engine with brute force")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help=f"largest n*m for brute force (default {DEFAULT_BUDGET})")
    return parser


_COMMANDS = {
    "count": Runner.count,
    "gamma2": Runner.gamma2,
    "recurrence": Runner.recurrence_cmd,
    "formula": Runner.formula,
    "table": Runner.table,
    "verify": Runner.verify,
}


def main(argv: list[str] | None = None, out=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = out if out is not None else sys.stdout
    if args.threads < 1 or args.max_steps < 1 or args.max_period < 1:
        print("error: --threads, --max-steps and --max-period must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](Runner(args, out))
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
