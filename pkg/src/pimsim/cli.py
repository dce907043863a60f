"""`pimbench` command-line interface.

Subcommands:
  bench <name>   run a benchmark suite against host oracles and report
                 cycles/throughput (text or CSV), optionally dumping the
                 micro-op trace of the run.
  lower <file>   lower a textual instruction listing to a micro-op trace.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BENCHMARKS, csv_header, csv_row, run_benchmark, throughput_report
from .config import DEFAULT_CONFIG, ArchConfig, load_config
from .driver import format_budgets, lower
from .errors import PimError
from .isa import parse_asm
from .microops import Layout, encode, format_trace


def _load_cfg(path: str | None) -> ArchConfig:
    if path is None:
        return DEFAULT_CONFIG
    return load_config(path)


def _cmd_bench(args) -> int:
    cfg = _load_cfg(args.config)
    trace_sink: list[int] | None = [] if args.trace else None
    reports = run_benchmark(args.name, cfg, seed=args.seed,
                            elements=args.elements, trace_sink=trace_sink)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            text = format_trace(trace_sink)
            fh.write(text + ("\n" if text else ""))
        print(f"{len(trace_sink)} micro-ops -> {args.trace}", file=sys.stderr)
    if args.csv:
        lines = [csv_header()] + [csv_row(r) for r in reports]
        if args.csv == "-":
            print("\n".join(lines))
        else:
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
    else:
        for r in reports:
            print(throughput_report(r, cfg))
            print()
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} runs FAILED oracle verification",
              file=sys.stderr)
        return 1
    return 0


def _cmd_lower(args) -> int:
    cfg = _load_cfg(args.config)
    if args.budgets:
        print(format_budgets(cfg))
        return 0
    if args.asm is None:
        print("error: an instruction listing file is required (or --budgets)",
              file=sys.stderr)
        return 2
    with open(args.asm, encoding="utf-8") as fh:
        instrs = parse_asm(fh.read())
    layout = Layout(cfg)
    words: list[int] = []
    for instr in instrs:
        words.extend(encode(op, layout) for op in lower(instr, cfg))
    text = format_trace(words)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + ("\n" if text else ""))
        print(f"{len(words)} micro-ops -> {args.output}", file=sys.stderr)
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pimbench",
                                description="PIM simulator benchmarks and lowering")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("name", choices=sorted(BENCHMARKS))
    b.add_argument("--config", help="architecture config file (key = value)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--elements", type=int, default=None,
                   help="number of elements (default: sized to the config)")
    b.add_argument("--csv", metavar="PATH", nargs="?", const="-",
                   help="write CSV results to PATH ('-' or no value = stdout)")
    b.add_argument("--trace", metavar="PATH",
                   help="dump the full micro-op trace of the run to PATH")
    b.set_defaults(func=_cmd_bench)

    low = sub.add_parser("lower", help="lower instructions to a micro-op trace")
    low.add_argument("asm", nargs="?", help="instruction listing file")
    low.add_argument("--config", help="architecture config file (key = value)")
    low.add_argument("--output", "-o", help="write the trace here instead of stdout")
    low.add_argument("--budgets", action="store_true",
                     help="print the routine cycle-budget table and exit")
    low.set_defaults(func=_cmd_lower)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
