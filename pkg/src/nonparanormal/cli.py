"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 reproduction or self-check tolerance failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .engine import compute_moments, format_table, load_config, write_csv
from .errors import InputError, NumericalError
from .tables import DEFAULT_SEED, format_rows, reproduce_table2, reproduce_table3, rows_to_csv, selfcheck

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 2, 3, 4


def _cmd_compute(args):
    cfg = load_config(args.config)
    fmt = args.format or cfg.output_format
    report = compute_moments(cfg)
    text = write_csv(report) if fmt == "csv" else format_table(report) + "\n"
    out = args.out or cfg.output_path
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_table(args, which):
    start = time.perf_counter()
    rows = (reproduce_table2 if which == 2 else reproduce_table3)(args.samples, args.seed)
    elapsed = time.perf_counter() - start
    check_mc = which == 2
    print(format_rows(rows, check_empirical=check_mc))
    print(f"\nsamples={args.samples} seed={args.seed} elapsed={elapsed:.1f}s")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(rows_to_csv(rows))
    bad = [r for r in rows if not r.evaluated_ok or (check_mc and not r.empirical_ok)]
    for r in bad:
        print(f"row {r.entry.entry} ({r.label}) outside tolerance", file=sys.stderr)
    return EXIT_TOLERANCE if bad else EXIT_OK


def _cmd_selfcheck(args):
    results = selfcheck()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_TOLERANCE


def build_parser():
    p = argparse.ArgumentParser(
        prog="nonparanormal",
        description="Mean and covariance of coordinatewise transforms of a Gaussian vector.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="evaluate a JSON run configuration")
    c.add_argument("--config", required=True, help="path to the JSON configuration")
    c.add_argument("--out", help="output file (default: stdout or the config's output.path)")
    c.add_argument("--format", choices=("csv", "table"), help="output format")
    c.set_defaults(func=_cmd_compute)

    for which in (2, 3):
        t = sub.add_parser(f"reproduce-table{which}", help=f"reproduce reference table {which}")
        t.add_argument("--samples", type=int, default=10**6, help="Monte Carlo draws (default 10^6)")
        t.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
        t.add_argument("--csv", help="also write the rows as CSV to this path")
        t.set_defaults(func=lambda a, w=which: _cmd_table(a, w))

    s = sub.add_parser("selfcheck", help="run the quick invariant suite")
    s.set_defaults(func=_cmd_selfcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
