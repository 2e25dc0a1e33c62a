"""Command line entry point: ``grushin-lab run|check|exponents``."""

import argparse
import math
import sys

from . import analysis
from .config import ConfigError, load_config
from .experiments import emit_report, run_experiment


def _run(args):
    cfg = load_config(args.config)
    fmt = args.format or cfg.format
    out = args.out or cfg.output
    report = run_experiment(cfg)
    if out:
        for path in emit_report(report, fmt, out):
            print(f"wrote {path}")
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name}: {v.lhs:.6g} vs {v.rhs:.6g}")
    for err in report.errors:
        print(f"ERROR {err}")
    print("passed" if report.passed else "FAILED")
    return 0 if report.passed else 1


def _check(args):
    cfg = load_config(args.config)
    print(f"ok: kind={cfg.kind}, {len(cfg.grid)} grid size(s)")
    return 0


def _exponents(args):
    Q = analysis.homogeneous_dimension(args.m, args.lam)
    print(f"Q = {Q:.17g}")
    if Q > 2:
        two_star = analysis.critical_exponent(Q)
        print(f"two_star = {two_star:.17g}")
        if args.nu is not None and args.nu < 1:
            print(f"r_min_nu_lt_1 = {analysis.lower_r_nu_lt_1(args.nu, Q):.17g}")
            print(f"r_max_sobolev_q = {analysis.sobolev_r_bound(args.nu, Q):.17g}")
    if args.r is not None:
        conj = analysis.holder_conjugate(args.r)
        shown = f"{conj:.17g}" if math.isfinite(conj) else "inf"
        print(f"holder_conjugate = {shown}")
    if args.case:
        if args.r is None or args.nu is None:
            raise ValueError("--case needs --nu and --r")
        try:
            value = analysis.regularity_exponent(args.case, args.nu, args.r, Q)
            print(f"{args.case} = {value:.17g}")
        except analysis.LInfinityRegime:
            print(f"{args.case} = L-infinity (r >= Q/2)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="grushin-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", help="output path (overrides the config's output key)")
    run.add_argument("--format", choices=("csv", "json"))
    run.set_defaults(func=_run)

    check = sub.add_parser("check", help="parse and validate a config only")
    check.add_argument("config")
    check.set_defaults(func=_check)

    exps = sub.add_parser("exponents", help="print homogeneous dimension and exponents")
    exps.add_argument("--m", type=int, default=1)
    exps.add_argument("--lambda", dest="lam", type=float, required=True)
    exps.add_argument("--nu", type=float)
    exps.add_argument("--r", type=float)
    exps.add_argument("--case", choices=analysis.CASES)
    exps.set_defaults(func=_exponents)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
