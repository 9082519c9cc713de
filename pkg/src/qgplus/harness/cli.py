"""Command line: ``qgplus {run,verify,table1,conjecture,interp-check}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..interp import InterpDataset, check_qgplus_interpolation
from .config import ConfigError, load_config
from .experiment import dump_json, run_experiment
from .studies import CONJECTURE_NS, conjecture_probe, emit_plot_data, table1, write_table1

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p, out_default="results"):
    p.add_argument("--seed", type=int, default=None, help="base seed (overrides the config)")
    p.add_argument("--out-dir", default=None, help=f"output directory (default: config value or {out_default})")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--tolerance", type=float, default=None, help="absolute tolerance override for every check")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qgplus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run an experiment config, write traces and a summary")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("verify", help="run an experiment config and report checks only")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("table1", help="reproduce the table of worst-case guarantees")
    _common(p)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--battery", type=int, default=100, help="random instances per upper-bound row")

    p = sub.add_parser("conjecture", help="probe the decreasing-step conjecture and emit plot data")
    _common(p)
    p.add_argument("--ns", type=int, nargs="+", default=list(CONJECTURE_NS))
    p.add_argument("--battery", type=int, default=100)

    p = sub.add_parser("interp-check", help="check a dataset JSON against the interpolation conditions")
    p.add_argument("dataset")
    _common(p)
    return parser


def _out(args, default):
    return Path(args.out_dir if args.out_dir is not None else default)


def _cmd_run(args, traces):
    try:
        cfg = load_config(args.config)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary = run_experiment(cfg, args.out_dir, args.seed, args.jobs, args.tolerance, write_traces=traces)
    out = _out(args, cfg.out_dir) / cfg.experiment
    for f in summary["failures"]:
        print(f"FAIL {f['check']} instance={f['instance']} algorithm={f['algorithm']} seed={f['seed']} step={f['step']}")
    n_checks = sum(len(r["checks"]) for r in summary["runs"])
    print(f"{cfg.experiment}: {len(summary['runs'])} runs, {n_checks} checks, "
          f"{len(summary['failures'])} failures -> {out / 'summary.json'}")
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def _cmd_table1(args):
    if args.n < 2 or args.battery < 1:
        print("table1 needs --n >= 2 and --battery >= 1", file=sys.stderr)
        return EXIT_USAGE
    report = table1(args.n, args.battery, 0 if args.seed is None else args.seed, args.jobs, args.tolerance)
    path = write_table1(report, _out(args, "results"))
    for r in report["rows"]:
        print(f"{'ok  ' if r['ok'] else 'FAIL'} {r['row']}")
    print(f"table written to {path}")
    return EXIT_OK if report["ok"] else EXIT_FAIL


def _cmd_conjecture(args):
    if any(n < 1 for n in args.ns) or args.battery < 1:
        print("conjecture needs positive --ns and --battery", file=sys.stderr)
        return EXIT_USAGE
    report = conjecture_probe(args.ns, args.battery, 0 if args.seed is None else args.seed, args.jobs)
    out = _out(args, "results")
    out.mkdir(parents=True, exist_ok=True)
    dump_json(report, out / "conjecture.json")
    plot = emit_plot_data(report, out / "conjecture_plot.csv")
    for r in report["rows"]:
        print(f"n={r['n']:>5d} worst={r['observed_worst']:.6g} bound={r['conjectured_bound']:.6g} "
              f"asymptote={r['asymptote']:.6g}")
    if report["conjecture_violated"]:
        print(f"FINDING: {len(report['violations'])} battery runs exceed the conjectured bound")
    print(f"plot data written to {plot}")
    return EXIT_OK if report["ok"] else EXIT_FAIL


def _cmd_interp(args):
    try:
        ds = InterpDataset.load(args.dataset)
        report = check_qgplus_interpolation(ds, 1e-12 if args.tolerance is None else args.tolerance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK if report.valid else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "run":
        return _cmd_run(args, traces=None)
    if args.command == "verify":
        return _cmd_run(args, traces=False)
    if args.command == "table1":
        return _cmd_table1(args)
    if args.command == "conjecture":
        return _cmd_conjecture(args)
    return _cmd_interp(args)


if __name__ == "__main__":
    sys.exit(main())
