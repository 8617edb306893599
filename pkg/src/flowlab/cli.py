"""Command line entry point: ``flowlab run | verify | sweep``.

Exit codes: 0 every check passed, 1 a check failed, 2 configuration error,
3 numerical failure (blow-up, lost positivity, no convergence).
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path

from . import lab, verification
from .errors import (BlowUpError, ConfigurationError, ConvergenceError, DomainError,
                     FlowLabError, InvalidMetricError, StabilityError)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _out_dir(args, cfg_dir=None):
    return os.environ.get("FLOWLAB_OUT") or args.out_dir or cfg_dir


def _print_verdicts(verdicts, stream):
    for v in verdicts:
        print(v.line(), file=stream)


def _exit_code_for(exc: FlowLabError) -> int:
    if isinstance(exc, (ConfigurationError, DomainError, InvalidMetricError)):
        return EXIT_CONFIG
    if isinstance(exc, (BlowUpError, StabilityError, ConvergenceError)):
        return EXIT_NUMERIC
    return EXIT_FAIL


def _run_one(cfg, out_dir, tol_scale, stream):
    cfg = lab.scale_tolerances(cfg, tol_scale)
    report = lab.run(cfg)
    csv_path, json_path = report.write(out_dir, cfg.name)
    _print_verdicts(report.verdicts, stream)
    print(f"wrote {csv_path} and {json_path}", file=stream)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _overrides(args):
    return {"seed": str(args.seed)} if args.seed is not None else {}


def cmd_run(args, stream):
    cfg = lab.load_config(args.config, _overrides(args))
    return _run_one(cfg, _out_dir(args, cfg.out_dir), args.tol_scale, stream)


def cmd_sweep(args, stream):
    axes = [lab.sweep_values(p) for p in args.param]
    keys = [k for k, _ in axes]
    base = lab.parse_lines(Path(args.config).read_text()) if Path(args.config).exists() else None
    if base is None:
        raise ConfigurationError(f"cannot read config {args.config}")
    stem = Path(args.config).stem
    # validate every combination before running any of them
    configs = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        tag = "_".join(f"{k}={v}" for k, v in zip(keys, combo))
        values = {**base, **dict(zip(keys, combo)), **_overrides(args)}
        values["output.name"] = f"{base.get('output.name', stem)}_{tag}"
        configs.append(lab.build_config(values))
    worst = EXIT_PASS
    for cfg in configs:
        print(f"== {cfg.name}", file=stream)
        worst = max(worst, _run_one(cfg, _out_dir(args, cfg.out_dir), args.tol_scale, stream))
    return worst


def cmd_verify(args, stream):
    verdicts = verification.run_suite(args.suite, args.tol_scale)
    _print_verdicts(verdicts, stream)
    passed = all(v.passed for v in verdicts)
    print(f"{sum(v.passed for v in verdicts)}/{len(verdicts)} checks passed", file=stream)
    out = _out_dir(args)
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        doc = {"suite": args.suite, "passed": passed, "build_id": lab.build_id(),
               "verdicts": [v.as_dict() for v in verdicts]}
        (path / f"verify_{args.suite}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_PASS if passed else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help="output directory (FLOWLAB_OUT takes precedence)")
    common.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")

    parser = argparse.ArgumentParser(prog="flowlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", parents=[common], help="run a named check suite")
    p.add_argument("suite", choices=sorted(verification.SUITES))
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", parents=[common], help="run a config over parameter values")
    p.add_argument("config")
    p.add_argument("--param", action="append", required=True, metavar="KEY=V1,V2",
                   help="parameter values to sweep; repeat for a grid")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    if args.tol_scale <= 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, stream)
    except FlowLabError as exc:
        print(f"error: {lab.describe_error(exc)}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
