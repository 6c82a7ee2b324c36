"""Command-line experiment runner.

    fpclab run --config cfg.json [--seed N] [--out DIR]
    fpclab sweep --config cfg.json --grid 16,32,64 [--ell-factor K] [--out DIR]
    fpclab validate-config cfg.json

Configs are JSON objects with the ExperimentConfig fields; reports land as
report.json + report_trials.csv + report_timing.json. Exit code 0 means
every declared bound was met.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import ConfigInvalid
from .experiments import (
    ExperimentConfig,
    run_experiment,
    scaling_sweep,
    sweep_table,
    write_report,
)


def load_config(path: str, seed_override=None, validate=True) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
    if seed_override is not None:
        raw["seed"] = seed_override
    try:
        cfg = ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc
    return cfg.validate() if validate else cfg


def _cmd_run(args) -> int:
    cfg = load_config(args.config, args.seed)
    report = run_experiment(cfg)
    path = write_report(report, args.out)
    for check in report.payload["checks"]:
        flag = "PASS" if check["passed"] else "FAIL"
        print(f"[{flag}] {check['name']}: observed={check['observed']:.6g} "
              f"bound {check['direction']} {check['bound']:.6g}")
    print(f"report: {path} ({report.duration_seconds:.1f}s)")
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    # the grid supplies d per point, so the base config skips validation
    cfg = load_config(args.config, args.seed, validate=False)
    grid = [int(v) for v in args.grid.split(",") if v]
    reports = scaling_sweep(cfg, grid, ell_factor=args.ell_factor)
    for i, rep in enumerate(reports):
        write_report(rep, args.out, stem=f"sweep_d{grid[i]}")
    table = sweep_table(reports)
    with open(f"{args.out}/sweep_summary.json", "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
    for row in table:
        print(f"d={row['d']:6d}  c={row['c']:4d}  queries={row['queries_per_trial']:10d}  "
              f"trace-success={row['trace_success_rate']:.3f}")
    return 0


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigInvalid, OSError, json.JSONDecodeError) as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"invalid: {exc}{where}", file=sys.stderr)
        return 2
    print(f"ok: {cfg.kind} campaign, {cfg.trials} trials, seed {cfg.seed}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fpclab",
                                     description="fingerprinting-code attack lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment campaign")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=".")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="reid-attack sweep over code lengths")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", required=True, help="comma-separated d values")
    p_sweep.add_argument("--ell-factor", type=int, default=100)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=".")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigInvalid as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"config error: {exc}{where}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
