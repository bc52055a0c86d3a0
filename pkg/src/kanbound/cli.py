"""Command line entry point: ``kanbound {run,dropout-compare,bounds,verify,normalize}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .bounds import slack_table
from .complexity import normalize_series
from .experiments import ExperimentConfig, run_dropout_comparison, run_experiment
from .verify import run_checks


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    records = run_experiment(cfg)
    if records:
        last = records[-1]
        print(f"epochs={len(records)} train_loss={last.train_loss:.6g} test_loss={last.test_loss:.6g} "
              f"excess_loss={last.excess_loss:.6g} complexity={last.complexity_raw:.6g}")
    if cfg.csv_path:
        print(f"wrote {cfg.csv_path}")
    return 0


def _cmd_dropout(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    res = run_dropout_comparison(cfg, args.out)
    if len(res.ratio):
        print(f"final complexity ratio (dropout {cfg.dropout_rate:g} / none) = {res.ratio[-1]:.6g}")
    return 0


def _cmd_bounds(args) -> int:
    params = json.loads(Path(args.params).read_text())
    table = slack_table(params)
    width = max(len(k) for k in table)
    for k, v in table.items():
        print(f"{k:<{width}}  {v:.10g}")
    return 0


def _cmd_verify(args) -> int:
    ok = True
    for r in run_checks():
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
        ok &= r.passed
    return 0 if ok else 1


def _cmd_normalize(args) -> int:
    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print("no rows", file=sys.stderr)
        return 1
    for col in (args.excess_col, args.complexity_col):
        if col not in rows[0]:
            print(f"column {col!r} not found", file=sys.stderr)
            return 1
    u = [float(r[args.excess_col]) for r in rows]
    v = [float(r[args.complexity_col]) for r in rows]
    w = csv.writer(sys.stdout)
    w.writerow([args.complexity_col + "_normalized"])
    for x in normalize_series(v, u):
        w.writerow([repr(float(x))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kanbound", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="train a KAN and log per-epoch complexity")
    s.add_argument("--config", required=True)
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("dropout-compare", help="complexity ratio of a dropout run to a plain run")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="ratio CSV path (defaults to the config's csv_path)")
    s.set_defaults(func=_cmd_dropout)

    s = sub.add_parser("bounds", help="evaluate every slack term for a JSON parameter file")
    s.add_argument("--params", required=True)
    s.set_defaults(func=_cmd_bounds)

    s = sub.add_parser("verify", help="run the gradient / Maurey / Rademacher self-checks")
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("normalize", help="rescale a complexity column onto the final excess loss")
    s.add_argument("--csv", required=True)
    s.add_argument("--excess-col", required=True)
    s.add_argument("--complexity-col", required=True)
    s.set_defaults(func=_cmd_normalize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
