"""Command-line entry point ``pclab``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .reports.config import DESCRIPTIONS, EXIT_OK, EXPERIMENTS, load_config, parse_config
from .reports.run import SWEEP_CAP, run, sweep


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pclab", description="Numerical checks for parabolic comparison results "
                                                          "and Galerkin Navier-Stokes.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--output-dir")
    r.add_argument("--workers", type=int, default=1, help="accepted for symmetry with sweep; runs are sequential")
    r.add_argument("--no-ladder", action="store_true", help="skip the 2x space/time re-run")

    s = sub.add_parser("sweep", help="run a config template over a parameter grid")
    s.add_argument("config")
    s.add_argument("--grid", required=True, help="JSON object mapping dotted config keys to value lists")
    s.add_argument("--output-dir")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--cap", type=int, default=SWEEP_CAP, help="largest allowed number of grid points")
    s.add_argument("--no-ladder", action="store_true")

    v = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    v.add_argument("config")

    sub.add_parser("list-experiments", help="print the experiment kinds")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for k in EXPERIMENTS:
                print(f"{k:16s} {DESCRIPTIONS[k]}")
            return EXIT_OK
        if args.command == "validate":
            cfg = load_config(args.config)
            print(cfg.echo())
            print(f"digest {cfg.digest}", file=sys.stderr)
            return EXIT_OK
        if args.command == "run":
            cfg = load_config(args.config, args.output_dir)
            rep = run(cfg, ladder=not args.no_ladder)
            print(f"{rep.experiment_id} {rep.verdict} ({rep.wall_time:.2f} s)")
            for c in rep.checks:
                flag = "-" if c["passed"] is None else ("ok" if c["passed"] else "FAILED")
                print(f"  {c['name']:32s} {c['value']:.6g}  {flag}")
            if rep.error:
                print(f"  error: {rep.error}", file=sys.stderr)
            print(f"  artifacts: {cfg.output_dir / cfg.experiment_id}")
            return rep.exit_code
        if args.command == "sweep":
            template = parse_config(args.config)
            grid = parse_config(args.grid)
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            path, rows, code = sweep(template, grid, args.workers, args.cap, not args.no_ladder, args.output_dir)
            for r in rows:
                params = {k[6:]: v for k, v in r.items() if k.startswith("param.")}
                print(f"{json.dumps(params, sort_keys=True)} {r['verdict']}")
            print(f"aggregate: {path}")
            return code
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
