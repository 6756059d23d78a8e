"""Command-line entry point ``adaptive-oco``.

Subcommands::

    adaptive-oco run      --config exp.ini --out results/ [--strict] [--seed N]
    adaptive-oco sweep    --config exp.ini --out results/ [--jobs N] [--seed N]
    adaptive-oco verify   --config exp.ini --out results/ [TRAJECTORY_CSV] [--strict]
    adaptive-oco selftest

Exit codes: 0 success, 1 bound violation under ``--strict``, 2 configuration
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

from .config import ConfigError, load_config
from .evaluation import IntervalLosses, verify_bounds
from .exceptions import ConfigurationError
from .harness import checked_intervals, run_experiment, run_sweep
from .meta import read_trajectory_csv
from .scenario import generate_scenario

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="adaptive-oco", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", required=True, metavar="PATH", help="INI experiment config")
        if out:
            p.add_argument("--out", default="results", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, metavar="OVERRIDE", help="replace [scenario] seed")

    p = sub.add_parser("run", help="run the configured learners on one scenario")
    common(p)
    p.add_argument("--strict", action="store_true", help="exit 1 when any bound is violated")

    p = sub.add_parser("sweep", help="run every cell of the [sweep] grid")
    common(p)
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel cells")

    p = sub.add_parser("verify", help="check a stored trajectory against the bounds")
    common(p)
    p.add_argument("trajectory", nargs="?", help="trajectory CSV (default: DIR/trajectory.csv)")
    p.add_argument("--strict", action="store_true", help="exit 1 when any bound is violated")

    sub.add_parser("selftest", help="run the bundled invariant checks")
    return ap


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def _cmd_run(args):
    cfg = _load(args)
    result = run_experiment(cfg, args.out)
    print(result.summary_text(), end="")
    print(f"wrote 4 files to {args.out}")
    return EXIT_VIOLATION if args.strict and result.violations else EXIT_OK


def _cmd_sweep(args):
    cfg = _load(args)
    if not cfg.sweep:
        raise ConfigError("sweep needs a [sweep] section with at least one of seed, T, tau, lam, alpha")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    text = run_sweep(cfg, args.out, jobs=args.jobs)
    print(text, end="")
    return EXIT_OK


def _cmd_verify(args):
    cfg = _load(args)
    path = args.trajectory or os.path.join(args.out, "trajectory.csv")
    with open(path, encoding="utf-8") as fh:
        stored = read_trajectory_csv(fh.read())
    scenario = generate_scenario(cfg.scenario)
    losses = IntervalLosses(scenario.losses, scenario.domain)
    checked = checked_intervals(cfg, scenario)
    total = 0
    for name, traj in stored.items():
        if len(traj) != scenario.horizon:
            raise ConfigError(f"{path}: learner {name} has {len(traj)} rounds, config gives T={scenario.horizon}")
        families = cfg.verify.get(name, ("general", "exp_concave", "strongly_convex"))
        bad = verify_bounds(traj, losses, scenario.regimes, checked=checked, families=families) if families else []
        total += len(bad)
        print(f"{name}: {len(checked) if families else 0} intervals checked, {len(bad)} violations")
        for v in bad:
            print(f"  [{v.p},{v.q}] {v.regime}: regret {v.regret:.6g} > bound {v.bound:.6g}")
    return EXIT_VIOLATION if args.strict and total else EXIT_OK


def _cmd_selftest(args):
    from .selftest import run_selftest

    return EXIT_OK if run_selftest() else EXIT_RUNTIME


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure maps to exit 3
        traceback.print_exc(file=sys.stderr)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
