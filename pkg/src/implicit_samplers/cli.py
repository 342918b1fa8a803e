"""Command line: ``run --config FILE`` and ``repro fig1|fig2|fig3|fig4``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .experiment import ExperimentConfig, report, run_sweep, write_csv
from .plotting import emit_plot

log = logging.getLogger("implicit_samplers")

ALL_METHODS = ["lm", "slm", "rm", "srm"]

# Built-in sweeps; random-walk runs use 1e4 samples per point, the default.
REPRO_CONFIGS = {
    # Q against eps for the N=2 walk; "--set n_dim=200" gives the right-hand panel
    "fig1": {
        "problem": {"name": "random_walk", "params": {"n_dim": 2, "alpha": 1.0, "beta": 1.0}},
        "methods": ALL_METHODS,
        "sweep": {"axis": "epsilon", "values": [1e-6, 3e-6, 1e-5, 3e-5, 1e-4]},
    },
    # Q against N; eps is a free choice here, override with --set epsilon=...
    "fig2": {
        "problem": {"name": "random_walk", "params": {"epsilon": 1e-5, "alpha": 1.0, "beta": 1.0}},
        "methods": ALL_METHODS,
        "sweep": {"axis": "n_dim", "values": [2, 5, 10, 20, 50, 100, 200]},
    },
    "fig3": {
        "problem": {"name": "lorenz63", "params": {"epsilon": 1.0}},
        "methods": ALL_METHODS,
        "sweep": {"axis": "T", "values": [0.02, 0.04, 0.08, 0.16]},
        "n_samples": 1000,
    },
    "fig4": {
        "problem": {"name": "lorenz63", "params": {"T": 0.05}},
        "methods": ALL_METHODS,
        "sweep": {"axis": "epsilon", "values": [1e-5, 1e-4, 1e-3, 1e-2]},
        "n_samples": 1000,
    },
}


def _parse_set(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        out[key] = json.loads(val)
    return out


def execute(cfg: ExperimentConfig, out_dir: Path) -> int:
    """Run a sweep, write results.csv and plot.svg, print the report; returns the exit code."""
    out_dir.mkdir(parents=True, exist_ok=True)
    table = run_sweep(cfg)
    write_csv(table, out_dir / "results.csv")
    try:
        emit_plot(table, out_dir / "plot.svg")
    except ValueError as exc:
        log.error("no plot written: %s", exc)
    print(report(table))
    n_fail = sum(not r.ok for r in table)
    return 0 if n_fail == 0 else 2


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.n_samples is not None:
        changes["n_samples"] = args.n_samples
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    if args.set:
        changes["params"] = {**cfg.params, **_parse_set(args.set)}
    changes["workers"] = args.workers
    return replace(cfg, **changes)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="implicit-samplers", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep from a JSON config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int)

    rep = sub.add_parser("repro", help="run a built-in figure sweep")
    rep.add_argument("figure", choices=sorted(REPRO_CONFIGS))

    for p in (run, rep):
        p.add_argument("--n-samples", type=int)
        p.add_argument("--out", type=Path)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a problem parameter")
        p.add_argument("--workers", type=int, default=1, help="threads per ensemble")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = ExperimentConfig.load(args.config)
        else:
            raw = dict(REPRO_CONFIGS[args.figure], output_dir=f"out/{args.figure}")
            cfg = ExperimentConfig.from_dict(raw)
        cfg = _apply_overrides(cfg, args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return execute(cfg, Path(cfg.output_dir))


if __name__ == "__main__":
    sys.exit(main())
