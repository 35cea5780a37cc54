"""Command-line entry point.

Subcommands cover the four experiment kinds plus an eta sweep; defaults per
subcommand follow the standard protocols (hidden-mode: T=500 over 10 seeds;
linear: T=200 over 20 seeds with a 256-candidate set).  A JSON config file
may supply any :class:`ExperimentConfig` field; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields

from .envs import LinearQInstance
from .harness import (
    ExperimentConfig,
    SelectorSpec,
    emit,
    run_experiment,
)

_BASELINES = (SelectorSpec("greedy"), SelectorSpec("ucb"), SelectorSpec("ts"))

# (offline sizes, horizon, seeds, default eta list) per subcommand
_PROTOCOLS = {
    "hidden-mode": ((100, 200, 300, 1000), 500, 10, (0.0,)),
    "linear": ((20, 50, 100), 200, 20, (0.5,)),
    "linearq": ((1000,), None, 1000, (0.0,)),
    "diag": ((20,), 200, 20, (0.0,)),
    "sweep-eta": (None, None, None, (0.0, 0.01, 0.05, 0.1)),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idsbandits",
        description="Offline-to-online bandit experiments with "
                    "information-directed sampling",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "hidden-mode": "hidden-mode bandit table",
        "linear": "biased linear contextual bandit table",
        "linearq": "two-mode separation instance",
        "diag": "linear bandit with information/coverage diagnostics",
        "sweep-eta": "eta sweep on a chosen environment",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--N", action="append", type=int, default=None,
                       help="offline dataset size (repeatable)")
        p.add_argument("--T", type=int, default=None, help="online horizon")
        p.add_argument("--seeds", type=int, default=None, help="number of seeds")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--eta", action="append", type=float, default=None,
                       help="information-ratio regulariser (repeatable)")
        p.add_argument("--q", type=float, default=None,
                       help="per-episode offline signal probability")
        p.add_argument("--c", type=float, default=None, help="probe cost")
        p.add_argument("--beta", type=float, default=None,
                       help="behaviour policy bias")
        p.add_argument("--M", type=int, default=None, help="candidate set size")
        p.add_argument("--samples", type=int, default=None,
                       help="Monte Carlo samples per regret estimate")
        p.add_argument("--ucb-alpha", type=float, default=None,
                       help="UCB bonus multiplier")
        p.add_argument("--realized", action="store_true", default=None,
                       help="record realized instead of expected regret")
        p.add_argument("--out", type=str, default=None, help="output path")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default=None, help="output format")
        p.add_argument("--summary", action="store_true",
                       help="write summary rows instead of traces (csv)")
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override its fields")
        if name == "sweep-eta":
            p.add_argument("--env", choices=("hidden-mode", "linear"),
                           default="hidden-mode",
                           help="environment to sweep over")
    return parser


def _selectors_from(file_cfg: dict, etas, include_baselines: bool) -> tuple:
    if "selectors" in file_cfg:
        return tuple(SelectorSpec(**spec) for spec in file_cfg["selectors"])
    base = _BASELINES if include_baselines else ()
    return base + tuple(SelectorSpec("ids", float(e)) for e in etas)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config) as handle:
            file_cfg = json.load(handle)
    command = args.command
    sizes, horizon, seeds, default_etas = _PROTOCOLS[command]
    if command == "sweep-eta":
        sizes, horizon, seeds, _ = _PROTOCOLS[args.env]
        kind = args.env
    else:
        kind = {"diag": "diagnostics"}.get(command, command)

    etas = args.eta if args.eta is not None else list(default_etas)
    include_baselines = command not in ("linearq", "diag")
    if command == "linearq":
        # separation protocol compares probability matching to the
        # information-ratio rule only
        base = (SelectorSpec("ts"),)
        selectors = base + tuple(SelectorSpec("ids", float(e)) for e in etas)
        if "selectors" in file_cfg:
            selectors = tuple(SelectorSpec(**s) for s in file_cfg["selectors"])
    else:
        selectors = _selectors_from(file_cfg, etas, include_baselines)

    overrides = {
        "kind": kind,
        "selectors": selectors,
        "offline_sizes": tuple(args.N) if args.N else None,
        "horizon": args.T,
        "n_seeds": args.seeds,
        "master_seed": args.seed,
        "q": args.q,
        "c": args.c,
        "beta": args.beta,
        "n_candidates": args.M,
        "mc_samples": args.samples,
        "ucb_alpha": args.ucb_alpha,
        "realized": args.realized,
        "out": args.out,
        "fmt": args.fmt,
    }
    defaults = {
        "offline_sizes": tuple(sizes) if sizes else None,
        "horizon": horizon,
        "n_seeds": seeds,
    }

    values: dict = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for key, value in file_cfg.items():
        if key == "selectors":
            continue
        if key not in known:
            raise ValueError(f"unknown config field {key!r}")
        values[key] = tuple(value) if key == "offline_sizes" else value
    for key, value in defaults.items():
        if value is not None and key not in values:
            values[key] = value
    for key, value in overrides.items():
        if value is not None:
            values[key] = value

    cfg = ExperimentConfig(**values)
    if command == "linearq" and args.T is None and "horizon" not in file_cfg:
        # default the horizon to the discovery threshold of the largest cell
        threshold = max(
            math.ceil(1.0 / LinearQInstance(cfg.c, cfg.q, int(n)).p)
            for n in cfg.offline_sizes
        )
        cfg = ExperimentConfig(**{**values, "horizon": int(threshold)})
    cfg.validate()
    return cfg


def _print_rows(rows) -> None:
    print(f"{'algorithm':<12}{'N':>8}{'eta':>8}{'mean':>12}{'std':>12}{'seeds':>8}")
    for row in rows:
        print(f"{row.algorithm:<12}{row.N:>8}{row.eta:>8g}"
              f"{row.mean_final_regret:>12.4f}{row.std_final_regret:>12.4f}"
              f"{row.n_seeds:>8}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg)
        _print_rows(result.rows)
        if cfg.out:
            mode = "summary" if getattr(args, "summary", False) else "trace"
            written = emit(result, path=cfg.out, mode=mode)
            print(f"wrote {written}")
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
