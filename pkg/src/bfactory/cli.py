"""Command-line front end: single flips, verification runs, and CSV sweeps.

Three subcommands:

``flip``
    One factory invocation; prints the outcome and its flip ledger.
``verify``
    Many trials plus an oracle comparison; JSON verdict on stdout.
``sweep``
    A grid of verification cells (cartesian product over the list-valued
    config entries); streaming CSV, one row per cell.

Exit codes: 0 pass, 1 statistical failure, 2 invalid configuration,
3 budget abort (``flip`` only; ``verify`` records aborts as failures).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

from .coins import CoinEnsemble
from .factories import Budget, BudgetExceededError, InvocationStats
from .harness import bind_factory, judge, run_trials
from .oracle import (FactoryKind, PreconditionError, equivalent_flip_lower_bound,
                     exact_output_mean, expected_flip_bound)
from .rng import RngStream

EXIT_PASS = 0
EXIT_STAT_FAIL = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3

FACTORY_TAGS = ("logistic", "walk_to_zero", "high_power", "residual",
                "linear", "small_r")

SWEEP_COLUMNS = [
    "experiment_id", "factory", "k", "C_total", "slack_kind", "slack_value",
    "r_true", "n_trials", "heads", "p_hat", "target_mean", "z", "mean_flips",
    "flip_bound", "flip_ratio", "mean_recursion", "aborted", "seed",
    "elapsed_s", "flip_lower_bound",
]


@dataclass
class ExperimentConfig:
    factory: Optional[str] = None
    constants: tuple = ()
    biases: tuple = ()
    epsilon: Optional[float] = None
    m_bound: Optional[float] = None
    m: Optional[int] = None
    beta: Optional[float] = None
    trials: int = 100_000
    seed: int = 0
    workers: int = 1
    max_flips: Optional[int] = None
    max_depth: Optional[int] = None
    z_threshold: float = 4.0

    def kind(self) -> FactoryKind:
        if self.factory is None:
            raise PreconditionError("no factory given (use --factory or a config file)")
        if self.factory not in FACTORY_TAGS:
            raise PreconditionError(
                f"unknown factory {self.factory!r}; expected one of {FACTORY_TAGS}")
        # Constructing the kind directly makes stray parameters an error too.
        return FactoryKind(self.factory, m=self.m, beta=self.beta,
                           epsilon=self.epsilon, mean_bound=self.m_bound)

    def budget(self) -> Optional[Budget]:
        if self.max_flips is None and self.max_depth is None:
            return None
        return Budget(max_flips=self.max_flips, max_depth=self.max_depth)

    def echo(self) -> dict:
        return {
            "factory": self.factory, "constants": list(self.constants),
            "biases": list(self.biases), "epsilon": self.epsilon,
            "m_bound": self.m_bound, "m": self.m, "beta": self.beta,
            "trials": self.trials, "seed": self.seed, "workers": self.workers,
            "max_flips": self.max_flips, "max_depth": self.max_depth,
            "z_threshold": self.z_threshold,
        }


_CONFIG_KEYS = ("factory", "constants", "biases", "epsilon", "m_bound", "m",
                "beta", "trials", "seed", "workers", "max_flips", "max_depth",
                "z_threshold")


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise PreconditionError(f"config file {path} must hold a JSON object")
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
    return data


def _parse_reals(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise PreconditionError(f"expected comma-separated numbers, got {text!r}")


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then config-file values, then explicit flags."""
    cfg = ExperimentConfig()
    if args.config:
        for key, value in _load_config_file(args.config).items():
            if key in ("constants", "biases") and value is not None:
                value = tuple(float(x) for x in value)
            setattr(cfg, key, value)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in ("constants", "biases"):
            value = _parse_reals(value)
        setattr(cfg, key, value)
    return cfg


# -- subcommands -------------------------------------------------------------


def cmd_flip(cfg: ExperimentConfig) -> int:
    kind = cfg.kind()
    # Full oracle gate: the harness knows the biases even though the factory
    # will not see them.
    exact_output_mean(kind, cfg.constants, cfg.biases)
    coins = CoinEnsemble(cfg.biases)
    stream = RngStream(cfg.seed, 0)
    stats = InvocationStats()
    run = bind_factory(kind, cfg.constants, cfg.budget())
    try:
        bit = run(coins, stream, stats)
    except BudgetExceededError as exc:
        stats.aborted = True
        print(f"aborted: {exc}", file=sys.stderr)
        print(f"flips per coin: {coins.ledger.per_coin}", file=sys.stderr)
        return EXIT_BUDGET
    print(f"outcome: {bit}")
    print(f"flips per coin: {coins.ledger.per_coin}")
    print(f"flips total: {coins.ledger.total}")
    print(f"linear factory calls: {stats.recursion_calls}")
    return EXIT_PASS


def cmd_verify(cfg: ExperimentConfig) -> int:
    kind = cfg.kind()
    exact_output_mean(kind, cfg.constants, cfg.biases)  # reject before sampling
    summary = run_trials(kind, cfg.constants, cfg.biases, cfg.trials,
                         seed=cfg.seed, workers=cfg.workers, budget=cfg.budget())
    verdict = judge(summary, kind, cfg.constants, cfg.biases, cfg.z_threshold)
    r = math.fsum(c * p for c, p in zip(cfg.constants, cfg.biases))
    report = {
        "config": cfg.echo(),
        "oracle": {
            "r": r,
            "target_mean": verdict.target_mean,
            "flip_bound": verdict.flip_bound,
            "flip_bound_is_exact": verdict.flip_bound_is_exact,
        },
        "summary": {
            "n": summary.n,
            "heads": summary.heads,
            "flip_total_sum": summary.flip_total_sum,
            "per_coin_flip_sums": list(summary.per_coin_flip_sums),
            "recursion_call_sum": summary.recursion_call_sum,
            "max_flips_seen": summary.max_flips_seen,
            "max_depth_seen": summary.max_depth_seen,
            "aborted_count": summary.aborted_count,
            "seed": summary.seed,
            "elapsed_s": round(summary.elapsed, 3),
        },
        "verdict": verdict.as_dict(),
    }
    print(json.dumps(report, indent=2))
    return EXIT_PASS if verdict.passed else EXIT_STAT_FAIL


def _cell_config(values: dict) -> ExperimentConfig:
    return ExperimentConfig(
        factory=values.get("factory"),
        constants=tuple(float(x) for x in values.get("constants", ())),
        biases=tuple(float(x) for x in values.get("biases", ())),
        epsilon=values.get("epsilon"), m_bound=values.get("m_bound"),
        m=values.get("m"), beta=values.get("beta"),
        trials=int(values.get("trials", 100_000)),
        seed=int(values.get("seed", 0)),
        workers=int(values.get("workers", 1)),
        max_flips=values.get("max_flips"),
        max_depth=values.get("max_depth"),
        z_threshold=float(values.get("z_threshold", 4.0)),
    )


def _grid_cells(grid: dict) -> list[ExperimentConfig]:
    """Expand a grid config into per-cell ExperimentConfigs.

    Two shapes are accepted.  The cartesian shape sweeps the product of any
    list-valued entries among epsilon/m_bound/m/beta against the lists of
    constants and biases vectors.  The explicit shape gives ``"cells": [...]``
    where each cell object overrides the file's top-level defaults — needed
    when the swept quantities are coupled (e.g. r tied to each M).
    """
    unknown = set(grid) - set(_CONFIG_KEYS) - {"cells"}
    if unknown:
        raise PreconditionError(f"unknown grid keys: {sorted(unknown)}")

    if "cells" in grid:
        defaults = {k: v for k, v in grid.items() if k != "cells"}
        cells = []
        for cell in grid["cells"]:
            bad = set(cell) - set(_CONFIG_KEYS)
            if bad:
                raise PreconditionError(f"unknown cell keys: {sorted(bad)}")
            cells.append(_cell_config({**defaults, **cell}))
        return cells

    def as_list(key):
        value = grid.get(key)
        if value is None:
            return [None]
        return value if isinstance(value, list) else [value]

    cells = []
    combos = itertools.product(as_list("epsilon"), as_list("m_bound"),
                               as_list("m"), as_list("beta"),
                               grid.get("constants", []), grid.get("biases", []))
    for eps, mb, m, beta, constants, biases in combos:
        cells.append(_cell_config({**grid, "epsilon": eps, "m_bound": mb,
                                   "m": m, "beta": beta, "constants": constants,
                                   "biases": biases}))
    return cells


def _sweep_row(index: int, cfg: ExperimentConfig, kind, summary, verdict) -> dict:
    C_total = math.fsum(cfg.constants)
    r = math.fsum(c * p for c, p in zip(cfg.constants, cfg.biases))
    if kind.slack_kind == "epsilon":
        slack_kind, slack_value = "epsilon", kind.epsilon
    elif kind.slack_kind == "mean_bound":
        slack_kind, slack_value = "mean_bound", kind.mean_bound
    else:
        slack_kind, slack_value = "none", ""
    lower = ""
    if len(cfg.constants) == 1 and C_total * cfg.biases[0] < 1.0:
        lower = equivalent_flip_lower_bound(C_total, cfg.biases[0])
    return {
        "experiment_id": f"{cfg.factory}-{index:03d}",
        "factory": cfg.factory,
        "k": len(cfg.constants),
        "C_total": C_total,
        "slack_kind": slack_kind,
        "slack_value": slack_value,
        "r_true": r,
        "n_trials": summary.n,
        "heads": summary.heads,
        "p_hat": verdict.p_hat,
        "target_mean": verdict.target_mean,
        "z": verdict.z,
        "mean_flips": verdict.flip_mean,
        "flip_bound": verdict.flip_bound,
        "flip_ratio": verdict.flip_ratio,
        "mean_recursion": verdict.recursion_mean,
        "aborted": summary.aborted_count,
        "seed": cfg.seed,
        "elapsed_s": f"{summary.elapsed:.3f}",
        "flip_lower_bound": lower,
    }


def cmd_sweep(config_path: Optional[str], out_path: Optional[str]) -> int:
    if not config_path:
        raise PreconditionError("sweep needs --config pointing at a grid file")
    with open(config_path) as fh:
        grid = json.load(fh)
    if not isinstance(grid, dict):
        raise PreconditionError(f"grid file {config_path} must hold a JSON object")
    cells = _grid_cells(grid)

    # Validate every cell before sampling any of them.
    prepared = []
    for i, cfg in enumerate(cells):
        kind = cfg.kind()
        exact_output_mean(kind, cfg.constants, cfg.biases)
        prepared.append((i, cfg, kind))

    out = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        out.flush()
        all_passed = True
        for i, cfg, kind in prepared:
            cell_seed = cfg.seed + i  # distinct stream families per cell
            summary = run_trials(kind, cfg.constants, cfg.biases, cfg.trials,
                                 seed=cell_seed, workers=cfg.workers,
                                 budget=cfg.budget())
            verdict = judge(summary, kind, cfg.constants, cfg.biases,
                            cfg.z_threshold)
            row = _sweep_row(i, cfg, kind, summary, verdict)
            row["seed"] = cell_seed
            writer.writerow(row)
            out.flush()
            all_passed = all_passed and verdict.passed
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_PASS if all_passed else EXIT_STAT_FAIL


# -- argument parsing --------------------------------------------------------


def _add_experiment_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; flags override its keys")
    sp.add_argument("--factory", choices=FACTORY_TAGS)
    sp.add_argument("--constants", help="comma-separated C_1,..,C_k")
    sp.add_argument("--biases", help="comma-separated p_1,..,p_k")
    sp.add_argument("--epsilon", type=float, help="slack: r <= 1 - epsilon")
    sp.add_argument("--m-bound", dest="m_bound", type=float,
                    help="small-mean bound M: r <= M < 1/2")
    sp.add_argument("--m", type=int, help="walk length / power parameter")
    sp.add_argument("--beta", type=float, help="inflation factor (> 1)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--max-flips", dest="max_flips", type=int)
    sp.add_argument("--max-depth", dest="max_depth", type=int)
    sp.add_argument("--z", dest="z_threshold", type=float,
                    help="pass/fail threshold in standard errors (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bfactory",
        description="Linear Bernoulli factories: flip, verify against closed "
                    "forms, and sweep parameter grids.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("flip", help="run one factory invocation")
    _add_experiment_flags(sp)

    sp = sub.add_parser("verify", help="run trials and judge them (JSON verdict)")
    _add_experiment_flags(sp)

    sp = sub.add_parser("sweep", help="run a grid of cells (CSV)")
    sp.add_argument("--config", help="JSON grid file (list-valued entries sweep)")
    sp.add_argument("--out", help="CSV output path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "flip":
            return cmd_flip(resolve_config(args))
        if args.command == "verify":
            return cmd_verify(resolve_config(args))
        return cmd_sweep(args.config, args.out)
    except (PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
