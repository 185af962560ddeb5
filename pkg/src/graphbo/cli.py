"""Command-line interface: run experiment grids, validate kernels, rank methods."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .gp import FitConfig
from .harness import (
    _FIT_KEYS,
    ConfigError,
    ExperimentConfig,
    ResultTable,
    _check_keys,
    aggregate_ranks,
    kernel_validation,
    run_experiment,
    validate_summary,
)

_VALIDATION_KEYS = {"graph", "eigen_index", "train_fraction", "noise", "families",
                    "seeds", "fit", "output_dir", "master_seed"}


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.out:
        config.output_dir = args.out
    if args.seed is not None:
        config.master_seed = args.seed
    table = run_experiment(config, jobs=args.jobs)
    summary_path = Path(config.output_dir) / "summary.json"
    print(f"wrote {summary_path}")
    for method in sorted(table.regret):
        print(f"  {method}: final mean regret {table.mean_regret(method)[-1]:.6g}")
    return 0


def _cmd_validate_kernels(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as f:
        data = json.load(f)
    unknown = set(data) - _VALIDATION_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in validation config: {sorted(unknown)}")
    _check_keys(data.get("fit", {}), _FIT_KEYS, "validation fit overrides")
    out_dir = Path(args.out or data.get("output_dir", "validation"))
    master_seed = args.seed if args.seed is not None else data.get("master_seed", 0)
    results = kernel_validation(
        graph_spec=data["graph"],
        eigen_index=data.get("eigen_index", 1),
        train_fraction=data.get("train_fraction", 0.5),
        noise=data.get("noise", 0.0),
        families=data.get("families", ["polynomial"]),
        seeds=data.get("seeds", [0]),
        fit_config=FitConfig(**data.get("fit", {})),
        master_seed=master_seed,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {}
    for family, res in results.items():
        payload[family] = {
            "rhos": [float(r) for r in res.rhos],
            "median_rho": float(np.median(res.rhos)),
            "curve_lambdas": [float(x) for x in res.curve_lambdas],
            "curves": [[float(x) for x in row] for row in res.curves],
        }
        print(f"  {family}: median held-out Spearman rho {np.median(res.rhos):.4f}")
    path = out_dir / "kernel_validation.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {path}")
    return 0


def _cmd_rank(args: argparse.Namespace) -> int:
    root = Path(args.results_dir)
    summaries = sorted(root.rglob("summary.json"))
    if not summaries:
        print(f"no summary.json found under {root}", file=sys.stderr)
        return 1
    tables = []
    for path in summaries:
        with open(path, encoding="utf-8") as f:
            summary = json.load(f)
        validate_summary(summary)
        regret = {m: np.asarray([entry["mean_regret"]])
                  for m, entry in summary["methods"].items()}
        tables.append(ResultTable(task_name=summary["task"],
                                  budget=summary["budget"], regret=regret))
    ranks = aggregate_ranks(tables)
    out = Path(args.out or root / "aggregated_ranks.csv")
    methods = sorted(ranks)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["iteration"] + methods)
        n = len(next(iter(ranks.values())))
        for i in range(n):
            writer.writerow([i + 1] + [repr(float(ranks[m][i])) for m in methods])
    print(f"wrote {out} ({len(tables)} tasks, {len(methods)} methods)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphbo",
        description="Bayesian optimisation over functions on graph nodes")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="override the config's output directory")
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="max concurrent (method, seed) cells")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate-kernels",
                           help="kernel regression check on a full graph")
    p_val.add_argument("config")
    p_val.add_argument("--out")
    p_val.add_argument("--seed", type=int)
    p_val.set_defaults(func=_cmd_validate_kernels)

    p_rank = sub.add_parser("rank", help="aggregate method ranks across experiments")
    p_rank.add_argument("results_dir")
    p_rank.add_argument("--out")
    p_rank.set_defaults(func=_cmd_rank)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
