"""Experiment harness: configuration, execution grids, kernel-validation
regression, metric aggregation and machine-readable outputs.

An experiment is a (method x seed) grid on one task. Every cell gets its own
RNG stream derived by stable hashing, so results are reproducible and adding
methods never perturbs existing cells; all methods at a given seed index share
the same problem instance (graph + objective) for a fair comparison.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import baselines, tasks
from .engine import BOConfig, RunResult, run
from .gp import FitConfig, TrainSet, fit
from .graphs import AdjacencyGraph, GraphOracle, ego_subgraph, gen_ba, gen_grid2d, gen_ws, load_edge_list
from .kernels import FAMILIES, scaled_laplacian, spectral_weights

CSV_COLUMNS = ("iteration", "node_id", "observed_y", "incumbent_y", "regret",
               "wall_ms", "adjacency_queries")

_TASK_PARAMS = {
    "betweenness-centrality": {"noise"},
    "eigenvector-centrality": {"noise"},
    "degree": {"noise"},
    "ackley": {"noise", "box"},
    "rosenbrock": {"noise", "box"},
    "sir-patient-zero": {"beta", "gamma", "epsilon", "horizon",
                         "initial_fraction", "noise"},
    "team": {"pool_size", "n_skills", "alpha", "n_teams",
             "jaccard_threshold", "noise"},
}

_GRAPH_PARAMS = {
    "ba": {"n", "m"},
    "ws": {"n", "k", "beta"},
    "grid": {"side"},
    "edge_list": {"path"},
}

_BO_KEYS = {"n_init", "q0", "succ_tol", "fail_tol", "gamma", "q_min", "fit"}
_FIT_KEYS = {"n_restarts", "max_iter", "tol", "noise_floor", "noise_variance",
             "learn_output_scale", "fixed_output_scale", "epsilon", "nu", "eta",
             "max_jitter"}


class ConfigError(ValueError):
    """Raised for malformed or contradictory experiment configurations."""


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of identifying parts."""
    text = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    task: dict
    methods: list[str]
    budget: int
    seeds: list[int]
    graph: Optional[dict] = None
    bo: dict = field(default_factory=dict)
    output_dir: str = "results"
    master_seed: int = 0
    record_wall_ms: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _check_keys(data, {"task", "methods", "budget", "seeds", "graph", "bo",
                           "output_dir", "master_seed", "record_wall_ms"},
                    "experiment config")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def validate(self) -> None:
        if not self.methods:
            raise ConfigError("need at least one method")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        family = self.task.get("family")
        if family not in _TASK_PARAMS:
            raise ConfigError(f"unknown task family {family!r}")
        _check_keys({k: v for k, v in self.task.items() if k != "family"},
                    _TASK_PARAMS[family], f"task {family!r}")
        if family == "team":
            if self.graph is not None:
                raise ConfigError("the team task builds its own graph; omit 'graph'")
        else:
            if self.graph is None:
                raise ConfigError(f"task {family!r} requires a 'graph' section")
            gen = self.graph.get("generator")
            if gen not in _GRAPH_PARAMS:
                raise ConfigError(f"unknown graph generator {gen!r}")
            _check_keys({k: v for k, v in self.graph.items() if k != "generator"},
                        _GRAPH_PARAMS[gen], f"graph {gen!r}")
            if gen == "edge_list" and not Path(self.graph["path"]).exists():
                raise ConfigError(f"edge list file not found: {self.graph['path']}")
            if family in ("ackley", "rosenbrock") and gen != "grid":
                raise ConfigError(f"task {family!r} requires a grid graph")
        for m in self.methods:
            if m in baselines.METHODS:
                continue
            if m.startswith("bo-") and m[3:] in FAMILIES:
                continue
            raise ConfigError(f"unknown method tag {m!r}")
        _check_keys(self.bo, _BO_KEYS, "bo overrides")
        _check_keys(self.bo.get("fit", {}), _FIT_KEYS, "bo.fit overrides")


def build_graph(spec: dict, seed: int) -> AdjacencyGraph:
    gen = spec["generator"]
    if gen == "ba":
        return gen_ba(spec["n"], spec["m"], seed)
    if gen == "ws":
        return gen_ws(spec["n"], spec["k"], spec["beta"], seed)
    if gen == "grid":
        return gen_grid2d(spec["side"])[0]
    if gen == "edge_list":
        with open(spec["path"], encoding="utf-8") as f:
            return load_edge_list(f)
    raise ConfigError(f"unknown graph generator {gen!r}")


def build_instance(config: ExperimentConfig,
                   seed_index: int) -> tuple[AdjacencyGraph, tasks.Objective]:
    """Problem instance for one seed index, shared by every method."""
    inst = derive_seed(config.master_seed, "instance", seed_index)
    family = config.task["family"]
    params = {k: v for k, v in config.task.items() if k != "family"}
    noise = params.pop("noise", 0.0)

    if family == "team":
        team_cfg = tasks.TeamConfig(seed=derive_seed(inst, "team"), **params)
        return tasks.team_task(team_cfg, noise=noise)

    graph = build_graph(config.graph, derive_seed(inst, "graph"))
    if config.budget > graph.n:
        raise ConfigError(f"budget {config.budget} exceeds node count {graph.n}")
    if family == "betweenness-centrality":
        return graph, tasks.betweenness_objective(graph, noise=noise)
    if family == "eigenvector-centrality":
        return graph, tasks.eigenvector_objective(graph, noise=noise)
    if family == "degree":
        return graph, tasks.degree_objective(graph, noise=noise)
    if family in ("ackley", "rosenbrock"):
        side = config.graph["side"]
        builder = tasks.ackley_on_grid if family == "ackley" else tasks.rosenbrock_on_grid
        kwargs = {"noise": noise}
        if "box" in params:
            kwargs["box"] = tuple(params["box"])
        return graph, builder(side, **kwargs)
    if family == "sir-patient-zero":
        sir = tasks.SIRParams(seed=derive_seed(inst, "sir"),
                              **{k: v for k, v in params.items()})
        tau = tasks.sir_simulate(graph, sir)
        return graph, tasks.patient_zero_objective(tau, sir.horizon, noise=noise)
    raise ConfigError(f"unknown task family {family!r}")


def _fit_config(overrides: dict) -> FitConfig:
    return FitConfig(**overrides)


def run_cell(config: ExperimentConfig, method: str, seed_index: int) -> RunResult:
    """Execute one (method, seed) cell with its own derived RNG stream."""
    graph, objective = build_instance(config, seed_index)
    oracle = GraphOracle(graph)
    cell_seed = derive_seed(config.master_seed, method, seed_index)
    if method in baselines.METHODS:
        sc = baselines.SearcherConfig(method=method, budget=config.budget,
                                      seed=cell_seed,
                                      record_wall_ms=config.record_wall_ms)
        return baselines.SEARCHERS[method](oracle, objective, sc)
    bo_over = {k: v for k, v in config.bo.items() if k != "fit"}
    bo = BOConfig(budget=config.budget, kernel=method[3:], seed=cell_seed,
                  fit=_fit_config(config.bo.get("fit", {})),
                  record_wall_ms=config.record_wall_ms, **bo_over)
    return run(oracle, objective, bo)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_run_csv(path: Path, result: RunResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for i in range(result.evaluations):
            writer.writerow([
                i + 1,
                int(result.nodes[i]),
                _fmt(result.observed[i]),
                _fmt(result.incumbent[i]),
                _fmt(result.regret[i]),
                _fmt(result.wall_ms[i]),
                int(result.adjacency_queries[i]),
            ])


def read_run_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        rows = [[float(x) for x in row] for row in reader]
    arr = np.asarray(rows)
    return {name: arr[:, i] for i, name in enumerate(CSV_COLUMNS)}


@dataclass
class ResultTable:
    """Regret curves for one task: method -> (n_seeds x budget) array."""

    task_name: str
    budget: int
    regret: dict[str, np.ndarray]

    def mean_regret(self, method: str) -> np.ndarray:
        return self.regret[method].mean(axis=0)

    def stderr_regret(self, method: str) -> Optional[np.ndarray]:
        r = self.regret[method]
        if r.shape[0] < 2:
            return None
        return r.std(axis=0, ddof=1) / math.sqrt(r.shape[0])


def _cell_worker(payload: tuple[dict, str, int, str]) -> tuple[str, int, Optional[str]]:
    data, method, seed_index, out_dir = payload
    config = ExperimentConfig.from_dict(data)
    try:
        result = run_cell(config, method, seed_index)
        write_run_csv(Path(out_dir) / f"{method}__seed{seed_index}.csv", result)
        return method, seed_index, None
    except Exception as exc:  # recorded; other cells continue
        return method, seed_index, f"{type(exc).__name__}: {exc}"


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ResultTable:
    """Run the full (method x seed) grid, writing one CSV per cell plus a
    summary JSON with per-method mean/stderr regret across seeds."""
    config.validate()
    build_instance(config, config.seeds[0])  # task/graph construction failures abort here
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = asdict(config)
    payloads = [(data, m, s, str(out_dir)) for m in config.methods for s in config.seeds]
    failures: dict[str, str] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_cell_worker, payloads))
    else:
        outcomes = [_cell_worker(p) for p in payloads]
    for method, seed_index, error in outcomes:
        if error is not None:
            failures[f"{method}__seed{seed_index}"] = error

    regret: dict[str, np.ndarray] = {}
    for method in config.methods:
        curves = []
        for s in config.seeds:
            path = out_dir / f"{method}__seed{s}.csv"
            if path.exists():
                curves.append(read_run_csv(path)["regret"])
        if curves:
            regret[method] = np.vstack(curves)
    table = ResultTable(task_name=config.task["family"], budget=config.budget,
                        regret=regret)

    summary = {
        "config": data,
        "task": config.task["family"],
        "budget": config.budget,
        "seeds": list(config.seeds),
        "failures": failures,
        "methods": {},
    }
    for method in config.methods:
        if method not in regret:
            continue
        stderr = table.stderr_regret(method)
        summary["methods"][method] = {
            "mean_regret": [float(x) for x in table.mean_regret(method)],
            "stderr_regret": None if stderr is None else [float(x) for x in stderr],
            "final_mean_regret": float(table.mean_regret(method)[-1]),
        }
    validate_summary(summary)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return table


def validate_summary(summary: dict) -> None:
    """Schema check for the summary JSON produced by run_experiment."""
    for key in ("config", "task", "budget", "seeds", "failures", "methods"):
        if key not in summary:
            raise ValueError(f"summary missing key {key!r}")
    if not isinstance(summary["methods"], dict):
        raise ValueError("summary 'methods' must be a mapping")
    for method, entry in summary["methods"].items():
        for key in ("mean_regret", "stderr_regret", "final_mean_regret"):
            if key not in entry:
                raise ValueError(f"summary method {method!r} missing {key!r}")
        if entry["stderr_regret"] is not None and \
                len(entry["stderr_regret"]) != len(entry["mean_regret"]):
            raise ValueError(f"summary method {method!r} has mismatched curve lengths")


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ascending ranks starting at 1; tied values share their average rank."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation: Pearson correlation of average-tie rank vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equally sized samples of length >= 2")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx ** 2).sum() * (ry ** 2).sum())
    if denom == 0:
        return 0.0
    return float((rx * ry).sum() / denom)


def aggregate_ranks(tables: Sequence[ResultTable]) -> dict[str, np.ndarray]:
    """Mean rank of each method per evaluation index, averaged across tasks.

    Within each task, methods are ranked by mean regret (1 = best, ties share
    the average rank).
    """
    if not tables:
        raise ValueError("need at least one result table")
    methods = sorted(set.intersection(*(set(t.regret) for t in tables)))
    if not methods:
        raise ValueError("tables share no methods")
    budget = min(t.budget for t in tables)
    total = np.zeros((len(methods), budget))
    for t in tables:
        curves = np.vstack([t.mean_regret(m)[:budget] for m in methods])
        for it in range(budget):
            total[:, it] += _average_ranks(curves[:, it])
    total /= len(tables)
    return {m: total[i] for i, m in enumerate(methods)}


@dataclass
class KernelValidationResult:
    family: str
    rhos: np.ndarray                 # held-out Spearman rho per seed
    curve_lambdas: np.ndarray        # lambda grid (or eigenvalues for ARD)
    curves: np.ndarray               # learned r^{-1} samples, one row per seed


def kernel_validation(graph_spec: dict, eigen_index: int = 1,
                      train_fraction: float = 0.5, noise: float = 0.0,
                      families: Sequence[str] = ("polynomial",),
                      seeds: Sequence[int] = (0,),
                      fit_config: FitConfig = FitConfig(),
                      master_seed: int = 0,
                      max_nodes: int = 1000) -> dict[str, KernelValidationResult]:
    """Regression check of each kernel family on a full-graph GP.

    Targets are the entries of one Laplacian eigenvector (optionally corrupted
    with Gaussian noise for the fit); each family is scored by the Spearman
    correlation between held-out predictions and the clean eigenvector, and
    its learned inverse regularisation curve is sampled on a lambda grid.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train fraction must lie strictly between 0 and 1")
    graph = build_graph(graph_spec, derive_seed(master_seed, "validation-graph"))
    if graph.n > max_nodes:
        raise ValueError(f"full-graph validation capped at {max_nodes} nodes, got {graph.n}")
    whole = ego_subgraph(GraphOracle(graph), 0, graph.n,
                         np.random.default_rng(derive_seed(master_seed, "ego")))
    lap = scaled_laplacian(whole.graph)
    if not 0 <= eigen_index < lap.n:
        raise ValueError(f"eigen index {eigen_index} out of range for {lap.n} nodes")
    target = lap.eigenvectors[:, eigen_index]
    lam_grid = np.linspace(0.0, 1.0, 101)

    out: dict[str, KernelValidationResult] = {}
    for family in families:
        rhos = []
        curves = []
        curve_lams = None
        for seed in seeds:
            rng = np.random.default_rng(derive_seed(master_seed, "validation", family, seed))
            perm = rng.permutation(lap.n)
            n_train = max(1, round(train_fraction * lap.n))
            train_idx, test_idx = perm[:n_train], perm[n_train:]
            y_train = target[train_idx].copy()
            if noise > 0:
                y_train += rng.normal(0.0, noise, size=y_train.shape)
            model = fit(whole, TrainSet(indices=train_idx, y=y_train), family,
                        fit_config, rng)
            mu, _ = model.predict(test_idx)
            rhos.append(spearman_rho(mu, target[test_idx]))
            if family == "diffusion_ard":
                curve_lams = lap.eigenvalues
                curves.append(spectral_weights(lap.eigenvalues, model.spec))
            else:
                # non-ARD weights are elementwise in lambda, so the fitted
                # spectral filter can be sampled on any grid
                curve_lams = lam_grid
                curves.append(spectral_weights(lam_grid, model.spec))
        out[family] = KernelValidationResult(
            family=family, rhos=np.asarray(rhos),
            curve_lambdas=np.asarray(curve_lams), curves=np.vstack(curves))
    return out
