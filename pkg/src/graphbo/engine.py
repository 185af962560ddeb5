"""The node-space Bayesian optimisation loop.

One run interleaves: uniform (re)initialisation, ego-net construction around
the since-restart incumbent, GP fitting on the in-ego-net observations,
expected-improvement selection, and a trust-region controller that grows the
ego-net on success streaks, shrinks it on failure streaks and restarts the
search when it collapses.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .acquisition import select_next
from .gp import FitConfig, TrainSet, fit
from .graphs import GraphOracle, ego_subgraph
from .kernels import FAMILIES
from .tasks import Objective, oriented_gap


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class TrustRegionState:
    """Adaptive ego-net size with success/failure streak counters."""

    q: int
    q0: int
    n_cap: int
    succ_tol: int = 3
    fail_tol: int = 10
    gamma: float = 1.5
    q_min: int = 1
    succ: int = 0
    fail: int = 0
    needs_restart: bool = False

    def reset(self) -> None:
        self.q = self.q0
        self.succ = 0
        self.fail = 0
        self.needs_restart = False


def tr_update(state: TrustRegionState, improved: bool,
              n_known: Optional[int] = None) -> TrustRegionState:
    """Advance the controller by one success/failure event.

    succ_tol consecutive successes expand q by gamma (capped at the node
    count); fail_tol consecutive failures shrink it by gamma (floored at
    q_min). Reaching q <= q_min raises the restart flag.
    """
    cap = n_known if n_known is not None else state.n_cap
    if improved:
        state.succ += 1
        state.fail = 0
        if state.succ >= state.succ_tol:
            state.q = min(_round_half_up(state.gamma * state.q), cap)
            state.succ = 0
    else:
        state.fail += 1
        state.succ = 0
        if state.fail >= state.fail_tol:
            state.q = max(_round_half_up(state.q / state.gamma), state.q_min)
            state.fail = 0
    if state.q <= state.q_min:
        state.needs_restart = True
    return state


@dataclass(frozen=True)
class BOConfig:
    """Engine settings. The controller defaults are robust across tasks and
    can all be overridden per experiment."""

    budget: int
    n_init: int = 10
    q0: int = 100
    succ_tol: int = 3
    fail_tol: int = 10
    gamma: float = 1.5
    q_min: int = 1
    kernel: str = "sum_inverse_polynomial"
    fit: FitConfig = field(default_factory=FitConfig)
    seed: int = 0
    direction: Optional[str] = None  # validated against the objective
    record_wall_ms: bool = True

    def validate(self) -> None:
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        if self.budget < self.n_init:
            raise ValueError(f"budget {self.budget} smaller than n_init {self.n_init}")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.q_min < 1:
            raise ValueError("q_min must be at least 1")
        if self.q0 < self.q_min:
            raise ValueError("q0 must be at least q_min")
        if self.kernel not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.kernel!r}")
        if self.direction not in (None, "min", "max"):
            raise ValueError("direction must be 'min' or 'max'")


@dataclass
class ObservationLog:
    """Every evaluation of a run, with restart segmentation."""

    nodes: list[int] = field(default_factory=list)
    observed: list[float] = field(default_factory=list)
    true_values: list[float] = field(default_factory=list)
    visited: set[int] = field(default_factory=set)
    restart_marks: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def append(self, node: int, observed: float, true_value: float) -> None:
        self.nodes.append(node)
        self.observed.append(observed)
        self.true_values.append(true_value)
        self.visited.add(node)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class RunResult:
    """Per-evaluation traces shared by the BO engine and all baselines."""

    method: str
    direction: str
    nodes: np.ndarray
    observed: np.ndarray
    incumbent: np.ndarray      # best observed value so far, raw units
    regret: np.ndarray
    wall_ms: np.ndarray
    adjacency_queries: np.ndarray
    best_node: int
    best_value: float
    revealed_nodes: int
    restart_marks: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return int(self.nodes.size)


class RunRecorder:
    """Accumulates the RunResult traces as observations arrive."""

    def __init__(self, objective: Objective, oracle: GraphOracle,
                 record_wall_ms: bool = True):
        self.objective = objective
        self.oracle = oracle
        self.record_wall_ms = record_wall_ms
        self.sign = 1.0 if objective.direction == "min" else -1.0
        self.log = ObservationLog()
        self.incumbent_trace: list[float] = []
        self.regret_trace: list[float] = []
        self.wall_ms: list[float] = []
        self.queries: list[int] = []
        self.best_internal = np.inf
        self.best_node = -1
        self._last_t = time.perf_counter()

    def observe(self, node: int, rng: np.random.Generator) -> float:
        """Query the objective at ``node`` and append one trace row.

        Returns the internal (minimization-oriented) observation.
        """
        try:
            raw = self.objective.observe(node, rng)
        except Exception as exc:
            raise RuntimeError(
                f"objective evaluation failed at node {node} "
                f"(evaluation {len(self.log) + 1})") from exc
        internal = self.sign * raw
        self.log.append(node, raw, self.objective.true_value(node))
        if internal < self.best_internal:
            self.best_internal = internal
            self.best_node = node
        self.incumbent_trace.append(self.sign * self.best_internal)
        self.regret_trace.append(self._regret())
        now = time.perf_counter()
        self.wall_ms.append((now - self._last_t) * 1e3 if self.record_wall_ms else 0.0)
        self._last_t = now
        self.queries.append(self.oracle.query_count)
        return internal

    def _regret(self) -> float:
        if self.objective.optimum is None:
            return float("nan")
        best_true = self.objective.true_value(self.best_node)
        return oriented_gap(best_true, self.objective.optimum, self.objective.direction)

    def result(self, method: str) -> RunResult:
        return RunResult(
            method=method,
            direction=self.objective.direction,
            nodes=np.asarray(self.log.nodes, dtype=np.int64),
            observed=np.asarray(self.log.observed, dtype=float),
            incumbent=np.asarray(self.incumbent_trace, dtype=float),
            regret=np.asarray(self.regret_trace, dtype=float),
            wall_ms=np.asarray(self.wall_ms, dtype=float),
            adjacency_queries=np.asarray(self.queries, dtype=np.int64),
            best_node=self.best_node,
            best_value=self.sign * self.best_internal,
            revealed_nodes=len(self.oracle.revealed),
            restart_marks=list(self.log.restart_marks),
            notes=list(self.log.notes),
        )


def restart_init(oracle: GraphOracle, recorder: RunRecorder, n_init: int,
                 budget: int, rng: np.random.Generator) -> list[tuple[int, float]]:
    """Draw fresh uniform unvisited nodes and observe them.

    Takes min(n_init, remaining budget, remaining unvisited) draws; returns
    (node, internal value) pairs, empty when the universe is exhausted.
    """
    remaining_budget = budget - len(recorder.log)
    k = min(n_init, remaining_budget)
    if k <= 0:
        return []
    nodes = oracle.sample_nodes(k, rng, exclude=recorder.log.visited)
    out = []
    for v in nodes:
        out.append((v, recorder.observe(v, rng)))
    return out


def run(oracle: GraphOracle, objective: Objective, config: BOConfig) -> RunResult:
    """Full optimisation run under an evaluation budget.

    Stops after exactly min(budget, n) objective evaluations. Deterministic
    for a fixed config seed.
    """
    config.validate()
    if config.direction is not None and config.direction != objective.direction:
        raise ValueError(
            f"config direction {config.direction!r} conflicts with objective "
            f"direction {objective.direction!r}")
    rng = np.random.default_rng(config.seed)
    recorder = RunRecorder(objective, oracle, config.record_wall_ms)
    tr = TrustRegionState(q=config.q0, q0=config.q0, n_cap=oracle.n,
                          succ_tol=config.succ_tol, fail_tol=config.fail_tol,
                          gamma=config.gamma, q_min=config.q_min)
    target_evals = min(config.budget, oracle.n)
    need_restart = True
    # since-restart state
    seg_nodes: list[int] = []
    seg_internal: list[float] = []
    inc_node = -1
    inc_val = np.inf

    while len(recorder.log) < target_evals:
        if need_restart:
            recorder.log.restart_marks.append(len(recorder.log))
            draws = restart_init(oracle, recorder, config.n_init, target_evals, rng)
            if not draws:
                recorder.log.notes.append(
                    f"terminated early after {len(recorder.log)} evaluations: "
                    "node universe exhausted")
                break
            seg_nodes = [v for v, _ in draws]
            seg_internal = [y for _, y in draws]
            best = int(np.argmin(seg_internal))
            inc_node, inc_val = seg_nodes[best], seg_internal[best]
            tr.reset()
            need_restart = False
            continue

        ego = ego_subgraph(oracle, inc_node, tr.q, rng)
        in_ego = [(v, y) for v, y in zip(seg_nodes, seg_internal) if ego.contains(v)]
        trainset = TrainSet(
            indices=np.asarray([ego.local_index(v) for v, _ in in_ego], dtype=np.int64),
            y=np.asarray([y for _, y in in_ego], dtype=float))
        model = fit(ego, trainset, config.kernel, config.fit, rng)
        choice = select_next(model, ego, recorder.log.visited)

        if choice is None:
            improved = False  # exhausted ego-net: no query, plain failure
        else:
            y_internal = recorder.observe(choice.node, rng)
            seg_nodes.append(choice.node)
            seg_internal.append(y_internal)
            improved = y_internal < inc_val
            if improved:
                inc_node, inc_val = choice.node, y_internal
        tr_update(tr, improved)
        if tr.needs_restart:
            need_restart = True
    return recorder.result(f"bo-{config.kernel}")
