"""Reference searchers run under the same budget/oracle/logging contract
as the Bayesian engine: uniform random, greedy local search with restarts,
and breadth/depth-first traversal from random roots.

None of them reads global topology; they see the graph only through neighbour
queries and uniform node sampling.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .engine import RunRecorder, RunResult
from .graphs import GraphOracle
from .tasks import Objective

METHODS = ("random", "local", "bfs", "dfs")


@dataclass(frozen=True)
class SearcherConfig:
    method: str
    budget: int
    seed: int = 0
    record_wall_ms: bool = True

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown search method {self.method!r}")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")


def _setup(oracle: GraphOracle, objective: Objective, config: SearcherConfig):
    config.validate()
    rng = np.random.default_rng(config.seed)
    recorder = RunRecorder(objective, oracle, config.record_wall_ms)
    return rng, recorder, min(config.budget, oracle.n)


def random_search(oracle: GraphOracle, objective: Objective,
                  config: SearcherConfig) -> RunResult:
    rng, recorder, budget = _setup(oracle, objective, config)
    nodes = rng.choice(oracle.n, size=budget, replace=False)
    for v in nodes:
        recorder.observe(int(v), rng)
    return recorder.result("random")


def local_search(oracle: GraphOracle, objective: Objective,
                 config: SearcherConfig) -> RunResult:
    """Hill climbing on neighbour samples, restarting from a uniform unvisited
    node whenever the current optimum has no unvisited neighbours left."""
    rng, recorder, budget = _setup(oracle, objective, config)
    current = -1
    current_val = np.inf
    while len(recorder.log) < budget:
        if current < 0:
            starts = oracle.sample_nodes(1, rng, exclude=recorder.log.visited)
            if not starts:
                break
            current = starts[0]
            current_val = recorder.observe(current, rng)
            continue
        options = [w for w in oracle.neighbors(current) if w not in recorder.log.visited]
        if not options:
            current = -1  # local optimum reached: force a restart
            continue
        pick = options[int(rng.integers(len(options)))]
        val = recorder.observe(pick, rng)
        if val < current_val:
            current, current_val = pick, val
    return recorder.result("local")


def _traversal(oracle: GraphOracle, objective: Objective, config: SearcherConfig,
               breadth_first: bool) -> RunResult:
    rng, recorder, budget = _setup(oracle, objective, config)
    pending: deque[int] = deque()
    while len(recorder.log) < budget:
        if not pending:
            roots = oracle.sample_nodes(1, rng, exclude=recorder.log.visited)
            if not roots:
                break
            pending.append(roots[0])
        v = pending.popleft() if breadth_first else pending.pop()
        if v in recorder.log.visited:
            continue
        recorder.observe(v, rng)
        fresh = [w for w in oracle.neighbors(v) if w not in recorder.log.visited]
        if breadth_first:
            pending.extend(fresh)           # ascending id, layer by layer
        else:
            pending.extend(reversed(fresh))  # pop() then visits smallest id first
    return recorder.result("bfs" if breadth_first else "dfs")


def bfs_search(oracle: GraphOracle, objective: Objective,
               config: SearcherConfig) -> RunResult:
    return _traversal(oracle, objective, config, breadth_first=True)


def dfs_search(oracle: GraphOracle, objective: Objective,
               config: SearcherConfig) -> RunResult:
    return _traversal(oracle, objective, config, breadth_first=False)


SEARCHERS = {
    "random": random_search,
    "local": local_search,
    "bfs": bfs_search,
    "dfs": dfs_search,
}
