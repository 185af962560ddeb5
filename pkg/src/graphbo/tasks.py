"""Objective functions over graph nodes for the benchmark task families.

Each task builds an :class:`Objective`: a deterministic per-node value table
plus an optional Gaussian observation noise, the optimisation direction, and
the true optimum (found by brute-force scan at construction) used for regret.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix

from .graphs import AdjacencyGraph


@dataclass
class Objective:
    """Black-box function on nodes with noisy observation semantics."""

    values: np.ndarray
    direction: str            # "min" or "max"
    noise: float = 0.0
    name: str = "objective"
    optimum: Optional[float] = field(default=None)
    n_evals: int = field(default=0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if self.optimum is None and self.values.size:
            self.optimum = float(self.values.min() if self.direction == "min"
                                 else self.values.max())

    @property
    def n(self) -> int:
        return int(self.values.size)

    def true_value(self, v: int) -> float:
        return float(self.values[v])

    def observe(self, v: int, rng: np.random.Generator) -> float:
        self.n_evals += 1
        y = float(self.values[v])
        if self.noise > 0:
            y += float(rng.normal(0.0, self.noise))
        return y


def oriented_gap(value: float, optimum: float, direction: str) -> float:
    """Regret of a single value: nonnegative, zero iff the optimum is attained."""
    gap = (value - optimum) if direction == "min" else (optimum - value)
    return max(0.0, float(gap))


def regret(incumbents: np.ndarray, optimum: float, direction: str) -> np.ndarray:
    """Regret trace of an incumbent-value trace."""
    inc = np.asarray(incumbents, dtype=float)
    gap = inc - optimum if direction == "min" else optimum - inc
    return np.maximum(gap, 0.0)


def _to_csr(graph: AdjacencyGraph) -> csr_matrix:
    indptr, indices = graph.flat_adjacency()
    data = np.ones(indices.shape[0], dtype=float)
    return csr_matrix((data, indices, indptr), shape=(graph.n, graph.n))


def betweenness(graph: AdjacencyGraph) -> np.ndarray:
    """Exact betweenness over unordered node pairs, endpoints excluded.

    Dependency accumulation over BFS shortest-path DAGs from every source;
    the standard accumulation counts ordered pairs, so halve at the end.
    """
    n = graph.n
    score = np.zeros(n)
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1.0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in graph.neighbors(v):
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return score / 2.0


def eigenvector_centrality(graph: AdjacencyGraph, tol: float = 1e-10,
                           max_iter: int = 100_000) -> np.ndarray:
    """Dominant adjacency eigenvector by power iteration.

    Iterates (A + I) x to stay convergent on bipartite graphs; the shift does
    not change the dominant eigenvector. Result is nonnegative and unit-norm.
    """
    n = graph.n
    A = _to_csr(graph)
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        x_new = x + A @ x
        norm = np.linalg.norm(x_new)
        if norm == 0:
            raise RuntimeError("power iteration collapsed to zero")
        x_new /= norm
        if np.linalg.norm(x_new - x) < tol:
            return np.abs(x_new)
        x = x_new
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


def betweenness_objective(graph: AdjacencyGraph, noise: float = 0.0) -> Objective:
    return Objective(values=betweenness(graph), direction="max", noise=noise,
                     name="betweenness-centrality")


def eigenvector_objective(graph: AdjacencyGraph, noise: float = 0.0) -> Objective:
    return Objective(values=eigenvector_centrality(graph), direction="max",
                     noise=noise, name="eigenvector-centrality")


def degree_objective(graph: AdjacencyGraph, noise: float = 0.0) -> Objective:
    values = np.asarray([graph.degree(v) for v in range(graph.n)], dtype=float)
    return Objective(values=values, direction="max", noise=noise, name="degree")


def ackley(x: float, y: float) -> float:
    return (-20.0 * math.exp(-0.2 * math.sqrt(0.5 * (x * x + y * y)))
            - math.exp(0.5 * (math.cos(2 * math.pi * x) + math.cos(2 * math.pi * y)))
            + 20.0 + math.e)


def rosenbrock(x: float, y: float) -> float:
    return 100.0 * (y - x * x) ** 2 + (x - 1.0) ** 2


def _grid_objective(side: int, box: tuple[float, float], fn, name: str,
                    noise: float) -> Objective:
    if side < 2:
        raise ValueError("grid side must be at least 2")
    lo, hi = box
    pts = np.linspace(lo, hi, side)
    values = np.empty(side * side)
    for r in range(side):
        for c in range(side):
            values[r * side + c] = fn(pts[r], pts[c])
    return Objective(values=values, direction="min", noise=noise, name=name)


def ackley_on_grid(side: int, box: tuple[float, float] = (-5.0, 5.0),
                   noise: float = 0.0) -> Objective:
    """Ackley evaluated on a side x side lattice mapped affinely onto box^2."""
    return _grid_objective(side, box, ackley, "ackley", noise)


def rosenbrock_on_grid(side: int, box: tuple[float, float] = (-2.0, 2.0),
                       noise: float = 0.0) -> Objective:
    return _grid_objective(side, box, rosenbrock, "rosenbrock", noise)


@dataclass(frozen=True)
class SIRParams:
    """Discrete-time epidemic parameters with spontaneous infection."""

    beta: float            # infection probability per infected neighbour
    gamma: float           # recovery probability
    epsilon: float = 0.0   # spontaneous infection probability
    horizon: int = 50
    initial_fraction: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name, p in (("beta", self.beta), ("gamma", self.gamma),
                        ("epsilon", self.epsilon)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not 0.0 < self.initial_fraction <= 1.0:
            raise ValueError("initial_fraction must lie in (0, 1]")


def sir_simulate(graph: AdjacencyGraph, params: SIRParams) -> np.ndarray:
    """First-infection time per node, or -1 if never infected.

    Synchronous update: a susceptible node with k infected neighbours turns
    infected with probability 1 - (1-eps)(1-beta)^k; infected nodes recover
    with probability gamma and stay recovered. Initial infected (time 0) are
    a uniform draw of max(1, round(fraction*n)) nodes.
    """
    n = graph.n
    rng = np.random.default_rng(params.seed)
    A = _to_csr(graph)
    n_init = max(1, round(params.initial_fraction * n))
    seeds = rng.choice(n, size=min(n_init, n), replace=False)
    infected = np.zeros(n, dtype=bool)
    recovered = np.zeros(n, dtype=bool)
    tau = np.full(n, -1, dtype=np.int64)
    infected[seeds] = True
    tau[seeds] = 0
    for t in range(1, params.horizon + 1):
        inf_nbrs = A @ infected.astype(float)
        susceptible = ~infected & ~recovered
        p_inf = 1.0 - (1.0 - params.epsilon) * (1.0 - params.beta) ** inf_nbrs
        new_inf = susceptible & (rng.random(n) < p_inf)
        new_rec = infected & (rng.random(n) < params.gamma)
        infected[new_rec] = False
        recovered[new_rec] = True
        infected[new_inf] = True
        tau[new_inf] = t
    return tau


def patient_zero_objective(tau: np.ndarray, horizon: int,
                           noise: float = 0.0) -> Objective:
    """Score (1 - tau/T)^2 for infected nodes, 0 for never-infected ones."""
    tau = np.asarray(tau)
    values = np.where(tau >= 0, (1.0 - tau / float(horizon)) ** 2, 0.0)
    return Objective(values=values, direction="max", noise=noise,
                     name="patient-zero")


@dataclass(frozen=True)
class TeamConfig:
    """Generator settings for the team-composition task."""

    pool_size: int = 100
    n_skills: int = 4
    alpha: float = 1.0
    n_teams: int = 300
    jaccard_threshold: Optional[float] = 0.3  # None -> population median
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n_skills < 2:
            raise ValueError("need at least two skills")
        if self.jaccard_threshold is not None and not 0.0 <= self.jaccard_threshold < 1.0:
            raise ValueError("threshold must lie in [0, 1)")
        if self.pool_size < 2 or self.n_teams < 2:
            raise ValueError("need at least two individuals and two teams")


def _entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    nz = p > 0
    return float(-(p[nz] * np.log(p[nz])).sum())


def team_objective(members: np.ndarray, skills: np.ndarray) -> float:
    """Entropy of the pooled skill mix minus the mean member entropy.

    Maximised by teams of complementary specialists; lies in [0, ln K].
    """
    sub = skills[np.asarray(members, dtype=np.int64)]
    return _entropy(sub.mean(axis=0)) - float(np.mean([_entropy(row) for row in sub]))


def jaccard(a: set, b: set) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def team_generate(config: TeamConfig) -> tuple[AdjacencyGraph, list[np.ndarray], np.ndarray]:
    """Sample skills and teams; teams are linked when their member overlap
    (Jaccard index) exceeds the threshold (or the population median).

    Skills follow a symmetric Dirichlet, sampled as normalized independent
    Gamma(alpha) variates. Team sizes are uniform in [2, 2*n_skills].
    """
    rng = np.random.default_rng(config.seed)
    g = rng.gamma(config.alpha, 1.0, size=(config.pool_size, config.n_skills))
    skills = g / g.sum(axis=1, keepdims=True)
    max_size = min(2 * config.n_skills, config.pool_size)
    teams = []
    for _ in range(config.n_teams):
        size = int(rng.integers(2, max_size + 1))
        teams.append(np.sort(rng.choice(config.pool_size, size=size, replace=False)))
    member_sets = [set(int(i) for i in t) for t in teams]
    weights = np.zeros((config.n_teams, config.n_teams))
    for i in range(config.n_teams):
        for j in range(i + 1, config.n_teams):
            weights[i, j] = jaccard(member_sets[i], member_sets[j])
    if config.jaccard_threshold is None:
        upper = weights[np.triu_indices(config.n_teams, k=1)]
        threshold = float(np.median(upper))
    else:
        threshold = config.jaccard_threshold
    edges = [(i, j) for i in range(config.n_teams) for j in range(i + 1, config.n_teams)
             if weights[i, j] > threshold]
    if not edges:
        raise ValueError(
            f"no team pair exceeds Jaccard threshold {threshold}; lower the threshold")
    graph = AdjacencyGraph.from_edges(config.n_teams, edges)
    return graph, teams, skills


def team_task(config: TeamConfig, noise: float = 0.0) -> tuple[AdjacencyGraph, Objective]:
    graph, teams, skills = team_generate(config)
    values = np.asarray([team_objective(t, skills) for t in teams])
    return graph, Objective(values=values, direction="max", noise=noise, name="team")
