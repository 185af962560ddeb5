"""Graph storage, random generators, edge-list loading and local subgraph extraction.

All graphs are undirected, unweighted and simple (no self-loops, no parallel
edges). Nodes are integers 0..n-1. Topology is consumed either directly
(:class:`AdjacencyGraph`) or through a :class:`GraphOracle` that reveals
neighbourhoods one query at a time, so that search algorithms never need the
full graph up front.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np


class AdjacencyGraph:
    """Undirected graph over nodes 0..n-1 stored as sorted neighbour lists."""

    __slots__ = ("n", "_adj")

    def __init__(self, n: int, adj: Sequence[Sequence[int]]):
        if n < 0:
            raise ValueError("node count must be nonnegative")
        if len(adj) != n:
            raise ValueError(f"adjacency has {len(adj)} rows for {n} nodes")
        self.n = n
        self._adj = [sorted(set(nbrs)) for nbrs in adj]
        for v, nbrs in enumerate(self._adj):
            for w in nbrs:
                if w == v:
                    raise ValueError(f"self-loop at node {v}")
                if not 0 <= w < n:
                    raise ValueError(f"neighbour {w} of node {v} out of range")
                if v not in self._adj[w]:
                    raise ValueError(f"asymmetric edge {v}-{w}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "AdjacencyGraph":
        adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                continue
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        return cls(n, adj)

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for v, nbrs in enumerate(self._adj):
            for w in nbrs:
                if v < w:
                    yield (v, w)

    def flat_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style (indptr, indices) arrays for vectorised neighbour sums."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            indptr[v + 1] = indptr[v] + len(self._adj[v])
        if indptr[-1] == 0:
            return indptr, np.zeros(0, dtype=np.int64)
        indices = np.concatenate([np.asarray(a, dtype=np.int64) for a in self._adj if a])
        return indptr, indices

    def __repr__(self) -> str:
        return f"AdjacencyGraph(n={self.n}, m={self.num_edges})"


class GraphOracle:
    """Incremental topology access over a fixed node universe.

    The universe size ``n`` and uniform node sampling are always available;
    edges are revealed only through :meth:`neighbors`. The revealed-node set
    and the query counter are monotone, which lets callers measure how much
    topology a search actually touched. Graphs themselves are immutable and
    shareable; each search run should own its oracle exclusively.
    """

    def __init__(self, graph: AdjacencyGraph):
        self._graph = graph
        self.revealed: set[int] = set()
        self.query_count = 0

    @property
    def n(self) -> int:
        return self._graph.n

    def neighbors(self, v: int) -> list[int]:
        if not 0 <= v < self._graph.n:
            raise ValueError(f"node {v} outside universe of size {self._graph.n}")
        self.revealed.add(v)
        self.query_count += 1
        return self._graph.neighbors(v)

    def sample_nodes(self, k: int, rng: np.random.Generator,
                     exclude: Optional[set[int]] = None) -> list[int]:
        """Uniform sample without replacement from the universe minus ``exclude``."""
        if exclude:
            pool = np.setdiff1d(np.arange(self.n, dtype=np.int64),
                                np.fromiter(exclude, dtype=np.int64, count=len(exclude)))
        else:
            pool = np.arange(self.n, dtype=np.int64)
        k = min(k, pool.size)
        if k == 0:
            return []
        picked = rng.choice(pool.size, size=k, replace=False)
        return [int(pool[i]) for i in picked]


@dataclass
class EgoNet:
    """Induced local subgraph around a centre node.

    ``nodes[i]`` is the global id of local node ``i``; the centre is always
    local index 0. ``hop[i]`` is the BFS distance from the centre.
    """

    center: int
    nodes: list[int]
    graph: AdjacencyGraph
    hop: np.ndarray
    _g2l: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._g2l = {g: i for i, g in enumerate(self.nodes)}

    @property
    def size(self) -> int:
        return len(self.nodes)

    def local_index(self, global_id: int) -> int:
        return self._g2l[global_id]

    def contains(self, global_id: int) -> bool:
        return global_id in self._g2l


def ego_subgraph(oracle: GraphOracle, center: int, Q: int,
                 rng: np.random.Generator) -> EgoNet:
    """Grow an ego-network of at most ``Q`` nodes around ``center``.

    Complete hop layers are added while they fit; the first layer that would
    overflow is sampled uniformly without replacement to land on exactly ``Q``
    nodes. If the reachable component is smaller than ``Q`` the whole
    component is returned. Topology is read through ``oracle`` only, and each
    selected node is queried exactly once.
    """
    if Q < 1:
        raise ValueError("subgraph size must be at least 1")
    nbr_cache: dict[int, list[int]] = {}

    def nbrs(v: int) -> list[int]:
        if v not in nbr_cache:
            nbr_cache[v] = oracle.neighbors(v)
        return nbr_cache[v]

    selected = [center]
    hops = [0]
    in_sel = {center}
    frontier = [center]
    h = 1
    while len(selected) < Q and frontier:
        layer_set: set[int] = set()
        for u in frontier:
            for w in nbrs(u):
                if w not in in_sel:
                    layer_set.add(w)
        layer = sorted(layer_set)
        if not layer:
            break
        if len(selected) + len(layer) <= Q:
            selected.extend(layer)
            hops.extend([h] * len(layer))
            in_sel.update(layer)
            frontier = layer
            h += 1
        else:
            k = Q - len(selected)
            picked_idx = rng.choice(len(layer), size=k, replace=False)
            picked = sorted(layer[int(i)] for i in picked_idx)
            selected.extend(picked)
            hops.extend([h] * k)
            in_sel.update(picked)
            break

    g2l = {g: i for i, g in enumerate(selected)}
    local_adj: list[list[int]] = []
    for g in selected:
        local_adj.append(sorted(g2l[w] for w in nbrs(g) if w in g2l))
    return EgoNet(center=center, nodes=selected,
                  graph=AdjacencyGraph(len(selected), local_adj),
                  hop=np.asarray(hops, dtype=np.int64))


def bfs_distances(graph: AdjacencyGraph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get -1."""
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in graph.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def diameter(graph: AdjacencyGraph) -> int:
    """Exact diameter via all-source BFS. Raises on disconnected input."""
    if graph.n == 0:
        raise ValueError("empty graph has no diameter")
    best = 0
    for v in range(graph.n):
        dist = bfs_distances(graph, v)
        if (dist < 0).any():
            raise ValueError("graph is disconnected")
        best = max(best, int(dist.max()))
    return best


def load_edge_list(lines: Iterable[str]) -> AdjacencyGraph:
    """Parse an edge-list text stream into a graph.

    One edge per line as two whitespace-separated integer ids; lines starting
    with ``#`` and blank lines are ignored. Duplicate and reversed-duplicate
    lines collapse to one edge, self-loops are dropped, and raw ids are
    compacted to 0..n-1 in order of first appearance.
    """
    id_map: dict[int, int] = {}
    edges: list[tuple[int, int]] = []

    def compact(raw: int) -> int:
        if raw not in id_map:
            id_map[raw] = len(id_map)
        return id_map[raw]

    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected two ids, got {len(tokens)} tokens")
        try:
            u_raw, v_raw = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {text!r}") from None
        u, v = compact(u_raw), compact(v_raw)
        if u != v:
            edges.append((u, v))
    return AdjacencyGraph.from_edges(len(id_map), edges)


def gen_ba(n: int, m: int, seed: int) -> AdjacencyGraph:
    """Preferential-attachment random graph.

    Starts from a connected clique on the first ``m`` nodes; every later node
    attaches ``m`` distinct edges, picking targets with probability
    proportional to current degree (sampling endpoints of existing edges).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if n <= m:
        raise ValueError(f"need n > m, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    for i in range(m):
        for j in range(i + 1, m):
            edges.append((i, j))
            repeated.extend((i, j))
    for v in range(m, n):
        if repeated:
            targets: set[int] = set()
            while len(targets) < m:
                targets.add(repeated[int(rng.integers(len(repeated)))])
        else:
            # no edges yet (m == 1 seed): attach uniformly among existing nodes
            targets = {int(t) for t in rng.choice(v, size=m, replace=False)}
        for t in sorted(targets):
            edges.append((t, v))
            repeated.extend((t, v))
    return AdjacencyGraph.from_edges(n, edges)


def gen_ws(n: int, K: int, beta: float, seed: int) -> AdjacencyGraph:
    """Small-world ring-rewiring random graph.

    Builds a ring lattice where each node links to its K/2 nearest neighbours
    on each side, then rewires each rightward edge with probability ``beta``
    to a uniform random endpoint, avoiding self-loops and duplicate links.
    The edge count n*K/2 is preserved.
    """
    if K % 2 != 0:
        raise ValueError("K must be even")
    if K >= n:
        raise ValueError(f"need K < n, got K={K}, n={n}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    half = K // 2
    for i in range(n):
        for j in range(1, half + 1):
            v = (i + j) % n
            adj[i].add(v)
            adj[v].add(i)
    for i in range(n):
        for j in range(1, half + 1):
            v = (i + j) % n
            if rng.random() >= beta:
                continue
            if len(adj[i]) >= n - 1:
                continue  # saturated: no valid rewiring target
            w = int(rng.integers(n))
            while w == i or w in adj[i]:
                w = int(rng.integers(n))
            adj[i].discard(v)
            adj[v].discard(i)
            adj[i].add(w)
            adj[w].add(i)
    return AdjacencyGraph(n, [sorted(s) for s in adj])


def gen_grid2d(side: int) -> tuple[AdjacencyGraph, list[tuple[int, int]]]:
    """4-neighbour square lattice with node id r*side + c.

    Returns the graph and the node -> (row, col) coordinate map.
    """
    if side < 1:
        raise ValueError("side must be at least 1")
    edges = []
    coords = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            coords.append((r, c))
            if c + 1 < side:
                edges.append((v, v + 1))
            if r + 1 < side:
                edges.append((v, v + side))
    return AdjacencyGraph.from_edges(side * side, edges), coords
