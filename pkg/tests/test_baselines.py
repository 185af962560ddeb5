import numpy as np
import pytest

from graphbo.baselines import (
    SearcherConfig,
    bfs_search,
    dfs_search,
    local_search,
    random_search,
)
from graphbo.graphs import AdjacencyGraph, GraphOracle, bfs_distances, gen_ba, gen_grid2d
from graphbo.tasks import Objective


def path_graph(n):
    return AdjacencyGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return AdjacencyGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def id_objective(n, direction="min"):
    return Objective(values=np.arange(float(n)), direction=direction)


class TestRandomSearch:
    def test_exhaustive_budget_finds_optimum(self):
        g = gen_ba(40, 1, seed=0)
        res = random_search(GraphOracle(g), id_objective(40),
                            SearcherConfig("random", budget=40, seed=1))
        assert res.regret[-1] == 0.0
        assert res.evaluations == 40 and len(set(res.nodes)) == 40

    def test_deterministic(self):
        g = gen_ba(30, 1, seed=0)
        runs = [random_search(GraphOracle(g), id_objective(30),
                              SearcherConfig("random", 10, seed=5)) for _ in range(2)]
        assert list(runs[0].nodes) == list(runs[1].nodes)

    def test_expected_first_draw_regret(self):
        # f = node id, minimised: E[regret of one uniform draw] = (n-1)/2
        n = 20
        g = gen_ba(n, 1, seed=0)
        total = 0.0
        trials = 4000
        for s in range(trials):
            res = random_search(GraphOracle(g), id_objective(n),
                                SearcherConfig("random", 1, seed=s))
            total += res.regret[0]
        mean = total / trials
        expected = (n - 1) / 2.0
        se = np.sqrt((n ** 2 - 1) / 12.0 / trials)
        assert abs(mean - expected) < 4 * se

    def test_no_neighbor_queries(self):
        g = gen_ba(30, 2, seed=0)
        oracle = GraphOracle(g)
        random_search(oracle, id_objective(30), SearcherConfig("random", 10, seed=0))
        assert oracle.query_count == 0


class TestLocalSearch:
    def test_walks_monotone_path(self):
        n = 15
        g = path_graph(n)
        # strictly decreasing along the path; force start at node 0 via seed scan
        obj = Objective(values=np.arange(float(n)), direction="max")
        res = local_search(GraphOracle(g), obj, SearcherConfig("local", n, seed=2))
        start = res.nodes[0]
        assert res.regret[-1] == 0.0
        assert res.evaluations <= n

    def test_restart_after_local_optimum(self):
        # two components: optimum sits in the one the walk must restart into
        g = AdjacencyGraph.from_edges(4, [(0, 1), (2, 3)])
        obj = Objective(values=np.array([1.0, 2.0, 3.0, 4.0]), direction="max")
        res = local_search(GraphOracle(g), obj, SearcherConfig("local", 4, seed=0))
        assert res.evaluations == 4
        assert res.regret[-1] == 0.0

    def test_grid_distance_quick_descent(self):
        g, _ = gen_grid2d(10)
        target = 57
        values = bfs_distances(g, target).astype(float)
        hits = 0
        for seed in range(10):
            obj = Objective(values=values, direction="min")
            res = local_search(GraphOracle(g), obj,
                               SearcherConfig("local", 2 * 18, seed=seed))
            hits += res.regret[-1] == 0.0
        assert hits >= 9

    def test_never_queries_twice(self):
        g = gen_ba(50, 2, seed=1)
        res = local_search(GraphOracle(g), id_objective(50),
                           SearcherConfig("local", 50, seed=3))
        assert len(set(res.nodes)) == res.evaluations == 50


class TestTraversals:
    def test_full_budget_visits_everything_once(self):
        g = gen_ba(35, 2, seed=2)
        for search in (bfs_search, dfs_search):
            res = search(GraphOracle(g), id_objective(35),
                         SearcherConfig("bfs", 35, seed=4))
            assert sorted(res.nodes) == list(range(35))

    def test_bfs_star_layer_order(self):
        g = star_graph(8)
        # find a seed whose random root is the center
        for seed in range(50):
            oracle = GraphOracle(g)
            res = bfs_search(oracle, id_objective(9),
                             SearcherConfig("bfs", 9, seed=seed))
            if res.nodes[0] == 0:
                assert list(res.nodes) == list(range(9))
                return
        pytest.fail("no seed rooted the BFS at the star center")

    def test_dfs_path_order(self):
        g = path_graph(8)
        for seed in range(50):
            res = dfs_search(GraphOracle(g), id_objective(8),
                             SearcherConfig("dfs", 8, seed=seed))
            if res.nodes[0] == 0:
                assert list(res.nodes) == list(range(8))
                return
        pytest.fail("no seed rooted the DFS at the path end")

    def test_components_reached_by_fresh_roots(self):
        g = AdjacencyGraph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
        res = bfs_search(GraphOracle(g), id_objective(6),
                         SearcherConfig("bfs", 6, seed=0))
        assert sorted(res.nodes) == list(range(6))

    def test_deterministic(self):
        g = gen_ba(40, 2, seed=5)
        for search in (bfs_search, dfs_search):
            a = search(GraphOracle(g), id_objective(40), SearcherConfig("dfs", 20, seed=9))
            b = search(GraphOracle(g), id_objective(40), SearcherConfig("dfs", 20, seed=9))
            assert list(a.nodes) == list(b.nodes)


class TestConfig:
    def test_unknown_method(self):
        with pytest.raises(ValueError):
            SearcherConfig("annealing", 10).validate()

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            SearcherConfig("random", 0).validate()

    def test_same_budget_contract(self):
        g = gen_ba(60, 2, seed=6)
        for search in (random_search, local_search, bfs_search, dfs_search):
            res = search(GraphOracle(g), id_objective(60),
                         SearcherConfig("random", 25, seed=7))
            assert res.evaluations == 25
            assert len(set(res.nodes)) == 25
