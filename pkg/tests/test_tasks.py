import math

import numpy as np
import pytest

from graphbo.graphs import AdjacencyGraph, bfs_distances, gen_ba
from graphbo.tasks import (
    Objective,
    SIRParams,
    TeamConfig,
    ackley,
    ackley_on_grid,
    betweenness,
    degree_objective,
    eigenvector_centrality,
    jaccard,
    oriented_gap,
    patient_zero_objective,
    regret,
    rosenbrock,
    rosenbrock_on_grid,
    sir_simulate,
    team_generate,
    team_objective,
    team_task,
)


def path_graph(n):
    return AdjacencyGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return AdjacencyGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n):
    return AdjacencyGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_graph(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35]
    return AdjacencyGraph.from_edges(n, edges)


from oracles import brute_force_betweenness


class TestBetweenness:
    def test_path_middle(self):
        np.testing.assert_allclose(betweenness(path_graph(3)), [0.0, 1.0, 0.0])

    def test_star_center(self):
        L = 7
        b = betweenness(star_graph(L))
        assert b[0] == pytest.approx(L * (L - 1) / 2)
        np.testing.assert_allclose(b[1:], 0.0)
        np.testing.assert_allclose(b, brute_force_betweenness(star_graph(L)), atol=1e-9)

    def test_complete_graph_zero(self):
        np.testing.assert_allclose(betweenness(complete_graph(5)), 0.0)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_path_enumeration(self, seed):
        g = random_graph(4 + seed % 9, seed)
        np.testing.assert_allclose(betweenness(g), brute_force_betweenness(g), atol=1e-9)


class TestEigenvectorCentrality:
    def test_complete_graph_uniform(self):
        c = eigenvector_centrality(complete_graph(6))
        np.testing.assert_allclose(c, c[0], atol=1e-9)

    def test_cycle_uniform(self):
        g = AdjacencyGraph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)])
        c = eigenvector_centrality(g)
        np.testing.assert_allclose(c, c[0], atol=1e-9)

    def test_star_ratio(self):
        L = 9
        c = eigenvector_centrality(star_graph(L))
        assert c[0] / c[1] == pytest.approx(math.sqrt(L), abs=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dense_eigensolve(self, seed):
        g = gen_ba(40, 2, seed=seed)
        c = eigenvector_centrality(g)
        A = np.zeros((40, 40))
        for u, w in g.edges():
            A[u, w] = A[w, u] = 1.0
        evals, evecs = np.linalg.eigh(A)
        dom = np.abs(evecs[:, -1])
        np.testing.assert_allclose(c, dom / np.linalg.norm(dom), atol=1e-6)


class TestSimpleObjectives:
    def test_degree_star(self):
        obj = degree_objective(star_graph(10))
        assert obj.true_value(0) == 10.0 and obj.direction == "max"

    def test_degree_ring(self):
        from graphbo.graphs import gen_ws
        obj = degree_objective(gen_ws(12, 4, 0.0, seed=0))
        np.testing.assert_allclose(obj.values, 4.0)

    def test_optimum_matches_brute_force_scan(self):
        rng = np.random.default_rng(0)
        values = rng.standard_normal(50)
        assert Objective(values=values, direction="min").optimum == values.min()
        assert Objective(values=values, direction="max").optimum == values.max()

    def test_observation_counter(self):
        obj = Objective(values=np.arange(5.0), direction="min")
        rng = np.random.default_rng(0)
        obj.observe(1, rng)
        obj.observe(2, rng)
        assert obj.n_evals == 2


class TestGridFunctions:
    def test_ackley_origin(self):
        assert ackley(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_rosenbrock_values(self):
        assert rosenbrock(1.0, 1.0) == 0.0
        assert rosenbrock(0.0, 0.0) == 1.0

    def test_ackley_grid_contains_origin(self):
        obj = ackley_on_grid(11)  # odd side puts (0, 0) on the lattice
        assert obj.optimum == pytest.approx(0.0, abs=1e-12)
        assert obj.direction == "min"

    def test_rosenbrock_grid_contains_minimum(self):
        obj = rosenbrock_on_grid(5)  # lattice -2..2 includes (1, 1)
        assert obj.optimum == 0.0

    def test_grid_mapping(self):
        obj = rosenbrock_on_grid(5, box=(-2.0, 2.0))
        # node (3, 3) maps to (1, 1)
        assert obj.true_value(3 * 5 + 3) == 0.0

    def test_observation_noise_variance(self):
        obj = ackley_on_grid(5, noise=1.0)
        rng = np.random.default_rng(1)
        samples = np.array([obj.observe(7, rng) for _ in range(10_000)])
        assert abs(samples.var() - 1.0) < 0.05
        assert samples.mean() == pytest.approx(obj.true_value(7), abs=0.05)

    def test_rejects_tiny_side(self):
        with pytest.raises(ValueError):
            ackley_on_grid(1)


class TestSIR:
    def test_deterministic_wavefront(self):
        g = path_graph(12)
        params = SIRParams(beta=1.0, gamma=0.0, epsilon=0.0, horizon=15,
                           initial_fraction=1e-9, seed=3)  # single random seed node
        tau = sir_simulate(g, params)
        src = int(np.flatnonzero(tau == 0)[0])
        expected = bfs_distances(g, src)
        np.testing.assert_array_equal(tau, expected)

    def test_no_spread_without_contagion(self):
        g = path_graph(10)
        tau = sir_simulate(g, SIRParams(beta=0.0, gamma=0.5, epsilon=0.0,
                                        horizon=20, initial_fraction=0.2, seed=1))
        assert (tau >= 0).sum() == 2  # only the initial infected

    def test_single_step_marginal(self):
        # star with a leaf source: the center is infected at t=1 w.p. beta
        g = star_graph(10)
        beta = 0.2
        center_hits = 0
        leaf_trials = 0
        for seed in range(10_000):
            tau = sir_simulate(g, SIRParams(beta=beta, gamma=0.0, epsilon=0.0,
                                            horizon=1, initial_fraction=1e-9,
                                            seed=seed))
            src = int(np.flatnonzero(tau == 0)[0])
            if src == 0:
                continue
            leaf_trials += 1
            center_hits += tau[0] == 1
        p_hat = center_hits / leaf_trials
        se = math.sqrt(beta * (1 - beta) / leaf_trials)
        assert abs(p_hat - beta) < max(0.01, 3 * se)

    def test_recovered_stay_recovered(self):
        g = complete_graph(6)
        tau = sir_simulate(g, SIRParams(beta=1.0, gamma=1.0, epsilon=0.0,
                                        horizon=10, initial_fraction=0.2, seed=5))
        # infection dies after one step: recovery is immediate and permanent
        assert tau.max() <= 1

    def test_deterministic_per_seed(self):
        g = gen_ba(60, 2, seed=0)
        p = SIRParams(beta=0.3, gamma=0.1, epsilon=0.01, horizon=25,
                      initial_fraction=0.05, seed=9)
        np.testing.assert_array_equal(sir_simulate(g, p), sir_simulate(g, p))

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            SIRParams(beta=1.2, gamma=0.1)


class TestPatientZero:
    def test_susceptible_scores_zero(self):
        obj = patient_zero_objective(np.array([-1, 0, 5]), horizon=10)
        assert obj.true_value(0) == 0.0

    def test_initial_seed_scores_one(self):
        obj = patient_zero_objective(np.array([0]), horizon=10)
        assert obj.true_value(0) == 1.0

    def test_midpoint(self):
        obj = patient_zero_objective(np.array([5]), horizon=10)
        assert obj.true_value(0) == pytest.approx(0.25)
        assert obj.direction == "max"

    def test_range(self):
        tau = np.array([-1, 0, 3, 7, 10])
        obj = patient_zero_objective(tau, horizon=10)
        assert (obj.values >= 0).all() and (obj.values <= 1).all()


class TestTeam:
    def test_jaccard_cases(self):
        assert jaccard({1, 2, 3}, {1, 2, 3}) == 1.0
        assert jaccard({1, 2}, {3, 4}) == 0.0
        assert jaccard({1, 2, 3}, {2, 3, 4}) == pytest.approx(0.5)

    def test_identical_uniform_members_zero(self):
        skills = np.full((3, 4), 0.25)
        assert team_objective(np.array([0, 1, 2]), skills) == pytest.approx(0.0, abs=1e-12)

    def test_one_hot_specialists(self):
        K = 5
        skills = np.eye(K)
        assert team_objective(np.arange(K), skills) == pytest.approx(math.log(K))

    def test_hand_case(self):
        skills = np.array([[0.5, 0.5], [1.0, 0.0]])
        got = team_objective(np.array([0, 1]), skills)
        # direct arithmetic oracle
        h_mix = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
        expected = h_mix - 0.5 * math.log(2)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.21576155433883567, abs=1e-9)
        assert round(got, 4) == 0.2158

    def test_objective_bounded(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            K = int(rng.integers(2, 6))
            g = rng.gamma(1.0, 1.0, size=(8, K))
            skills = g / g.sum(axis=1, keepdims=True)
            members = rng.choice(8, size=int(rng.integers(2, 6)), replace=False)
            val = team_objective(members, skills)
            assert -1e-12 <= val <= math.log(K) + 1e-12

    def test_generation_deterministic(self):
        cfg = TeamConfig(pool_size=40, n_skills=3, alpha=1.0, n_teams=60, seed=4)
        g1, t1, s1 = team_generate(cfg)
        g2, t2, s2 = team_generate(cfg)
        assert list(g1.edges()) == list(g2.edges())
        np.testing.assert_array_equal(s1, s2)

    def test_median_threshold_mode(self):
        cfg = TeamConfig(pool_size=40, n_skills=3, n_teams=50,
                         jaccard_threshold=None, seed=2)
        g, _, _ = team_generate(cfg)
        assert g.num_edges > 0

    def test_impossible_threshold_raises(self):
        cfg = TeamConfig(pool_size=200, n_skills=2, n_teams=10,
                         jaccard_threshold=0.999, seed=0)
        with pytest.raises(ValueError, match="threshold"):
            team_generate(cfg)

    def test_task_objective_range(self):
        g, obj = team_task(TeamConfig(pool_size=50, n_skills=4, n_teams=80, seed=1))
        assert obj.direction == "max"
        assert (obj.values >= -1e-12).all()
        assert (obj.values <= math.log(4) + 1e-12).all()


class TestRegret:
    def test_at_optimum(self):
        assert oriented_gap(5.0, 5.0, "min") == 0.0

    def test_min_task(self):
        assert oriented_gap(3.0, 0.0, "min") == 3.0

    def test_max_task(self):
        assert oriented_gap(7.0, 10.0, "max") == 3.0

    def test_trace(self):
        tr = regret(np.array([5.0, 3.0, 0.0]), 0.0, "min")
        np.testing.assert_allclose(tr, [5.0, 3.0, 0.0])
        tr = regret(np.array([4.0, 9.0, 10.0]), 10.0, "max")
        np.testing.assert_allclose(tr, [6.0, 1.0, 0.0])
