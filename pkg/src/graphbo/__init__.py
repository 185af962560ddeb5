"""Bayesian optimisation over functions defined on graph nodes.

Spectral kernels on local subgraph Laplacians, a GP surrogate fitted by
log-marginal-likelihood ascent, expected-improvement acquisition by
enumeration, and an adaptive trust-region controller, plus baselines,
benchmark tasks and an experiment harness.
"""

from .acquisition import AcquisitionResult, expected_improvement, select_next
from .baselines import (
    SearcherConfig,
    bfs_search,
    dfs_search,
    local_search,
    random_search,
)
from .engine import BOConfig, RunResult, TrustRegionState, restart_init, run, tr_update
from .gp import FitConfig, FitError, GPModel, TrainSet, fit, log_marginal_likelihood
from .graphs import (
    AdjacencyGraph,
    EgoNet,
    GraphOracle,
    diameter,
    ego_subgraph,
    gen_ba,
    gen_grid2d,
    gen_ws,
    load_edge_list,
)
from .harness import (
    ExperimentConfig,
    KernelValidationResult,
    ResultTable,
    aggregate_ranks,
    kernel_validation,
    run_experiment,
    spearman_rho,
)
from .kernels import (
    KernelSpec,
    ScaledLaplacian,
    default_eta,
    kernel_grad,
    kernel_matrix,
    reg_fn,
    scaled_laplacian,
)
from .tasks import (
    Objective,
    SIRParams,
    TeamConfig,
    ackley_on_grid,
    betweenness,
    degree_objective,
    eigenvector_centrality,
    patient_zero_objective,
    regret,
    rosenbrock_on_grid,
    sir_simulate,
    team_generate,
    team_objective,
)

__version__ = "0.1.0"
