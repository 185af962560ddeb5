"""Gaussian-process regression over the nodes of an ego-network.

Targets are standardized before fitting, hyperparameters (spectral betas, an
optional output scale and the noise variance) are learned by maximising the
log-marginal likelihood with analytic gradients, and predictions are returned
in raw target units. Positivity of every learned hyperparameter is enforced by
optimising an unconstrained raw value mapped through exp().
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from threadpoolctl import threadpool_limits

from .graphs import EgoNet
from .kernels import (
    MATERN_NU_CHOICES,
    KernelSpec,
    ScaledLaplacian,
    ard_weight_grad_diag,
    beta_weight_grads,
    default_eta,
    scaled_laplacian,
    spectral_weights,
)

_LOG_2PI = np.log(2.0 * np.pi)
_RAW_BOUND = 30.0  # exp() stays finite and well scaled
_STD_FLOOR = 1e-8


class FitError(RuntimeError):
    """Raised when no positive-definite Gram matrix can be factorized."""


@dataclass(frozen=True)
class Standardizer:
    mean: float
    std: float

    def apply(self, y: np.ndarray) -> np.ndarray:
        return (y - self.mean) / self.std

    def invert_mean(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean

    def invert_var(self, var_z: np.ndarray) -> np.ndarray:
        return var_z * self.std ** 2


@dataclass
class TrainSet:
    """Observed nodes (local ego-net indices) with raw and standardized targets."""

    indices: np.ndarray
    y: np.ndarray
    z: np.ndarray = field(init=False)
    scaler: Standardizer = field(init=False)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.y = np.asarray(self.y, dtype=float)
        if self.indices.size == 0:
            raise ValueError("training set must be nonempty")
        if self.indices.size != np.unique(self.indices).size:
            raise ValueError("duplicate training indices")
        if self.y.shape != self.indices.shape:
            raise ValueError("targets and indices differ in length")
        std = float(self.y.std())
        self.scaler = Standardizer(mean=float(self.y.mean()), std=max(std, _STD_FLOOR))
        self.z = self.scaler.apply(self.y)

    def __len__(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameter-learning knobs.

    ``noise_variance`` fixes the noise level (standardized units) when given,
    otherwise noise is learned above ``noise_floor``. ``eta`` overrides the
    min(5, diameter) kernel-order rule for the polynomial pair.
    """

    n_restarts: int = 3
    max_iter: int = 200
    tol: float = 1e-5
    noise_floor: float = 1e-6
    noise_variance: Optional[float] = None
    learn_output_scale: bool = True
    fixed_output_scale: float = 1.0
    epsilon: float = 1e-8
    nu: float = 2.5
    eta: Optional[int] = None
    max_jitter: float = 1e-2


def _factorize(K: np.ndarray, noise: float, max_jitter: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + (noise + jitter) I, escalating jitter x10 on failure."""
    n = K.shape[0]
    jitter = 0.0
    while True:
        try:
            L = cholesky(K + (noise + jitter) * np.eye(n), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            pass
        jitter = 1e-6 if jitter == 0.0 else jitter * 10.0
        if jitter > max_jitter:
            raise FitError(f"Gram matrix not positive definite at jitter {max_jitter}")


def _lml_core(lap: ScaledLaplacian, idx: np.ndarray, z: np.ndarray,
              spec: KernelSpec, noise: float,
              max_jitter: float = 0.0) -> tuple[float, dict]:
    """LML of standardized targets plus gradients w.r.t. the natural params.

    Gradients follow 0.5 * tr((aa^T - Khat^{-1}) dK/dtheta), evaluated in the
    eigenbasis so each beta costs one quadratic form.
    """
    V = lap.eigenvectors[idx, :]
    lam = lap.eigenvalues
    w = spectral_weights(lam, spec)
    K = (V * w) @ V.T
    K = 0.5 * (K + K.T)
    N = idx.size
    L, _ = _factorize(K, noise, max_jitter)
    alpha = cho_solve((L, True), z)
    value = float(-0.5 * z @ alpha - np.log(np.diag(L)).sum() - 0.5 * N * _LOG_2PI)

    Kinv = cho_solve((L, True), np.eye(N))
    M = np.outer(alpha, alpha) - Kinv
    # v_i^T M v_i for every eigencolumn v_i = V[:, i]
    diag_quad = ((M @ V) * V).sum(axis=0)

    grads: dict = {}
    if spec.family == "diffusion_ard":
        grads["beta"] = 0.5 * ard_weight_grad_diag(lam, spec) * diag_quad
    else:
        dW = beta_weight_grads(lam, spec)
        grads["beta"] = 0.5 * dW @ diag_quad
    grads["output_scale"] = float(0.5 * (w / spec.output_scale) @ diag_quad)
    grads["noise"] = float(0.5 * np.trace(M))
    return value, grads


def log_marginal_likelihood(egonet: EgoNet, trainset: TrainSet, spec: KernelSpec,
                            noise: float) -> tuple[float, dict]:
    """Gaussian LML of the standardized targets under K_train + noise * I."""
    lap = scaled_laplacian(egonet.graph)
    return _lml_core(lap, trainset.indices, trainset.z, spec, noise)


@dataclass
class GPModel:
    """Fitted surrogate: kernel spec, noise, Gram factorization and weights."""

    egonet: EgoNet
    lap: ScaledLaplacian
    spec: KernelSpec
    noise: float
    trainset: TrainSet
    chol: np.ndarray
    alpha: np.ndarray
    lml: float
    fit_info: dict = field(default_factory=dict)

    def predict(self, query_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance (raw units) at local node indices."""
        q = np.asarray(query_idx, dtype=np.int64)
        if q.size and (q.min() < 0 or q.max() >= self.lap.n):
            raise ValueError("query index outside the ego-net")
        w = spectral_weights(self.lap.eigenvalues, self.spec)
        U = self.lap.eigenvectors
        Kq = (U[q] * w) @ U[self.trainset.indices].T
        mu_z = Kq @ self.alpha
        v = solve_triangular(self.chol, Kq.T, lower=True)
        kqq = (U[q] ** 2 * w).sum(axis=1)
        var_z = np.maximum(kqq - (v ** 2).sum(axis=0), 0.0)
        scaler = self.trainset.scaler
        return scaler.invert_mean(mu_z), scaler.invert_var(var_z)


def _beta_count(family: str, lap_n: int, eta: int) -> int:
    if family == "diffusion_ard":
        return lap_n
    if family in ("polynomial", "sum_inverse_polynomial"):
        return eta
    return 1


def _unpack(raw: np.ndarray, family: str, n_beta: int, config: FitConfig,
            eta: int) -> tuple[KernelSpec, float]:
    beta = np.exp(raw[:n_beta])
    pos = n_beta
    if config.learn_output_scale:
        scale = float(np.exp(raw[pos]))
        pos += 1
    else:
        scale = config.fixed_output_scale
    if config.noise_variance is None:
        noise = config.noise_floor + float(np.exp(raw[pos]))
    else:
        noise = float(config.noise_variance)
    spec = KernelSpec(family=family, beta=beta, eta=eta, nu=config.nu,
                      epsilon=config.epsilon, output_scale=scale)
    return spec, noise


def fit(egonet: EgoNet, trainset: TrainSet, family: str,
        config: FitConfig = FitConfig(),
        rng: Optional[np.random.Generator] = None) -> GPModel:
    """Maximise the LML from several random initializations and keep the best.

    Raw parameters live in log space, so gradient chain rule multiplies each
    natural-space gradient by the parameter value itself.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if (trainset.indices < 0).any() or (trainset.indices >= egonet.size).any():
        raise ValueError("training indices outside the ego-net")
    if family == "matern" and config.nu not in MATERN_NU_CHOICES:
        raise ValueError(f"fit supports nu in {MATERN_NU_CHOICES}, got {config.nu}")
    lap = scaled_laplacian(egonet.graph)
    eta = config.eta if config.eta is not None else default_eta(egonet)
    n_beta = _beta_count(family, lap.n, eta)
    dim = n_beta + (1 if config.learn_output_scale else 0) \
        + (1 if config.noise_variance is None else 0)
    idx, z = trainset.indices, trainset.z

    def objective(raw: np.ndarray) -> tuple[float, np.ndarray]:
        spec, noise = _unpack(raw, family, n_beta, config, eta)
        value, grads = _lml_core(lap, idx, z, spec, noise, config.max_jitter)
        g = np.empty_like(raw)
        g[:n_beta] = grads["beta"] * spec.beta
        pos = n_beta
        if config.learn_output_scale:
            g[pos] = grads["output_scale"] * spec.output_scale
            pos += 1
        if config.noise_variance is None:
            g[pos] = grads["noise"] * (noise - config.noise_floor)
        return -value, -g

    best_raw = None
    best_val = np.inf
    attempts = []
    failures = 0
    # the optimisation loop is many small GEMMs; multithreaded BLAS only thrashes
    with threadpool_limits(limits=1, user_api="blas"):
        for _ in range(max(1, config.n_restarts)):
            raw0 = rng.standard_normal(dim)
            try:
                init_val = objective(raw0)[0]
                res = minimize(objective, raw0, jac=True, method="L-BFGS-B",
                               bounds=[(-_RAW_BOUND, _RAW_BOUND)] * dim,
                               options={"maxiter": config.max_iter, "ftol": config.tol})
            except FitError:
                failures += 1
                continue
            attempts.append({"init_lml": -init_val, "final_lml": -res.fun})
            if res.fun < best_val:
                best_val = res.fun
                best_raw = res.x
    if best_raw is None:
        raise FitError(f"all {failures} restarts failed to factorize a Gram matrix")

    spec, noise = _unpack(best_raw, family, n_beta, config, eta)
    V = lap.eigenvectors[idx, :]
    w = spectral_weights(lap.eigenvalues, spec)
    K = (V * w) @ V.T
    K = 0.5 * (K + K.T)
    L, jitter = _factorize(K, noise, config.max_jitter)
    alpha = cho_solve((L, True), z)
    return GPModel(egonet=egonet, lap=lap, spec=spec, noise=noise + jitter,
                   trainset=trainset, chol=L, alpha=alpha, lml=-best_val,
                   fit_info={"attempts": attempts, "failed_restarts": failures})
