"""Spectral covariance kernels built on the scaled normalized graph Laplacian.

The Laplacian is ``0.5 * (I - D^{-1/2} A D^{-1/2})``, whose eigenvalues lie in
[0, 1]. Every kernel is a spectral filter: a regularisation function r(lambda)
assigns each eigencomponent the weight 1/r(lambda), and the covariance matrix
is the weighted sum of eigenvector outer products

    K = output_scale * sum_i r^{-1}(lambda_i) u_i u_i^T.

Nonnegative hyperparameters keep every r positive, hence K positive
semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .graphs import AdjacencyGraph, EgoNet, diameter

FAMILIES = ("diffusion", "diffusion_ard", "polynomial", "sum_inverse_polynomial", "matern")
MATERN_NU_CHOICES = (0.5, 1.5, 2.5)

_EDGE_TOL = 1e-8


@dataclass(frozen=True)
class ScaledLaplacian:
    """Dense symmetric Laplacian with its full eigendecomposition.

    Eigenvalues ascend and are clamped to [0, 1]; eigenvectors are the
    matching orthonormal columns.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def scaled_laplacian(graph: AdjacencyGraph) -> ScaledLaplacian:
    """Assemble and eigendecompose the scaled normalized Laplacian.

    Degree-0 nodes get a 0 entry in D^{-1/2}, leaving 0.5 on the diagonal.
    """
    n = graph.n
    if n < 1:
        raise ValueError("graph must have at least one node")
    A = np.zeros((n, n))
    for v in range(n):
        for w in graph.neighbors(v):
            A[v, w] = 1.0
    deg = A.sum(axis=1)
    d_isqrt = np.zeros(n)
    nz = deg > 0
    d_isqrt[nz] = 1.0 / np.sqrt(deg[nz])
    L = 0.5 * (np.eye(n) - d_isqrt[:, None] * A * d_isqrt[None, :])
    L = 0.5 * (L + L.T)
    evals, evecs = np.linalg.eigh(L)
    if evals.min() < -_EDGE_TOL or evals.max() > 1.0 + _EDGE_TOL:
        raise RuntimeError(f"Laplacian eigenvalues out of [0,1]: [{evals.min()}, {evals.max()}]")
    evals = np.clip(evals, 0.0, 1.0)
    return ScaledLaplacian(matrix=L, eigenvalues=evals, eigenvectors=evecs)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """One kernel family plus its hyperparameters.

    ``beta`` holds the learnable spectral coefficients: length 1 for the
    diffusion and matern families, length ``eta`` for the polynomial pair, and
    one entry per eigenvalue for the ARD diffusion variant.
    """

    family: str
    beta: np.ndarray
    eta: int = 1
    nu: float = 2.5
    epsilon: float = 1e-8
    output_scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "beta", beta)
        if (beta < 0).any():
            raise ValueError("beta entries must be nonnegative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.output_scale <= 0:
            raise ValueError("output_scale must be positive")
        if self.eta < 1:
            raise ValueError("kernel order eta must be at least 1")
        if self.family in ("polynomial", "sum_inverse_polynomial") and beta.size != self.eta:
            raise ValueError(f"{self.family} needs eta={self.eta} beta entries, got {beta.size}")
        if self.family in ("diffusion", "matern") and beta.size != 1:
            raise ValueError(f"{self.family} takes a single beta, got {beta.size}")
        if self.family == "matern" and self.nu <= 0:
            raise ValueError("nu must be positive")

    def replace(self, **kw) -> "KernelSpec":
        data = {"family": self.family, "beta": self.beta, "eta": self.eta,
                "nu": self.nu, "epsilon": self.epsilon, "output_scale": self.output_scale}
        data.update(kw)
        return KernelSpec(**data)


def reg_fn(lam: float, spec: KernelSpec, index: int = 0) -> float:
    """Regularisation function r(lambda); ``index`` picks beta_i for ARD only."""
    if spec.family == "diffusion":
        return float(np.exp(spec.beta[0] * lam))
    if spec.family == "diffusion_ard":
        return float(np.exp(spec.beta[index] * lam))
    if spec.family == "polynomial":
        powers = lam ** np.arange(spec.eta)
        return float(spec.beta @ powers + spec.epsilon)
    if spec.family == "sum_inverse_polynomial":
        powers = lam ** np.arange(spec.eta)
        return float(1.0 / np.sum(1.0 / (spec.beta * powers + spec.epsilon)))
    if spec.family == "matern":
        return float((spec.beta[0] * spec.nu + lam) ** spec.nu)
    raise AssertionError(spec.family)


def regularizer_curve(spec: KernelSpec, lams: np.ndarray) -> np.ndarray:
    """r(lambda) sampled on a grid (ARD is evaluated per-position)."""
    lams = np.asarray(lams, dtype=float)
    return np.array([reg_fn(lam, spec, i) for i, lam in enumerate(lams)])


def spectral_weights(eigenvalues: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Per-eigencomponent kernel weights output_scale * r^{-1}(lambda_i)."""
    lam = np.asarray(eigenvalues, dtype=float)
    s = spec.output_scale
    if spec.family == "diffusion":
        return s * np.exp(-spec.beta[0] * lam)
    if spec.family == "diffusion_ard":
        if spec.beta.size != lam.size:
            raise ValueError(f"ARD beta length {spec.beta.size} != {lam.size} eigenvalues")
        return s * np.exp(-spec.beta * lam)
    if spec.family == "polynomial":
        P = lam[:, None] ** np.arange(spec.eta)[None, :]
        return s / (P @ spec.beta + spec.epsilon)
    if spec.family == "sum_inverse_polynomial":
        P = lam[:, None] ** np.arange(spec.eta)[None, :]
        return s * np.sum(1.0 / (P * spec.beta[None, :] + spec.epsilon), axis=1)
    if spec.family == "matern":
        return s * (spec.beta[0] * spec.nu + lam) ** (-spec.nu)
    raise AssertionError(spec.family)


def beta_weight_grads(eigenvalues: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """d(weights)/d(beta_a) for non-ARD families, one row per beta entry."""
    lam = np.asarray(eigenvalues, dtype=float)
    s = spec.output_scale
    if spec.family == "diffusion":
        return (-lam * s * np.exp(-spec.beta[0] * lam))[None, :]
    if spec.family == "polynomial":
        P = lam[:, None] ** np.arange(spec.eta)[None, :]
        r = P @ spec.beta + spec.epsilon
        return (-s * P / (r ** 2)[:, None]).T
    if spec.family == "sum_inverse_polynomial":
        P = lam[:, None] ** np.arange(spec.eta)[None, :]
        denom = P * spec.beta[None, :] + spec.epsilon
        return (-s * P / denom ** 2).T
    if spec.family == "matern":
        nu = spec.nu
        return (-s * nu * nu * (spec.beta[0] * nu + lam) ** (-nu - 1.0))[None, :]
    raise ValueError(f"{spec.family} has no shared beta gradient rows")


def ard_weight_grad_diag(eigenvalues: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """d(weight_i)/d(beta_i) for the ARD diffusion family."""
    if spec.family != "diffusion_ard":
        raise ValueError("only defined for diffusion_ard")
    lam = np.asarray(eigenvalues, dtype=float)
    return -lam * spec.output_scale * np.exp(-spec.beta * lam)


def kernel_matrix(lap: ScaledLaplacian, spec: KernelSpec) -> np.ndarray:
    """Full covariance matrix over the Laplacian's node set."""
    w = spectral_weights(lap.eigenvalues, spec)
    U = lap.eigenvectors
    K = (U * w) @ U.T
    return 0.5 * (K + K.T)


def kernel_grad(lap: ScaledLaplacian, spec: KernelSpec,
                param: Union[str, tuple[str, int]]) -> np.ndarray:
    """Analytic derivative of the covariance matrix with respect to one
    learnable hyperparameter.

    ``param`` is ``"output_scale"`` or ``("beta", j)``. The constants epsilon,
    nu and eta are not learnable.
    """
    U = lap.eigenvectors
    lam = lap.eigenvalues
    if param == "output_scale":
        return kernel_matrix(lap, spec) / spec.output_scale
    if isinstance(param, tuple) and param[0] == "beta":
        j = param[1]
        if not 0 <= j < spec.beta.size:
            raise ValueError(f"beta index {j} out of range for {spec.beta.size} entries")
        if spec.family == "diffusion_ard":
            d = ard_weight_grad_diag(lam, spec)[j]
            u = U[:, j]
            return d * np.outer(u, u)
        dw = beta_weight_grads(lam, spec)[j]
        G = (U * dw) @ U.T
        return 0.5 * (G + G.T)
    raise ValueError(f"hyperparameter {param!r} is not learnable")


def default_eta(egonet: EgoNet) -> int:
    """Kernel order for the polynomial pair: min(5, diameter), at least 1."""
    return max(1, min(5, diameter(egonet.graph)))
