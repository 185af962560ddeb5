"""Expected-improvement scoring and exhaustive candidate selection.

Acquisition always works in minimization terms; maximization tasks are
negated upstream by the optimisation engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .gp import GPModel
from .graphs import EgoNet


def expected_improvement(mu: np.ndarray, sigma: np.ndarray, y_star: float) -> np.ndarray:
    """EI = E[max(y* - Y, 0)] for Y ~ N(mu, sigma^2), elementwise.

    sigma == 0 degenerates to max(y* - mu, 0).
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if (sigma < 0).any():
        raise ValueError("sigma must be nonnegative")
    improve = y_star - mu
    ei = np.maximum(improve, 0.0)
    pos = sigma > 0
    if np.any(pos):
        z = improve[pos] / sigma[pos]
        ei = ei.astype(float)
        ei[pos] = improve[pos] * norm.cdf(z) + sigma[pos] * norm.pdf(z)
    return np.maximum(ei, 0.0)


@dataclass
class AcquisitionResult:
    node: int                 # chosen global node id
    candidates: np.ndarray    # global ids scored
    ei: np.ndarray            # EI per candidate
    y_star: float             # incumbent value used


def select_next(model: GPModel, egonet: EgoNet,
                visited: set[int]) -> Optional[AcquisitionResult]:
    """Score every unvisited ego-net node and pick the EI maximiser.

    Ties break towards the smallest global id. Returns None when every node
    in the ego-net has been visited already.
    """
    cand_local = [i for i, g in enumerate(egonet.nodes) if g not in visited]
    if not cand_local:
        return None
    cand_local = np.asarray(cand_local, dtype=np.int64)
    cand_global = np.asarray([egonet.nodes[i] for i in cand_local], dtype=np.int64)
    y_star = float(model.trainset.y.min())
    mu, var = model.predict(cand_local)
    ei = expected_improvement(mu, np.sqrt(var), y_star)
    best = ei.max()
    chosen = int(cand_global[ei == best].min())
    return AcquisitionResult(node=chosen, candidates=cand_global, ei=ei, y_star=y_star)
