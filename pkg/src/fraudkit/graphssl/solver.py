"""Un-normalised graph p-Laplacian semi-supervised classification.

Solves Delta_p f + mu (f - y) = 0 by the fixed-point sweep

    f_j <- sum_{i~j} p_ij f_i + p_jj y_j,
    m_ij = 1/2 w_ij (||d_i f||^(p-2) + ||d_j f||^(p-2)),
    p_ij = m_ij / (sum_{i~j} m_ij + mu),   p_jj = mu / (sum_{i~j} m_ij + mu),

recomputing m and p from the previous iterate on every (Jacobi) sweep.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import SimilarityGraph
from .operators import EPSILON, local_variation, p_laplacian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    p: float = 2.0
    mu: float = 1.0
    epsilon: float = EPSILON
    max_iters: int = 1000
    tol: float = 1e-6
    zero_class: int = -1

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be at least 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1 or not self.tol > 0:
            raise ValueError("max_iters must be >= 1 and tol > 0")
        if self.zero_class not in (-1, 1):
            raise ValueError("zero_class must be -1 or +1")


@dataclass(frozen=True, eq=False)
class SSLResult:
    f: np.ndarray
    classes: np.ndarray
    iterations: int
    converged: bool
    residual: float


def label_vector(labels, labeled_mask) -> np.ndarray:
    """+1 for labelled fraud, -1 for labelled normal, 0 for unlabelled nodes."""
    labels = np.asarray(labels)
    y = np.where(labels == 1, 1.0, -1.0)
    return np.where(np.asarray(labeled_mask, dtype=bool), y, 0.0)


def transition_weights(g: SimilarityGraph, f, cfg: SolverConfig):
    """Edge weights p_ij (aligned with the graph's ordered pairs, incoming at j) and self weights p_jj."""
    a = local_variation(g, f, cfg.epsilon) ** (cfg.p - 2.0)
    m = 0.5 * g.w * (a[g.rows] + a[g.cols])
    denom = np.bincount(g.cols, weights=m, minlength=g.n) + cfg.mu
    return m / denom[g.cols], cfg.mu / denom


def sweep(g: SimilarityGraph, f, y, cfg: SolverConfig) -> np.ndarray:
    p_edge, p_self = transition_weights(g, f, cfg)
    return np.bincount(g.cols, weights=p_edge * f[g.rows], minlength=g.n) + p_self * y


def classify(f, zero_class: int = -1) -> np.ndarray:
    s = np.sign(f).astype(np.int64)
    s[s == 0] = zero_class
    return s


def solve_ssl(g: SimilarityGraph, y, cfg: SolverConfig = SolverConfig()) -> SSLResult:
    """Iterate from f = y until successive iterates differ by < tol in the max norm."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (g.n,):
        raise ValueError(f"label vector has shape {y.shape}, graph has {g.n} nodes")
    if not np.isin(y, (-1.0, 0.0, 1.0)).all():
        raise ValueError("label vector entries must be +1, -1 or 0")
    f = y.copy()
    residual = np.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        f_next = sweep(g, f, y, cfg)
        residual = float(np.max(np.abs(f_next - f))) if g.n else 0.0
        f = f_next
        if residual < cfg.tol:
            break
    converged = residual < cfg.tol
    if not converged:
        logger.warning("p-Laplacian solver stopped after %d sweeps, residual %.3g", it, residual)
    return SSLResult(f, classify(f, cfg.zero_class), it, converged, residual)


def stationarity_residual(g: SimilarityGraph, f, y, cfg: SolverConfig) -> np.ndarray:
    """Delta_p f + mu (f - y); zero at an exact solution."""
    return p_laplacian(g, f, cfg.p, cfg.epsilon) + cfg.mu * (np.asarray(f) - np.asarray(y))
