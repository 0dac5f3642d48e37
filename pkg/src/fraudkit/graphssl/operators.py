"""Discrete calculus on a weighted graph: gradient, divergence, Laplacian, curvature, p-Laplacian.

Vertex functions are length-n arrays. Edge functions are arrays aligned with the
ordered pairs ``(g.rows[e], g.cols[e])``; the edge inner product sums over all
ordered pairs, which is what makes divergence the negative adjoint of gradient.
"""

from __future__ import annotations

import numpy as np

from .graph import SimilarityGraph

EPSILON = 1e-10


def _vertex(g: SimilarityGraph, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n,):
        raise ValueError(f"dimension mismatch: graph has {g.n} nodes, function has shape {f.shape}")
    return f


def inner_vertex(f, h) -> float:
    return float(np.dot(f, h))


def inner_edge(F, G) -> float:
    return float(np.dot(F, G))


def degree(g: SimilarityGraph) -> np.ndarray:
    return np.bincount(g.rows, weights=g.w, minlength=g.n)


def gradient(g: SimilarityGraph, f) -> np.ndarray:
    """(df)_ij = sqrt(w_ij) (f_j - f_i)."""
    f = _vertex(g, f)
    return np.sqrt(g.w) * (f[g.cols] - f[g.rows])


def divergence(g: SimilarityGraph, F) -> np.ndarray:
    """(div F)_j = sum_{i~j} sqrt(w_ij) (F_ji - F_ij)."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape != g.w.shape:
        raise ValueError("edge function does not match the graph's edge list")
    # entry e is the ordered pair (i, j) = (rows[e], cols[e]); accumulate at j
    return np.bincount(g.cols, weights=np.sqrt(g.w) * (F[g.reverse] - F), minlength=g.n)


def laplacian(g: SimilarityGraph, f) -> np.ndarray:
    """(Delta f)_j = d_j f_j - sum_{i~j} w_ij f_i."""
    f = _vertex(g, f)
    return degree(g) * f - g.weights @ f


def local_variation(g: SimilarityGraph, f, epsilon: float = EPSILON) -> np.ndarray:
    """||d_i f|| = sqrt(sum_{j~i} (df)_ij^2 + epsilon)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    df = gradient(g, f)
    return np.sqrt(np.bincount(g.rows, weights=df * df, minlength=g.n) + epsilon)


def _edge_weighted_difference(g: SimilarityGraph, f, node_factor) -> np.ndarray:
    # 1/2 sum_{i~j} w_ij (a_i + a_j) (f_j - f_i), accumulated at j = cols
    coupling = 0.5 * g.w * (node_factor[g.rows] + node_factor[g.cols])
    return np.bincount(g.cols, weights=coupling * (f[g.cols] - f[g.rows]), minlength=g.n)


def curvature(g: SimilarityGraph, f, epsilon: float = EPSILON) -> np.ndarray:
    """(kappa f)_j = 1/2 sum_{i~j} w_ij (1/||d_i f|| + 1/||d_j f||) (f_j - f_i)."""
    f = _vertex(g, f)
    return _edge_weighted_difference(g, f, 1.0 / local_variation(g, f, epsilon))


def p_laplacian(g: SimilarityGraph, f, p: float, epsilon: float = EPSILON) -> np.ndarray:
    """(Delta_p f)_j = 1/2 sum_{i~j} w_ij (||d_i f||^(p-2) + ||d_j f||^(p-2)) (f_j - f_i)."""
    if p < 1:
        raise ValueError("p must be at least 1")
    f = _vertex(g, f)
    return _edge_weighted_difference(g, f, local_variation(g, f, epsilon) ** (p - 2.0))


def smoothness(g: SimilarityGraph, f, p: float, epsilon: float = EPSILON) -> float:
    """S_p(f) = 1/2 sum_i ||d_i f||^p.

    With this normalisation the gradient of S_p is exactly p * Delta_p f for every
    p (so 2 Delta f at p = 2, where S_2 = <Delta f, f> up to the epsilon term, and
    kappa f at p = 1). A 1/p prefactor would instead give 2 Delta_p f for all p.
    """
    return 0.5 * float(np.sum(local_variation(g, f, epsilon) ** p))
