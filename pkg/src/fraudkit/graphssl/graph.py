from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Undirected weighted graph stored as a symmetric CSR matrix with zero diagonal.

    ``rows``/``cols``/``w`` list every ordered pair (i, j) with w_ij > 0, so each
    undirected edge appears twice; ``reverse[e]`` is the position of (j, i).
    Edge functions are plain arrays aligned with these ordered pairs.
    """

    weights: sparse.csr_matrix
    rows: np.ndarray
    cols: np.ndarray
    w: np.ndarray
    reverse: np.ndarray

    @classmethod
    def from_matrix(cls, W) -> "SimilarityGraph":
        W = sparse.csr_matrix(W, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise ValueError("weight matrix must be square")
        W.setdiag(0.0)
        W.eliminate_zeros()
        W.sort_indices()
        if (W.data < 0).any():
            raise ValueError("weights must be non-negative")
        if (W != W.T).nnz:
            raise ValueError("weight matrix must be symmetric")
        coo = W.tocoo()
        rows, cols = coo.row.astype(np.int64), coo.col.astype(np.int64)
        n = W.shape[0]
        # CSR order sorts by (row, col); the reverse pair (col, row) sorts by key col*n+row
        key = rows * n + cols
        reverse = np.searchsorted(key, cols * n + rows)
        return cls(W, rows, cols, coo.data.copy(), reverse)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.w) // 2

    def neighbors(self, i: int) -> np.ndarray:
        W = self.weights
        return W.indices[W.indptr[i]:W.indptr[i + 1]]


def build_knn_graph(features, k: int = 5, t: float = 0.1) -> SimilarityGraph:
    """Symmetric kNN graph (i ~ j if either is among the other's k nearest), w = exp(-d / t).

    ``d`` is the plain Euclidean distance. Weights that underflow to exactly 0
    drop their edge.
    """
    X = np.asarray(features, dtype=np.float64)
    n = X.shape[0]
    if k < 1 or k >= n:
        raise ValueError(f"k must be in [1, n-1]; got k={k}, n={n}")
    if not t > 0:
        raise ValueError("t must be positive")
    dist, idx = cKDTree(X).query(X, k=k + 1)
    # a duplicate point may be returned ahead of the query point itself
    not_self = idx != np.arange(n)[:, None]
    keep = not_self & (np.cumsum(not_self, axis=1) <= k)
    rows = np.repeat(np.arange(n), k + 1)[keep.ravel()]
    cols = idx.ravel()[keep.ravel()]
    d = dist.ravel()[keep.ravel()]
    A = sparse.csr_matrix((np.exp(-d / t), (rows, cols)), shape=(n, n))
    return SimilarityGraph.from_matrix(A.maximum(A.T))
