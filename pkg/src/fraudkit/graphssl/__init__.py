from .experiment import run_holdout_experiment, stratified_holdout
from .graph import SimilarityGraph, build_knn_graph
from .operators import (
    curvature,
    degree,
    divergence,
    gradient,
    inner_edge,
    inner_vertex,
    laplacian,
    local_variation,
    p_laplacian,
    smoothness,
)
from .solver import SolverConfig, SSLResult, classify, label_vector, solve_ssl, stationarity_residual

__all__ = [
    "SimilarityGraph", "build_knn_graph", "degree", "gradient", "divergence", "laplacian",
    "local_variation", "curvature", "p_laplacian", "smoothness", "inner_edge", "inner_vertex",
    "SolverConfig", "SSLResult", "solve_ssl", "label_vector", "classify", "stationarity_residual",
    "run_holdout_experiment", "stratified_holdout",
]
