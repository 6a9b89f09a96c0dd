"""Hyperplane clustering with Dual Principal Component Pursuit (DPCP)."""

from dpcp.arrangement import (
    Arrangement,
    PointCloud,
    SynthConfig,
    cluster_sizes,
    equiangular_arrangement,
    random_arrangement,
    synthesize,
)
from dpcp.clustering import ClusterResult, NormalEstimator, assign_labels, ihl, shl
from dpcp.solvers import SolverConfig, SolverReport, dpcp_d, dpcp_irls, dpcp_r, dpcp_r_d

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "ClusterResult",
    "NormalEstimator",
    "PointCloud",
    "SolverConfig",
    "SolverReport",
    "SynthConfig",
    "assign_labels",
    "cluster_sizes",
    "dpcp_d",
    "dpcp_irls",
    "dpcp_r",
    "dpcp_r_d",
    "equiangular_arrangement",
    "ihl",
    "random_arrangement",
    "shl",
    "synthesize",
]
