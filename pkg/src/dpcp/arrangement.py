"""Ground-truth hyperplane arrangements and the synthetic data generator.

Random streams come from :func:`make_rng`, a Philox (counter-based) generator
keyed through ``numpy.random.SeedSequence``: ``make_rng(seed, *keys)`` hashes
the master seed together with integer keys (trial index, grid cell, ...) so
every trial owns an independent, reproducible stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from dpcp.numerics import NORM_TOL, normalize, normalize_columns, principal_angle, project_to_hyperplane

MIN_SEPARATION = 1e-6
REDRAW_ANGLE = 1e-3
MAX_REDRAWS = 1000


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Arrangement:
    """``n`` unit normals (columns of a ``D x n`` array) with weights ``N1 >= ... >= Nn``."""

    normals: np.ndarray
    weights: tuple

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.normals, dtype=float))
        object.__setattr__(self, "normals", B)
        w = tuple(int(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != B.shape[1]:
            raise ValueError(f"{B.shape[1]} normals but {len(w)} weights")
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive integers")
        if any(w[i] < w[i + 1] for i in range(len(w) - 1)):
            raise ValueError(f"weights must be non-increasing, got {w}")
        if np.any(np.abs(np.linalg.norm(B, axis=0) - 1.0) > NORM_TOL):
            raise ValueError("normals must have unit norm")
        for i in range(B.shape[1]):
            for j in range(i + 1, B.shape[1]):
                if principal_angle(B[:, i], B[:, j]) <= MIN_SEPARATION:
                    raise ValueError(f"normals {i + 1} and {j + 1} coincide up to sign")

    @property
    def D(self) -> int:
        return self.normals.shape[0]

    @property
    def n(self) -> int:
        return self.normals.shape[1]

    def angles(self) -> np.ndarray:
        """Matrix of pairwise principal angles between normals."""
        G = np.clip(np.abs(self.normals.T @ self.normals), 0.0, 1.0)
        A = np.arccos(G)
        np.fill_diagonal(A, 0.0)
        return A


@dataclass(frozen=True)
class SynthConfig:
    D: int
    n: int
    total_points: Optional[int] = None
    balance_alpha: float = 1.0
    noise_sigma: float = 0.01
    outlier_ratio: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.D < 2:
            raise ValueError("D must be at least 2")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.balance_alpha <= 1:
            raise ValueError("balance_alpha must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0 <= self.outlier_ratio < 1:
            raise ValueError("outlier_ratio must lie in [0, 1)")
        if self.total_points is not None and self.total_points < self.n:
            raise ValueError("total_points must be at least n")

    @property
    def inliers(self) -> int:
        return self.total_points if self.total_points is not None else 300 * self.n


@dataclass
class PointCloud:
    """``D x N`` points (one per column) with optional labels; label 0 marks an outlier."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    normalized: bool = field(default=True)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.points.shape[1],):
                raise ValueError("label count must equal the number of points")
        if self.normalized:
            nrm = np.linalg.norm(self.points, axis=0)
            if np.any(np.abs(nrm - 1.0) > NORM_TOL):
                raise ValueError("normalized point cloud has columns off the unit sphere")

    @property
    def D(self) -> int:
        return self.points.shape[0]

    @property
    def N(self) -> int:
        return self.points.shape[1]


def cluster_sizes(n: int, total: int, balance_alpha: float, D: Optional[int] = None) -> list:
    """Cluster sizes following a geometric decay ``N_i ~ alpha^(i-1) N_1`` summing to ``total``.

    The smaller clusters get the floor of their exact share and the residue
    goes to ``N_1``, which keeps the list non-increasing. When ``D`` is given
    every cluster must hold at least ``D - 1`` points.
    """
    if n < 1 or total < n or not 0 < balance_alpha <= 1:
        raise ValueError(f"invalid cluster_sizes arguments n={n} total={total} alpha={balance_alpha}")
    geom = sum(balance_alpha**i for i in range(n))
    rest = [int(math.floor(total * balance_alpha**i / geom + 1e-9)) for i in range(1, n)]
    sizes = [total - sum(rest)] + rest
    if D is not None and min(sizes) < D - 1:
        raise ValueError(f"cluster sizes {sizes} leave a cluster with fewer than D-1={D - 1} points")
    if any(s <= 0 for s in sizes):
        raise ValueError(f"cluster sizes {sizes} contain an empty cluster")
    return sizes


def random_arrangement(D: int, n: int, rng: np.random.Generator, weights: Optional[Sequence[int]] = None) -> Arrangement:
    if n < 1 or D < 2:
        raise ValueError("need n >= 1 and D >= 2")
    for _ in range(MAX_REDRAWS):
        B = normalize_columns(rng.standard_normal((D, n)))
        G = np.abs(B.T @ B)
        np.fill_diagonal(G, 0.0)
        if n == 1 or np.arccos(min(1.0, G.max())) >= REDRAW_ANGLE:
            break
    else:
        raise RuntimeError(f"could not draw {n} separated normals in R^{D}")
    if weights is None:
        weights = [1] * n
    return Arrangement(B, tuple(weights))


def equiangular_normals(a: float) -> np.ndarray:
    """Three normals of R^3 with equal pairwise angles controlled by ``a > 0``."""
    if not a > 0:
        raise ValueError("equiangular parameter must be positive")
    mu = 1.0 / math.sqrt((1 + a) ** 2 + 2 * a**2)
    return mu * (np.full((3, 3), a) + np.eye(3))


def equiangular_cos(a: float) -> float:
    return (2 * a + 3 * a**2) / (1 + 2 * a + 3 * a**2)


def equiangular_arrangement(a: float, weight: int = 1) -> Arrangement:
    return Arrangement(equiangular_normals(a), (weight,) * 3)


def synthesize(arr: Arrangement, cfg: SynthConfig, rng: np.random.Generator) -> PointCloud:
    """Sample noisy unit-norm points from each hyperplane of ``arr`` plus outliers.

    Cluster ``i`` gets ``N_i`` points: a standard Gaussian projected onto the
    hyperplane, plus ``sigma * g * b_i`` along the normal, normalized last.
    Outliers are normalized standard Gaussians; columns are shuffled.
    """
    if arr.D != cfg.D or arr.n != cfg.n:
        raise ValueError("arrangement does not match the synthesis config")
    sizes = cluster_sizes(cfg.n, cfg.inliers, cfg.balance_alpha)
    blocks, labels = [], []
    for i, Ni in enumerate(sizes):
        b = arr.normals[:, i]
        P = project_to_hyperplane(rng.standard_normal((cfg.D, Ni)), b)
        if cfg.noise_sigma > 0:
            P = P + cfg.noise_sigma * np.outer(b, rng.standard_normal(Ni))
        blocks.append(P)
        labels.append(np.full(Ni, i + 1))
    n_out = outlier_count(sum(sizes), cfg.outlier_ratio)
    if n_out:
        blocks.append(rng.standard_normal((cfg.D, n_out)))
        labels.append(np.zeros(n_out, dtype=int))
    X = normalize_columns(np.hstack(blocks))
    y = np.concatenate(labels)
    perm = rng.permutation(X.shape[1])
    return PointCloud(X[:, perm], y[perm])


def outlier_count(n_inliers: int, ratio: float) -> int:
    """Outliers needed so that they form ``ratio`` of the whole dataset."""
    if ratio <= 0:
        return 0
    return int(math.ceil(ratio * n_inliers / (1.0 - ratio) - 1e-9))


def sample_arrangement(arr: Arrangement, rng: np.random.Generator, noise_sigma: float = 0.0) -> PointCloud:
    """``N_i = weights[i]`` points per hyperplane, drawn as in :func:`synthesize`, without outliers.

    Columns stay grouped by cluster (no shuffle), which suits the theory checks.
    """
    blocks, labels = [], []
    for i, Ni in enumerate(arr.weights):
        b = arr.normals[:, i]
        P = project_to_hyperplane(rng.standard_normal((arr.D, Ni)), b)
        if noise_sigma > 0:
            P = P + noise_sigma * np.outer(b, rng.standard_normal(Ni))
        blocks.append(P)
        labels.append(np.full(Ni, i + 1))
    return PointCloud(normalize_columns(np.hstack(blocks)), np.concatenate(labels))
