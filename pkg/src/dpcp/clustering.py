"""Hyperplane clustering pipelines and single-normal baselines.

Two pipelines share one estimator protocol. :func:`shl` learns normals one at
a time, reweighting every point by its distance to the normals found so far.
:func:`ihl` alternates nearest-hyperplane assignment with per-cluster
re-estimation (K-hyperplanes with an l1 objective); :func:`ihl_restarts`
wraps it with random restarts.

An estimator is called as ``est(X, weights, rng)`` and returns a unit normal.
``weights=None`` means uniform.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from dpcp import lp, solvers
from dpcp.arrangement import make_rng
from dpcp.numerics import canonical_sign, normalize, normalize_columns, smallest_eigvec
from dpcp.solvers import SolverConfig

logger = logging.getLogger(__name__)

ESTIMATORS = ("dpcp_r", "dpcp_irls", "dpcp_d", "dpcp_r_d", "svd", "ransac", "reaper")
RANSAC_THRESH = 0.03
RANSAC_TRIALS = 1000
DEGENERATE_TOL = 1e-10


class ClusteringError(RuntimeError):
    pass


def canonical_method(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in ESTIMATORS:
        raise ValueError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
    return key


# ---------------------------------------------------------------- baselines


def svd_normal(X, weights=None):
    """Bottom eigenvector of ``sum_j w_j x_j x_j^T`` (least-squares hyperplane)."""
    X = np.asarray(X, dtype=float)
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(w[:, None] * X.T):
        raise ValueError("weighted points are all zero")
    b, _ = smallest_eigvec((X * w) @ X.T)
    return b


def ransac_normal(X, weights=None, trials: int = RANSAC_TRIALS, thresh: float = RANSAC_THRESH, rng=None):
    """Weighted-sampling RANSAC for a single hyperplane.

    Each trial draws ``D - 1`` distinct columns with probability proportional
    to ``weights``, takes the normal of their span and scores it by the
    weighted count of points within ``thresh``. The first best-scoring normal
    wins. Degenerate samples consume a trial. If every trial was degenerate
    the weighted least-squares normal is returned instead.
    """
    X = np.asarray(X, dtype=float)
    D, N = X.shape
    w = np.ones(N) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (N,) or np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be non-negative and not all zero")
    if trials < 1 or not thresh > 0:
        raise ValueError("need trials >= 1 and thresh > 0")
    support = int(np.count_nonzero(w))
    if support < D - 1:
        raise ValueError(f"only {support} points carry weight; a hyperplane needs {D - 1}")
    rng = rng if rng is not None else make_rng(0)
    p = w / w.sum()
    best_b, best_score = None, -np.inf
    for _ in range(trials):
        idx = rng.choice(N, size=D - 1, replace=False, p=p)
        S = X[:, idx]
        s = np.linalg.svd(S, compute_uv=False)
        if s[-1] <= DEGENERATE_TOL * max(1.0, s[0]):
            continue
        b, _ = smallest_eigvec(S @ S.T)
        score = float(w[np.abs(b @ X) <= thresh].sum())
        if score > best_score:
            best_b, best_score = b, score
    if best_b is None:
        logger.warning("all %d RANSAC samples were degenerate; falling back to the SVD normal", trials)
        return svd_normal(X, w)
    return best_b


def reaper_normal(X, cfg: Optional[SolverConfig] = None):
    """IRLS approximation of the sum-of-distances subspace fit, with ``d = D - 1``.

    The fitted subspace is the span of the top ``D - 1`` eigenvectors of the
    weighted covariance and weights are ``1/max(delta, dist(x, H))`` with the
    distance measured through that projector.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    X = np.asarray(X, dtype=float)
    D = X.shape[0]
    T = cfg.iterations(100)

    def fit(w):
        _, V = np.linalg.eigh((X * w) @ X.T)
        U = V[:, 1:]  # top D-1 directions
        return U, V[:, 0]

    def dist(U):
        return np.linalg.norm(X - U @ (U.T @ X), axis=0)

    U, b = fit(np.ones(X.shape[1]))
    J = float(dist(U).sum())
    for _ in range(T):
        U, b = fit(1.0 / np.maximum(cfg.delta, dist(U)))
        J_new = float(dist(U).sum())
        dJ = (J - J_new) / (J + solvers.DJ_GUARD)
        J = J_new
        if dJ <= cfg.epsilon:
            break
    return canonical_sign(normalize(b))


# ---------------------------------------------------------------- estimator


@dataclass(frozen=True)
class NormalEstimator:
    """A named single-normal method plus its settings."""

    method: str = "dpcp_r"
    solver: SolverConfig = field(default_factory=SolverConfig)
    ransac_trials: int = RANSAC_TRIALS
    ransac_thresh: float = RANSAC_THRESH

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if self.ransac_trials < 1 or not self.ransac_thresh > 0:
            raise ValueError("ransac_trials must be >= 1 and ransac_thresh > 0")

    def __call__(self, X, weights=None, rng=None):
        X = np.asarray(X, dtype=float)
        if self.method == "ransac":
            return ransac_normal(X, weights, self.ransac_trials, self.ransac_thresh, rng)
        if self.method == "svd":
            # same quadratic form as the weighted matrix [w_j x_j]
            return svd_normal(X, None if weights is None else np.asarray(weights, dtype=float) ** 2)
        Y = X if weights is None else X * np.asarray(weights, dtype=float)
        if self.method == "reaper":
            return reaper_normal(Y, self.solver)
        return solvers.solve(self.method, Y, self.solver).normal


# ---------------------------------------------------------------- pipelines


@dataclass
class ClusterResult:
    labels: np.ndarray
    normals: np.ndarray  # D x n, one normal per column
    residuals: np.ndarray
    restarts_used: int = 1
    final_objective: float = 0.0
    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    assignment_steps: list = field(default_factory=list)  # (J before, J after) per reassignment

    @property
    def n(self) -> int:
        return self.normals.shape[1]


def _as_normals(normals) -> np.ndarray:
    if isinstance(normals, (list, tuple)):
        B = np.column_stack([np.asarray(b, dtype=float) for b in normals])
    else:
        B = np.asarray(normals, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[1] < 1:
        raise ValueError("need at least one normal")
    return B


def residual_matrix(X, normals):
    return np.abs(_as_normals(normals).T @ np.asarray(X, dtype=float))


def assign_labels(X, normals):
    """Label each column by its nearest hyperplane (1-based); ties go to the lower index."""
    return np.argmin(residual_matrix(X, normals), axis=0) + 1


def _result(X, B, **kw) -> ClusterResult:
    R = residual_matrix(X, B)
    labels = np.argmin(R, axis=0) + 1
    res = R[labels - 1, np.arange(R.shape[1])]
    return ClusterResult(labels, B, res, final_objective=float(res.sum()), **kw)


def shl(X, n: int, est: NormalEstimator = NormalEstimator(), rng=None) -> ClusterResult:
    """Sequential hyperplane learning.

    The ``i``-th normal is estimated from ``[w_1 x_1, ..., w_N x_N]`` with
    ``w_j = min_{k<i} |b_k^T x_j|`` (all ones for the first normal); labels
    come from the original points.
    """
    X = np.asarray(X, dtype=float)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = rng if rng is not None else make_rng(0)
    w = None
    normals = []
    for i in range(n):
        try:
            b = est(X, w, rng)
        except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            raise ClusteringError(f"estimating hyperplane {i + 1} of {n}: {exc}") from exc
        normals.append(b)
        r = np.abs(b @ X)
        w = r if w is None else np.minimum(w, r)
    return _result(X, np.column_stack(normals), iterations=n)


def _reseed(X, residuals, D):
    """Normal through the ``D - 1`` points that are currently fit worst."""
    far = np.argsort(-residuals, kind="stable")[: D - 1]
    return svd_normal(X[:, far])


def ihl(X, init_normals, est: NormalEstimator = NormalEstimator(), eps: float = 1e-3,
        max_sweeps: int = 100, rng=None) -> ClusterResult:
    """Iterative hyperplane learning from given initial normals.

    Each sweep re-estimates every normal from its cluster, then reassigns.
    The run stops when the relative decrease of the l1 objective drops to
    ``eps`` or below; the best state seen is returned. A cluster holding
    fewer than ``D - 1`` points (or too degenerate for the estimator) is
    re-seeded from the worst-fit points.
    """
    X = np.asarray(X, dtype=float)
    D = X.shape[0]
    B = normalize_columns(_as_normals(init_normals).copy())
    n = B.shape[1]
    rng = rng if rng is not None else make_rng(0)
    best = _result(X, B)
    labels, J = best.labels, best.final_objective
    trace, steps = [J], []
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        resid = residual_matrix(X, B).min(axis=0)
        newB = B.copy()
        for i in range(n):
            members = np.flatnonzero(labels == i + 1)
            b = None
            if members.size >= D - 1:
                try:
                    b = est(X[:, members], None, rng)
                except lp.RankDeficientError:
                    b = None
            if b is None:
                logger.debug("re-seeding cluster %d (%d points)", i + 1, members.size)
                b = _reseed(X, resid, D)
            newB[:, i] = b
        B = newB
        J_est = float(np.abs(B.T @ X)[labels - 1, np.arange(X.shape[1])].sum())
        cur = _result(X, B)
        steps.append((J_est, cur.final_objective))
        trace.append(cur.final_objective)
        dJ = (J - cur.final_objective) / (J + solvers.DJ_GUARD)
        if cur.final_objective < best.final_objective:
            best = cur
        labels, J = cur.labels, cur.final_objective
        if dJ <= eps:
            break
    best.iterations = sweeps
    best.objective_trace = trace
    best.assignment_steps = steps
    return best


def random_normals(D: int, n: int, rng) -> np.ndarray:
    return normalize_columns(rng.standard_normal((D, n)))


def ihl_restarts(X, n: int, est: NormalEstimator = NormalEstimator(), restarts: int = 10,
                 eps: float = 1e-3, max_sweeps: int = 100, seed: int = 0,
                 init_normals=None) -> ClusterResult:
    """Best of ``restarts`` IHL runs from random normals (ties go to the earlier restart).

    Restart ``r`` draws its normals and estimator randomness from
    ``make_rng(seed, r)``. ``init_normals``, when given, replaces the random
    draw of restart 0.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    X = np.asarray(X, dtype=float)
    best = None
    for r in range(restarts):
        rng = make_rng(seed, r)
        B0 = _as_normals(init_normals) if (r == 0 and init_normals is not None) else random_normals(X.shape[0], n, rng)
        res = ihl(X, B0, est, eps, max_sweeps, rng)
        if best is None or res.final_objective < best.final_objective:
            best = res
    best.restarts_used = restarts
    return best
