"""DPCP solvers: each one estimates a single hyperplane normal from ``Y`` (``D x N``).

* :func:`dpcp_r`    -- recursion of slice linear programs, solved by simplex
* :func:`dpcp_irls` -- iteratively reweighted least squares
* :func:`dpcp_d`    -- alternating minimization of the denoised problem
* :func:`dpcp_r_d`  -- the LP recursion with each slice problem denoised
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from dpcp import lp
from dpcp.numerics import (
    Cholesky,
    canonical_sign,
    normalize,
    smallest_eigvec,
    soft_threshold,
    sphere_least_squares,
)

logger = logging.getLogger(__name__)

DJ_GUARD = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-3
    max_iter: Optional[int] = None  # None: 20 for dpcp_r, 100 for the others
    delta: float = 1e-8
    tau: float = 1e-2
    inner_max_iter: int = 50
    inner_tol: float = 1e-6

    def __post_init__(self):
        for name in ("epsilon", "delta", "tau", "inner_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.inner_max_iter < 1:
            raise ValueError("inner_max_iter must be positive")

    def iterations(self, default: int) -> int:
        return self.max_iter if self.max_iter is not None else default


@dataclass
class SolverReport:
    normal: np.ndarray
    objective_trace: List[float]
    iterations: int
    converged: bool
    certificates: Optional[list] = None
    inner_traces: Optional[list] = None
    iterates: List[np.ndarray] = field(default_factory=list)


def _relative_decrease(old: float, new: float) -> float:
    return (old - new) / (old + DJ_GUARD)


def l1_objective(Y, b) -> float:
    return float(np.abs(Y.T @ b).sum())


def init_normal(Y):
    """Unit ``b`` minimizing ``||Y^T b||_2``: the bottom eigenvector of ``Y Y^T``."""
    Y = np.asarray(Y, dtype=float)
    if not np.any(Y):
        raise ValueError("cannot initialize from an all-zero matrix")
    b, _ = smallest_eigvec(Y @ Y.T)
    return b


def _exact_fit(Y, tol=lp.RANK_TOL):
    """Normal and certificate when ``Y`` spans exactly a hyperplane, else ``None``."""
    D = Y.shape[0]
    s = np.linalg.svd(Y, compute_uv=False)
    if s.size < D or s[-1] > tol:
        return None
    if D >= 2 and s[D - 2] <= tol:
        raise lp.RankDeficientError(f"data rank is below {D - 1}; the normal is not determined")
    b = init_normal(Y)
    _, _, piv = scipy.linalg.qr(Y, pivoting=True, mode="economic")
    cert = lp.VertexCertificate.build(Y, b, sorted(int(j) for j in piv[: D - 1]))
    return b, cert


def dpcp_r(Y, cfg: SolverConfig = SolverConfig(), init=None) -> SolverReport:
    """Relaxed DPCP: ``n_k = argmin_{b^T n_{k-1} = 1} ||Y^T b||_1``, then normalize.

    Every iterate is a simplex vertex and carries a :class:`~dpcp.lp.VertexCertificate`.
    Data spanning exactly one hyperplane is answered directly by its normal
    (objective zero), since the slice problem needs full rank.
    """
    Y = np.asarray(Y, dtype=float)
    T = cfg.iterations(20)
    fit = _exact_fit(Y)
    if fit is not None:
        b, cert = fit
        return SolverReport(b, [l1_objective(Y, b)], 0, True, [cert], iterates=[b])

    n_hat = normalize(init) if init is not None else init_normal(Y)
    trace = [l1_objective(Y, n_hat)]
    certs, iterates = [], [n_hat]
    warm = None
    dJ = np.inf
    k = 0
    while k < T and dJ > cfg.epsilon:
        k += 1
        b, _, cert = lp.solve_l1_slice(lp.L1SliceProblem(Y, n_hat), warm_start=warm)
        warm = cert.active_indices
        n_hat = normalize(b)
        trace.append(l1_objective(Y, n_hat))
        certs.append(cert)
        iterates.append(n_hat)
        dJ = _relative_decrease(trace[-2], trace[-1])
    return SolverReport(canonical_sign(n_hat), trace, k, dJ <= cfg.epsilon, certs, iterates=iterates)


def irls_step(Y, b, delta):
    """One reweighting: ``w_x = 1/max(delta, |b^T x|)``, then the weighted bottom eigenvector."""
    w = 1.0 / np.maximum(delta, np.abs(Y.T @ b))
    b_new, _ = smallest_eigvec((Y * w) @ Y.T)
    return b_new


def dpcp_irls(Y, cfg: SolverConfig = SolverConfig(), init=None) -> SolverReport:
    Y = np.asarray(Y, dtype=float)
    T = cfg.iterations(100)
    b = normalize(init) if init is not None else init_normal(Y)
    trace = [l1_objective(Y, b)]
    iterates = [b]
    dJ = np.inf
    k = 0
    while k < T and dJ > cfg.epsilon:
        k += 1
        b = irls_step(Y, b, cfg.delta)
        trace.append(l1_objective(Y, b))
        iterates.append(b)
        dJ = _relative_decrease(trace[-2], trace[-1])
    return SolverReport(canonical_sign(b), trace, k, dJ <= cfg.epsilon, iterates=iterates)


def denoised_objective(Y, b, y, tau) -> float:
    return float(tau * np.abs(y).sum() + 0.5 * np.sum((y - Y.T @ b) ** 2))


def dpcp_d(Y, cfg: SolverConfig = SolverConfig(), init=None):
    """Denoised DPCP by alternating shrinkage and a normalized least-squares step.

    Returns ``(report, y)`` where ``y`` is the final shrunk residual vector.
    The normalized solve is kept whenever it does not raise the objective;
    otherwise the b-step falls back to the exact minimizer of the coupling
    term over the sphere, so the trace is monotone.
    """
    Y = np.asarray(Y, dtype=float)
    D = Y.shape[0]
    T = cfg.iterations(100)
    tau = cfg.tau
    G = Y @ Y.T
    chol = Cholesky(G + cfg.delta * np.eye(D))
    b = normalize(init) if init is not None else init_normal(Y)
    y = Y.T @ b
    trace = [float(tau * np.abs(y).sum())]
    iterates = [b]
    dJ = np.inf
    k = 0
    while k < T and dJ > cfg.epsilon:
        k += 1
        y = soft_threshold(Y.T @ b, tau)
        xi = chol.solve(Y @ y)
        # y == 0 leaves b alone: it already minimizes ||Y^T b||_2 on the sphere
        if np.any(xi):
            cand = normalize(xi)
            if denoised_objective(Y, cand, y, tau) > denoised_objective(Y, b, y, tau):
                cand = sphere_least_squares(G, Y @ y)
                if denoised_objective(Y, cand, y, tau) > denoised_objective(Y, b, y, tau):
                    cand = b
            b = cand
        trace.append(denoised_objective(Y, b, y, tau))
        iterates.append(b)
        dJ = _relative_decrease(trace[-2], trace[-1])
    report = SolverReport(canonical_sign(b), trace, k, dJ <= cfg.epsilon, iterates=iterates)
    return report, y


def _huber(Y, b, tau, delta):
    """``min_y tau||y||_1 + 1/2||y - Y^T b||^2`` in closed form, plus ``delta/2 ||b||^2``."""
    r = np.abs(Y.T @ b)
    quad = r <= tau
    val = 0.5 * np.sum(r[quad] ** 2) + np.sum(tau * r[~quad] - 0.5 * tau**2)
    return float(val + 0.5 * delta * float(b @ b))


def _newton_polish(Y, anchor, b, tau, delta, f_b):
    """One active-set Newton step for the slice problem, with exact line search.

    Freezing the split of residuals into ``|r| <= tau`` (quadratic) and the
    rest (linear, fixed sign) makes the objective quadratic; its constrained
    minimizer comes from one KKT solve. Returns ``(b, value)``, unchanged
    when no descent is found.
    """
    D = Y.shape[0]
    r = Y.T @ b
    quad = np.abs(r) <= tau
    Yq = Y[:, quad]
    H = Yq @ Yq.T + delta * np.eye(D)
    rhs = -tau * (Y[:, ~quad] @ np.sign(r[~quad]))
    try:
        fac = scipy.linalg.cho_factor(H, lower=True)
        Hr, Ha = scipy.linalg.cho_solve(fac, rhs), scipy.linalg.cho_solve(fac, anchor)
    except np.linalg.LinAlgError:
        return b, f_b
    lam = (float(anchor @ Hr) - 1.0) / float(anchor @ Ha)
    d = (Hr - lam * Ha) - b
    q = Y.T @ d
    bd, dd = float(b @ d), float(d @ d)

    def slope(t):  # derivative of the objective along d; continuous and non-decreasing
        return float(np.clip(r + t * q, -tau, tau) @ q) + delta * (bd + t * dd)

    if not slope(0.0) < 0:
        return b, f_b
    hi = 1.0
    while slope(hi) < 0 and hi < 1e30:
        hi *= 2.0
    t = scipy.optimize.brentq(slope, 0.0, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps) if slope(hi) >= 0 else hi
    for _ in range(60):
        cand = b + t * d
        f = _huber(Y, cand, tau, delta)
        if f < f_b:
            return cand, f
        t *= 0.5
    return b, f_b


def _denoised_slice(Y, anchor, chol, cfg: SolverConfig):
    """Minimize ``tau||y||_1 + 1/2||y - Y^T b||^2 + delta/2 ||b||^2`` on ``b^T anchor = 1``.

    Each round alternates the exact ``y`` update (soft thresholding) with the
    exact equality-constrained least-squares ``b`` update (one KKT solve
    against the factored ``Y Y^T + delta I``), then tries an active-set
    Newton step that is kept only when it lowers the objective. The
    alternation alone moves ``b`` by ``O(tau)`` per round and stalls for
    small ``tau``. The trace holds the objective after each round with ``y``
    at its optimum, so it is non-increasing.
    """
    tau, delta = cfg.tau, cfg.delta
    Minv_a = chol.solve(anchor)
    a_Minv_a = float(anchor @ Minv_a)

    b = anchor / float(anchor @ anchor)
    f = _huber(Y, b, tau, delta)
    trace = [f]
    for _ in range(cfg.inner_max_iter):
        y = soft_threshold(Y.T @ b, tau)
        z = chol.solve(Y @ y)
        lam = (float(anchor @ z) - 1.0) / a_Minv_a
        b_alt = z - lam * Minv_a
        f_alt = _huber(Y, b_alt, tau, delta)
        if f_alt <= f:
            b, f = b_alt, f_alt
        b, f = _newton_polish(Y, anchor, b, tau, delta, f)
        trace.append(f)
        if _relative_decrease(trace[-2], trace[-1]) <= cfg.inner_tol:
            break
    return b, soft_threshold(Y.T @ b, tau), trace


def dpcp_r_d(Y, cfg: SolverConfig = SolverConfig(), init=None) -> SolverReport:
    """Relaxed and denoised DPCP: the LP recursion with denoised slice problems."""
    Y = np.asarray(Y, dtype=float)
    D = Y.shape[0]
    T = cfg.iterations(100)
    chol = Cholesky(Y @ Y.T + cfg.delta * np.eye(D))
    n_hat = normalize(init) if init is not None else init_normal(Y)
    trace = [l1_objective(Y, n_hat)]
    inner, iterates = [], [n_hat]
    dJ = np.inf
    k = 0
    while k < T and dJ > cfg.epsilon:
        k += 1
        b, _, inner_trace = _denoised_slice(Y, n_hat, chol, cfg)
        n_hat = normalize(b)
        inner.append(inner_trace)
        iterates.append(n_hat)
        trace.append(l1_objective(Y, n_hat))
        dJ = _relative_decrease(trace[-2], trace[-1])
    return SolverReport(canonical_sign(n_hat), trace, k, dJ <= cfg.epsilon, inner_traces=inner, iterates=iterates)


SOLVERS = {
    "dpcp_r": dpcp_r,
    "dpcp_irls": dpcp_irls,
    "dpcp_d": lambda Y, cfg=SolverConfig(), init=None: dpcp_d(Y, cfg, init)[0],
    "dpcp_r_d": dpcp_r_d,
}


def solve(method: str, Y, cfg: Optional[SolverConfig] = None, init=None) -> SolverReport:
    key = method.replace("-", "_").lower()
    if key not in SOLVERS:
        raise ValueError(f"unknown solver {method!r}; choose from {sorted(SOLVERS)}")
    return SOLVERS[key](Y, cfg if cfg is not None else SolverConfig(), init)
