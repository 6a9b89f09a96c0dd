"""Dense linear-algebra and scalar kernels shared by the rest of the package.

Eigen-solves go through LAPACK (``numpy.linalg.eigh``: Householder
tridiagonalization followed by implicit QL/QR), Cholesky through
``scipy.linalg``. Matrices are plain ``float64`` ndarrays; a point set is a
``D x N`` array with one point per column.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.optimize

NORM_TOL = 1e-12
SYMMETRY_TOL = 1e-9
SOLVE_RTOL = 1e-8


class NotSymmetricError(ValueError):
    pass


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


def normalize(v):
    """Return ``v / ||v||``, or the zero vector when ``v == 0``."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return np.zeros_like(v)
    # vectors already unit up to rounding are returned as-is (exact idempotence)
    if abs(nrm - 1.0) <= 8 * np.finfo(float).eps:
        return v.copy()
    return v / nrm


def normalize_columns(X):
    X = np.asarray(X, dtype=float)
    nrm = np.linalg.norm(X, axis=0)
    nrm[nrm == 0.0] = 1.0
    return X / nrm


def principal_angle(u, v) -> float:
    """Angle in ``[0, pi/2]`` between the lines spanned by unit vectors ``u`` and ``v``.

    ``2 atan2(|u - s v|, |u + s v|)`` with ``s = sign(u^T v)`` stays accurate
    for nearly parallel lines, where ``arccos`` loses half the digits.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = -1.0 if float(np.dot(u, v)) < 0 else 1.0
    return float(2.0 * np.arctan2(np.linalg.norm(u - s * v), np.linalg.norm(u + s * v)))


def project_to_hyperplane(x, b):
    """Orthogonal projection of ``x`` (vector or ``D x N`` matrix) onto ``b``-perp."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if x.ndim == 1:
        out = x - np.dot(b, x) * b
        # one correction sweep removes the cancellation residue along b
        return out - np.dot(b, out) * b
    out = x - np.outer(b, b @ x)
    return out - np.outer(b, b @ out)


def canonical_sign(v):
    """Flip ``v`` so its first nonzero entry is positive."""
    v = np.asarray(v, dtype=float)
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _check_symmetric(S):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    return 0.5 * (S + S.T)


def smallest_eigvec(S):
    """Unit eigenvector of the smallest eigenvalue of symmetric ``S``.

    Returns ``(vector, eigenvalue)``; the vector's first nonzero entry is positive.
    """
    S = _check_symmetric(S)
    w, V = np.linalg.eigh(S)
    return canonical_sign(V[:, 0]), float(w[0])


def max_eigval(S) -> float:
    S = _check_symmetric(S)
    return float(np.linalg.eigvalsh(S)[-1])


def soft_threshold(v, tau: float):
    if not tau > 0:
        raise ValueError(f"threshold must be positive, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def sphere_least_squares(A, g):
    """Global minimizer of ``1/2 b^T A b - g^T b`` over the unit sphere, ``A`` symmetric.

    Uses the eigenbasis of ``A``: the solution is ``(A - lam I)^{-1} g`` with
    ``lam <= lambda_min`` fixed by the secular equation ``||b|| = 1``, which
    is solved by bracketed root finding. The degenerate case (``g`` without a
    component on the bottom eigenspace) fills the norm along that eigenspace.
    """
    A = _check_symmetric(A)
    lam, V = np.linalg.eigh(A)
    gt = V.T @ np.asarray(g, dtype=float)
    scale = max(1.0, float(np.abs(lam).max()), float(np.linalg.norm(gt)))
    bottom = np.abs(lam - lam[0]) <= 1e-12 * scale
    gnorm = float(np.linalg.norm(gt))
    if gnorm == 0.0:
        return canonical_sign(V[:, 0])
    rest = ~bottom
    if np.linalg.norm(gt[bottom]) <= 1e-14 * gnorm:
        # hard case candidate: check whether lam = lambda_min already overshoots
        c = np.zeros_like(gt)
        c[rest] = gt[rest] / (lam[rest] - lam[0])
        cn = float(np.linalg.norm(c))
        if cn <= 1.0:
            c[np.flatnonzero(bottom)[0]] = np.sqrt(max(0.0, 1.0 - cn**2))
            return V @ c

    def excess(shift):  # ||b(lam0 - shift)|| - 1 for shift > 0, decreasing in shift
        return float(np.linalg.norm(gt / (lam - lam[0] + shift))) - 1.0

    hi = gnorm + 1.0
    lo = hi
    while excess(lo) < 0 and lo > 1e-300:
        lo *= 0.5
    shift = scipy.optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return normalize(V @ (gt / (lam - lam[0] + shift)))


class Cholesky:
    """Lower Cholesky factor ``L L^T = A``, reusable across right-hand sides."""

    def __init__(self, A):
        A = _check_symmetric(A)
        try:
            self.L = scipy.linalg.cholesky(A, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(f"non-positive pivot: {exc}") from None
        if np.any(np.diag(self.L) <= 0):
            raise NotPositiveDefiniteError("non-positive pivot in Cholesky factor")

    def solve(self, rhs):
        return scipy.linalg.cho_solve((self.L, True), np.asarray(rhs, dtype=float))


def solve_spd(A, rhs):
    """Solve ``A x = rhs`` for SPD ``A``; ``A`` may also be a :class:`Cholesky`."""
    fac = A if isinstance(A, Cholesky) else Cholesky(A)
    return fac.solve(rhs)
