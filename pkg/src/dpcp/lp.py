"""Simplex solver for the slice problem ``min ||Y^T b||_1  s.t.  b^T w = 1``.

Standard form: residual splits ``Y^T b = u - v`` with ``u, v >= 0``, free
``b = b+ - b-``, cost ``1^T (u + v)`` and the single normalization row
``w^T b = 1``. The free coordinates of ``b`` never leave the basis once in
it, so the tableau condenses onto a ``D x D`` basis matrix whose rows are
``w`` and the ``D - 1`` data columns with a nonbasic (zero) residual. Every
nonsingular basis of that shape is primal feasible: each remaining residual
is carried by whichever of ``u_j`` / ``v_j`` matches its sign.

Phase 1 therefore reduces to picking ``D - 1`` columns that complete ``w``
to a nonsingular basis (pivoted Gram-Schmidt, or a warm-start basis). Phase 2
runs revised-simplex pivots with Bland's smallest-index rule over the
variable order ``u_1, v_1, u_2, v_2, ...``, first on a slightly perturbed
problem (see :func:`solve_l1_slice`), then on the original. The basis
inverse is updated by Sherman-Morrison and refactored every
``REFRESH_EVERY`` pivots.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from dpcp.numerics import NORM_TOL

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
ORTHO_TOL = 1e-8
FEAS_TOL = 1e-10
REFRESH_EVERY = 100
_PRICE_TOL = 1e-11
_RATIO_TOL = 1e-12
_ZERO_TOL = 1e-12
PERTURB_SCALE = 1e-9


class LPError(RuntimeError):
    pass


class RankDeficientError(LPError, ValueError):
    pass


@dataclass(frozen=True)
class L1SliceProblem:
    data: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        Y = np.atleast_2d(np.asarray(self.data, dtype=float))
        w = np.asarray(self.anchor, dtype=float)
        object.__setattr__(self, "data", Y)
        object.__setattr__(self, "anchor", w)
        if w.shape != (Y.shape[0],):
            raise ValueError("anchor dimension does not match the data")
        if abs(np.linalg.norm(w) - 1.0) > NORM_TOL:
            raise ValueError("anchor must have unit norm")
        if not np.all(np.isfinite(Y)):
            raise ValueError("data has non-finite entries")
        smin = np.linalg.svd(Y, compute_uv=False)[-1] if Y.shape[1] >= Y.shape[0] else 0.0
        if smin <= RANK_TOL:
            raise RankDeficientError(f"data is not of full rank {Y.shape[0]} (smallest singular value {smin:.3g})")


@dataclass(frozen=True)
class VertexCertificate:
    """``D - 1`` data columns that the slice solution is orthogonal to."""

    active_indices: tuple
    independence_ok: bool

    @classmethod
    def build(cls, Y, b, active) -> "VertexCertificate":
        active = tuple(int(j) for j in active)
        return cls(active, _independent(Y[:, list(active)]))

    def check(self, Y, b) -> bool:
        """True when the cited columns are independent and orthogonal to ``b``."""
        D = Y.shape[0]
        if len(self.active_indices) != D - 1 or len(set(self.active_indices)) != D - 1:
            return False
        Ya = Y[:, list(self.active_indices)]
        bn = np.asarray(b) / np.linalg.norm(b)
        scale = np.maximum(np.linalg.norm(Ya, axis=0), 1.0)
        ortho = np.all(np.abs(Ya.T @ bn) <= ORTHO_TOL * scale)
        return bool(ortho and _independent(Ya) and self.independence_ok)


def _independent(Ya) -> bool:
    if Ya.shape[1] == 0:
        return True
    return bool(np.linalg.svd(Ya, compute_uv=False)[-1] > RANK_TOL)


def _initial_basis(Y, w) -> list:
    """Complete ``w`` with ``D - 1`` columns of ``Y`` into a nonsingular basis.

    Columns nearly orthogonal to ``w`` are tried first (they are the likely
    zero residuals near the anchor); a column is accepted when at least
    ``1e-3`` of its norm survives projection onto the span already chosen.
    Falls back to pivoted Gram-Schmidt when that greedy pass comes up short.
    """
    D, N = Y.shape
    nrm = np.linalg.norm(Y, axis=0)
    usable = np.flatnonzero(nrm > 0)
    score = np.abs(w @ Y[:, usable]) / nrm[usable]
    order = usable[np.argsort(score, kind="stable")]
    Q = [w]
    chosen = []
    for j in order:
        y = Y[:, j]
        for q in Q:
            y = y - (q @ y) * q
        for q in Q:
            y = y - (q @ y) * q
        ny = np.linalg.norm(y)
        if ny > 1e-3 * nrm[j]:
            Q.append(y / ny)
            chosen.append(int(j))
            if len(chosen) == D - 1:
                return chosen
    return _gram_schmidt_basis(Y, w)


def _gram_schmidt_basis(Y, w) -> list:
    D, N = Y.shape
    nrm = np.linalg.norm(Y, axis=0)
    usable = nrm > 0
    R = Y - np.outer(w, w @ Y)
    R = R - np.outer(w, w @ R)
    chosen = []
    for _ in range(1, D):
        rel = np.zeros(N)
        rel[usable] = np.linalg.norm(R[:, usable], axis=0) / nrm[usable]
        if chosen:
            rel[chosen] = -1.0
        j = int(np.argmax(rel))  # first index wins ties
        if rel[j] <= 1e-9:
            raise RankDeficientError("cannot complete the anchor to a nonsingular basis")
        q = R[:, j] / np.linalg.norm(R[:, j])
        R = R - np.outer(q, q @ R)
        chosen.append(j)
    return chosen


def _basis_ok(Y, w, active) -> bool:
    if len(active) != Y.shape[0] - 1 or len(set(active)) != len(active):
        return False
    A = np.vstack([w, Y[:, list(active)].T])
    s = np.linalg.svd(A, compute_uv=False)
    return bool(s[-1] > 1e-8 * s[0])


def _perturbation(N: int) -> np.ndarray:
    """Fixed generic residual targets ``+-[0.5, 1] * PERTURB_SCALE`` (deterministic in ``N``)."""
    g = np.random.Generator(np.random.Philox(0x5EED))
    return PERTURB_SCALE * g.uniform(0.5, 1.0, N) * g.choice([-1.0, 1.0], N)


def _simplex(Y, Yh, nrm, live, w, active, target, sign_hint, cap):
    """Phase-2 pivots from the basis ``active`` for ``min sum_j nrm_j |yh_j^T b - target_j|``.

    ``sign_hint`` (or ``None``) fixes the sign of residuals that are zero
    up to round-off. Returns ``(active, sign, pivots)``.
    """
    N = Y.shape[1]
    A = np.vstack([w, Yh[:, active].T])
    Ainv = np.linalg.inv(A)
    rhs = np.concatenate([[1.0], target[active]])
    b = Ainv @ rhs
    r = Yh.T @ b - target
    sign = np.where(r >= 0, 1.0, -1.0)
    if sign_hint is not None:
        zero = np.abs(r) <= _ZERO_TOL
        sign[zero] = np.where(sign_hint[zero] != 0, sign_hint[zero], sign[zero])
    sign[~live] = 0.0
    in_active = np.zeros(N, dtype=bool)
    in_active[active] = True
    sign[in_active] = 0.0

    pivots = 0
    since_refresh = 0
    while True:
        # multipliers of the active rows; moving row pos by one unit of
        # y_hat^T b changes the cost by nrm_j (own residual) + pi_pos (the rest)
        g = Y @ sign
        pi = Ainv.T @ g
        act = np.asarray(active)
        rel = pi[1:] / nrm[act]
        cand_u = 1.0 + rel < -_PRICE_TOL
        cand_v = 1.0 - rel < -_PRICE_TOL
        if not (cand_u.any() or cand_v.any()):
            return active, sign, pivots
        var_idx = np.where(cand_u, 2 * act, np.where(cand_v, 2 * act + 1, np.iinfo(np.int64).max))
        pos = int(np.argmin(var_idx))
        direction = 1.0 if cand_u[pos] else -1.0
        entering = active[pos]

        d = direction * Ainv[:, pos + 1]
        q = Yh.T @ d
        piv_tol = _RATIO_TOL * np.linalg.norm(d)
        # ratio test over basic residuals; the entering one moves off zero
        block_u = (sign > 0) & (q < -piv_tol)
        block_v = (sign < 0) & (q > piv_tol)
        blocking = np.flatnonzero(block_u | block_v)
        if blocking.size == 0:
            raise LPError("slice LP reported unbounded; data should have full rank")
        ratios = np.maximum(sign[blocking] * r[blocking], 0.0) / np.abs(q[blocking])
        tmin = ratios.min()
        tied = blocking[ratios <= tmin + _RATIO_TOL * max(1.0, tmin)]
        tied_vars = 2 * tied + (sign[tied] < 0)
        leaving = int(tied[np.argmin(tied_vars)])

        # pivot: leaving column joins the active set in the entering slot
        active[pos] = leaving
        in_active[leaving] = True
        in_active[entering] = False
        sign[entering] = direction
        sign[leaving] = 0.0
        since_refresh += 1
        row = pos + 1
        u = Yh[:, leaving] - A[row]
        A[row] = Yh[:, leaving]
        rhs[row] = target[leaving]
        col = Ainv[:, row]
        denom = 1.0 + u @ col
        if since_refresh >= REFRESH_EVERY or abs(denom) < 1e-10:
            Ainv = np.linalg.inv(A)
            since_refresh = 0
        else:
            Ainv = Ainv - np.outer(col, u @ Ainv) / denom
        b = Ainv @ rhs
        r = Yh.T @ b - target
        r[in_active] = 0.0
        pivots += 1
        if pivots > cap:
            raise LPError(f"simplex exceeded the pivot cap of {cap}")


def solve_l1_slice(p: L1SliceProblem, warm_start: Optional[Sequence[int]] = None, max_pivots: Optional[int] = None):
    """Globally minimize ``||Y^T b||_1`` over the slice ``b^T w = 1``.

    Returns ``(b, objective, certificate)``. ``warm_start`` may supply a
    previous active set; it is used when it forms a nonsingular basis.

    Data lying exactly on hyperplanes make the optimal vertex massively
    degenerate, and round-off in the zero residuals can defeat Bland's
    anti-cycling guarantee. The pivots therefore run on a perturbed problem
    whose residual targets are tiny generic constants instead of zero. Its
    optimal basis prices out on the original problem as well (pricing does
    not involve the targets); a final unperturbed pass confirms this and
    takes over if round-off says otherwise.
    """
    Y, w = p.data, p.anchor
    D, N = Y.shape
    cap = max_pivots if max_pivots is not None else 50 * (N + D)
    if D == 1:
        b = np.array([1.0 / w[0]])
        return b, float(np.abs(Y.T @ b).sum()), VertexCertificate((), True)

    nrm = np.linalg.norm(Y, axis=0)
    live = nrm > 0
    # basis rows use unit columns: y_j^T b = 0 is scale free, and tiny
    # (heavily down-weighted) columns would otherwise wreck the conditioning
    Yh = Y / np.where(live, nrm, 1.0)

    if warm_start is not None and _basis_ok(Yh, w, list(warm_start)):
        active = [int(j) for j in warm_start]
    else:
        active = _initial_basis(Y, w)

    eps = np.where(live, _perturbation(N), 0.0)
    active, sign, n1 = _simplex(Y, Yh, nrm, live, w, active, eps, None, cap)
    active, _, n2 = _simplex(Y, Yh, nrm, live, w, active, np.zeros(N), sign, cap)

    # final clean-up: exact solve against the final basis
    A = np.vstack([w, Yh[:, active].T])
    b = np.linalg.solve(A, np.eye(D)[:, 0])
    obj = float(np.abs(Y.T @ b).sum())
    logger.debug("slice LP solved in %d + %d pivots, objective %.6g", n1, n2, obj)
    return b, obj, VertexCertificate.build(Y, b, active)


def enumerate_vertices(Y, w):
    """Brute-force oracle: best slice point orthogonal to some ``D - 1`` columns.

    Returns ``(b, objective)``; used only to cross-check the simplex.
    """
    Y = np.asarray(Y, dtype=float)
    D, N = Y.shape
    best, best_b = np.inf, None
    for subset in itertools.combinations(range(N), D - 1):
        M = Y[:, subset]
        U, s, _ = np.linalg.svd(M, full_matrices=True)
        if s.size and s[-1] <= RANK_TOL:
            continue
        h = U[:, -1]
        hw = h @ w
        if abs(hw) < 1e-12:
            continue
        b = h / hw
        val = float(np.abs(Y.T @ b).sum())
        if val < best:
            best, best_b = val, b
    return best_b, best
