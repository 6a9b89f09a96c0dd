"""Global-optimality conditions for hyperplane recovery and numerical checks of them.

Continuous problem: ``J(b) = sum_i N_i c sin(theta_i)`` where ``theta_i`` is
the principal angle between ``b`` and the normal ``b_i`` and ``c`` is the
mean of ``|x_1|`` over the unit sphere of a hyperplane.

* :func:`continuous_conditions` gives alpha, beta, gamma and the two verdicts.
* :func:`discrete_conditions` gives the finite-sample versions, with the
  uniformity errors ``eps_i`` and the circumradius ``R``.
* :func:`lp_conditions` gives the conditions under which the LP recursion
  started at ``n0`` converges to ``+-b_1``.

``eps_i`` is a maximum of a non-convex function over the sphere; it is
estimated from below by probing (:func:`uniformity_epsilon`), so verdicts
built on an estimated ``eps`` are optimistic. :func:`sphere_grid_argmin` is
a brute-force oracle that the phase-transition checks compare against.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.integrate
import scipy.special

from dpcp.arrangement import Arrangement, equiangular_arrangement, make_rng
from dpcp.numerics import max_eigval, normalize, normalize_columns, principal_angle, project_to_hyperplane
from dpcp.solvers import SolverConfig, dpcp_r, init_normal

C_AGREEMENT = 1e-10
ENUM_LIMIT = 10**6
GRID_RESOLUTION = 200_000
REFINE_CANDIDATES = 10
REFINE_STEPS = 30
CIRCLE_RESOLUTION = 20_000  # ~0.018 deg spacing on a great circle


# ---------------------------------------------------------------- constants


def _c_closed_form(D: int) -> float:
    return math.exp(scipy.special.gammaln((D - 1) / 2) - scipy.special.gammaln(D / 2)) / math.sqrt(math.pi)


def average_height_quadrature(D: int) -> float:
    """Mean of ``|x_1|`` over the unit sphere of R^(D-1), by one-dimensional quadrature.

    With ``x_1 = cos(phi)`` the surface measure is proportional to
    ``sin(phi)^(D-3)``; the integrals are split at ``pi/2`` where ``|cos|`` kinks.
    """
    if D < 2:
        raise ValueError("D must be at least 2")
    if D == 2:
        return 1.0  # the sphere is {-1, +1}
    p = D - 3
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    num = 2 * scipy.integrate.quad(lambda t: math.cos(t) * math.sin(t) ** p, 0.0, math.pi / 2, **opts)[0]
    den = 2 * scipy.integrate.quad(lambda t: math.sin(t) ** p, 0.0, math.pi / 2, **opts)[0]
    return num / den


@functools.lru_cache(maxsize=None)
def average_height(D: int) -> float:
    """The hemisphere constant ``c`` for ambient dimension ``D``.

    ``c = Gamma((D-1)/2) / (sqrt(pi) Gamma(D/2))``, checked against quadrature.
    """
    if D < 2:
        raise ValueError("D must be at least 2")
    c = _c_closed_form(D)
    q = average_height_quadrature(D)
    if abs(c - q) > C_AGREEMENT:
        raise ArithmeticError(f"closed form {c!r} and quadrature {q!r} disagree for D={D}")
    return c


# ---------------------------------------------------------------- continuous problem


def continuous_objective(arr: Arrangement, b) -> float:
    b = normalize(np.asarray(b, dtype=float))
    if b.shape != (arr.D,):
        raise ValueError("b has the wrong dimension")
    return float(continuous_objective_batch(arr, b[None, :])[0])


def continuous_objective_batch(arr: Arrangement, B):
    """``J`` at each row of ``B`` (shape ``M x D``, unit rows)."""
    B = np.asarray(B, dtype=float)
    # sin(theta_i) as the norm of the component orthogonal to b_i: exact near theta_i = 0
    sin = np.column_stack([np.linalg.norm(B - np.outer(B @ bi, bi), axis=1) for bi in arr.normals.T])
    return average_height(arr.D) * (np.minimum(sin, 1.0) @ np.asarray(arr.weights, dtype=float))


@dataclass(frozen=True)
class ContinuousConditions:
    alpha: float
    beta: float
    gamma: float
    dominance_holds: bool
    uniqueness_holds: bool
    sqrt2_bound: float

    @property
    def dominance_threshold(self) -> float:
        return math.hypot(self.alpha, self.beta)


def _alpha_beta(N, Th):
    """alpha and beta from weights ``N`` and the angle matrix ``Th`` (index 0 is H_1)."""
    rest = N[1:]
    S1 = float(np.dot(rest, np.sin(Th[0, 1:])))
    M = np.outer(rest, rest) * np.cos(Th[1:, 1:])
    under = float(np.sum(rest**2)) - max_eigval(M)
    alpha = S1 - math.sqrt(max(under, 0.0))
    off = M.copy()
    np.fill_diagonal(off, 0.0)
    beta = math.sqrt(max(float(np.sum(rest**2)) + 2.0 * float(off.sum()), 0.0))
    return alpha, beta


def _gamma(N, Th):
    S = np.sin(Th)
    n = len(N)
    others = [float(np.dot(N, S[k])) for k in range(1, n)]  # S[k,k] = 0 drops i = k
    return min(others) - float(np.dot(N[1:], S[0, 1:]))


def continuous_conditions(arr: Arrangement) -> ContinuousConditions:
    if arr.n < 2:
        raise ValueError("conditions need at least two hyperplanes")
    N = np.asarray(arr.weights, dtype=float)
    Th = arr.angles()
    alpha, beta = _alpha_beta(N, Th)
    gamma = _gamma(N, Th)
    return ContinuousConditions(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        dominance_holds=bool(N[0] > math.hypot(alpha, beta)),
        uniqueness_holds=bool(gamma > 0),
        sqrt2_bound=math.sqrt(2.0) * float(N[1:].sum()),
    )


# ---------------------------------------------------------------- uniformity epsilon


def _eps_values(Xi, normal, c, B):
    """``||chi_b - c h_b_hat||`` for each column ``b`` of ``B``."""
    Nn = Xi.shape[1]
    S = np.sign(B.T @ Xi)  # P x N
    chi = (Xi @ S.T) / Nn  # D x P
    H = B - np.outer(normal, normal @ B)
    hn = np.linalg.norm(H, axis=0)
    Hh = np.divide(H, hn, out=np.zeros_like(H), where=hn > 0)
    return np.linalg.norm(chi - c * Hh, axis=0)


@dataclass(frozen=True)
class EpsilonEstimate:
    value: float
    argmax: np.ndarray
    estimator: str = "probe-lower-bound"


def uniformity_epsilon(Xi, c: Optional[float] = None, num_probes: int = 2000, rng=None, normal=None,
                       extra_probes=None, ascent_steps: int = 20, ascent_starts: int = 5,
                       details: bool = False):
    """Lower-bound estimate of ``eps = max_b ||chi_b - c h_b_hat||`` for one cluster.

    ``chi_b`` is the sign-weighted mean of the cluster's points and ``h_b_hat``
    the normalized projection of ``b`` onto the cluster's hyperplane (normal
    taken from the data when not supplied). The maximum over random probes is
    refined by ``ascent_steps`` projected finite-difference ascent steps from
    the best ``ascent_starts`` probes; every evaluated ``b`` is an exact value
    of the objective, so the result never exceeds the true maximum.
    """
    Xi = np.asarray(Xi, dtype=float)
    D, Nn = Xi.shape
    if Nn == 0:
        raise ValueError("empty cluster")
    c = average_height(D) if c is None else float(c)
    if normal is None:
        normal = init_normal(Xi)
    normal = normalize(np.asarray(normal, dtype=float))
    rng = rng if rng is not None else make_rng(0)
    probes = [normalize_columns(rng.standard_normal((D, max(1, num_probes))))]
    if extra_probes is not None:
        probes.append(normalize_columns(np.asarray(extra_probes, dtype=float).reshape(D, -1)))
    B = np.hstack(probes)
    vals = _eps_values(Xi, normal, c, B)
    best = int(np.argmax(vals))
    best_val, best_b = float(vals[best]), B[:, best]

    starts = np.argsort(-vals, kind="stable")[:ascent_starts]
    for s in starts:
        b, f = B[:, s].copy(), float(vals[s])
        h = 0.05
        for _ in range(ascent_steps):
            T = project_to_hyperplane(np.eye(D), b)  # tangent directions (columns)
            plus = normalize_columns(b[:, None] + h * T)
            minus = normalize_columns(b[:, None] - h * T)
            grad = T @ ((_eps_values(Xi, normal, c, plus) - _eps_values(Xi, normal, c, minus)) / (2 * h))
            gn = float(np.linalg.norm(grad))
            if gn == 0.0:
                h *= 0.5
                continue
            cand = normalize(b + h * grad / gn)
            fc = float(_eps_values(Xi, normal, c, cand[:, None])[0])
            if fc > f:
                b, f = cand, fc
            else:
                h *= 0.5
        if f > best_val:
            best_val, best_b = f, b
    est = EpsilonEstimate(best_val, best_b)
    return est if details else est.value


# ---------------------------------------------------------------- circumradius


def zonotope_radius_exact(Y, subset=None) -> float:
    """Farthest vertex ``max_s ||sum_j s_j y_j||`` of the zonotope of the given columns."""
    Y = np.asarray(Y, dtype=float)
    V = Y if subset is None else Y[:, list(subset)]
    K = V.shape[1]
    if K == 0:
        return 0.0
    signs = _sign_patterns(K)
    return float(np.linalg.norm(V @ signs.T, axis=0).max())


@functools.lru_cache(maxsize=None)
def _sign_patterns_cached(K: int):
    pats = [(1,) + s for s in itertools.product((1, -1), repeat=K - 1)]
    return np.array(pats, dtype=float)


def _sign_patterns(K: int) -> np.ndarray:
    return _sign_patterns_cached(K)


def cluster_radius(Y, K: int, limit: int = ENUM_LIMIT):
    """``(R_{Y,K}, exact)``: the largest zonotope circumradius over ``K``-subsets.

    Exact when ``C(N,K) 2^(K-1) <= limit``; otherwise the Gram upper bound
    ``sqrt(sum of the K largest squared norms + K(K-1) max |<y_j,y_l>|)``,
    capped by the sum of the K largest norms.
    """
    Y = np.asarray(Y, dtype=float)
    N = Y.shape[1]
    if K < 0 or K > N:
        raise ValueError(f"K={K} is outside [0, {N}]")
    if K == 0:
        return 0.0, True
    G = Y.T @ Y
    if K == 1:
        return float(math.sqrt(max(np.diag(G).max(), 0.0))), True
    if math.comb(N, K) * 2 ** (K - 1) <= limit:
        signs = _sign_patterns(K)  # P x K
        best = 0.0
        combos = itertools.combinations(range(N), K)
        while True:
            chunk = np.array(list(itertools.islice(combos, 20000)), dtype=np.intp)
            if chunk.size == 0:
                break
            sub = G[chunk[:, :, None], chunk[:, None, :]]  # M x K x K
            # ||sum s_j y_j||^2 = s^T G_sub s for every pattern s
            q = np.einsum("pk,mkl,pl->mp", signs, sub, signs, optimize=True)
            best = max(best, float(q.max()))
        return math.sqrt(max(best, 0.0)), True
    sq = np.sort(np.diag(G))[::-1][:K]
    off = np.abs(G - np.diag(np.diag(G))).max()
    bound = math.sqrt(float(sq.sum()) + K * (K - 1) * float(off))
    return min(bound, float(np.sqrt(sq).sum())), False


@dataclass(frozen=True)
class Circumradius:
    value: float
    exact: bool
    partition: tuple


def circumradius_details(clusters: Sequence, limit: int = ENUM_LIMIT) -> Circumradius:
    """Maximize ``sum_i R_{X_i,K_i}`` over ``K_1 + ... + K_n = D - 1``, ``0 <= K_i <= D - 2``.

    Each cluster's table ``K -> R_{X_i,K}`` is computed once; the maximum over
    compositions is taken by exact dynamic programming over the clusters.
    """
    clusters = [np.asarray(X, dtype=float) for X in clusters]
    if not clusters:
        raise ValueError("need at least one cluster")
    D = clusters[0].shape[0]
    target = D - 1
    caps = [min(D - 2, X.shape[1]) for X in clusters]
    if target > sum(caps):
        raise ValueError(f"no admissible split of D-1={target} over clusters with caps {caps}")
    tables = []
    for X, cap in zip(clusters, caps):
        tables.append([cluster_radius(X, K, limit) for K in range(cap + 1)])
    # best[s] = (value, exact, partition) over the clusters seen so far
    best = {0: (0.0, True, ())}
    for table in tables:
        nxt = {}
        for s, (v, ex, part) in best.items():
            for K, (r, rex) in enumerate(table):
                t = s + K
                if t > target:
                    break
                cand = (v + r, ex and rex, part + (K,))
                if t not in nxt or cand[0] > nxt[t][0]:
                    nxt[t] = cand
        best = nxt
    v, ex, part = best[target]
    return Circumradius(float(v), bool(ex), part)


def circumradius_R(clusters: Sequence, limit: int = ENUM_LIMIT) -> float:
    return circumradius_details(clusters, limit).value


# ---------------------------------------------------------------- discrete conditions


@dataclass(frozen=True)
class DiscreteConditions:
    c: float
    epsilons: tuple
    R: float
    alpha_bar: float
    beta_bar: float
    gamma_bar: float
    precondition_ok: bool
    dominance_holds: bool
    uniqueness_holds: bool
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    optimistic: bool = False  # eps came from the probe lower bound
    R_exact: bool = True


def _check_clusters(arr: Arrangement, clusters):
    if clusters is None:
        return None
    if len(clusters) != arr.n:
        raise ValueError(f"{len(clusters)} clusters for {arr.n} hyperplanes")
    for i, X in enumerate(clusters):
        if np.asarray(X).shape[1] != arr.weights[i]:
            raise ValueError(f"cluster {i + 1} has {np.asarray(X).shape[1]} points but weight {arr.weights[i]}")
    return [np.asarray(X, dtype=float) for X in clusters]


def _discrete_inputs(arr, clusters, epsilons, R, probes, rng):
    clusters = _check_clusters(arr, clusters)
    c = average_height(arr.D)
    optimistic = False
    R_exact = True
    if epsilons is None:
        if clusters is None:
            raise ValueError("either clusters or epsilons must be given")
        rng = rng if rng is not None else make_rng(0)
        epsilons = [uniformity_epsilon(X, c, probes, rng, normal=arr.normals[:, i]) for i, X in enumerate(clusters)]
        optimistic = True
    eps = np.asarray(epsilons, dtype=float)
    if eps.shape != (arr.n,) or np.any(eps < 0):
        raise ValueError("need one non-negative epsilon per hyperplane")
    if R is None:
        if clusters is None:
            raise ValueError("either clusters or R must be given")
        info = circumradius_details(clusters)
        R, R_exact = info.value, info.exact
    return c, eps, float(R), optimistic, R_exact


def discrete_conditions(arr: Arrangement, clusters=None, probes: int = 2000, rng=None,
                        epsilons=None, R=None) -> DiscreteConditions:
    """Finite-sample conditions for the non-convex problem to return ``+-b_1``.

    ``epsilons`` and ``R`` may be supplied directly; otherwise they are
    estimated from ``clusters`` (ordered like the arrangement's normals).
    """
    if arr.n < 2:
        raise ValueError("conditions need at least two hyperplanes")
    c, eps, R, optimistic, R_exact = _discrete_inputs(arr, clusters, epsilons, R, probes, rng)
    cont = continuous_conditions(arr)
    N = np.asarray(arr.weights, dtype=float)
    eN = eps * N
    alpha_bar = cont.alpha + (eN[0] + 2.0 * eN[1:].sum()) / c
    beta_bar = cont.beta + (R + eN.sum()) / c
    gamma_bar = cont.gamma - (eN[0] + eN[1] + 2.0 * eN[2:].sum()) / c
    return DiscreteConditions(
        c=c,
        epsilons=tuple(float(e) for e in eps),
        R=R,
        alpha_bar=float(alpha_bar),
        beta_bar=float(beta_bar),
        gamma_bar=float(gamma_bar),
        precondition_ok=bool(c > math.sqrt(2.0) * eps[0]),
        dominance_holds=bool(N[0] > math.hypot(alpha_bar, beta_bar)),
        uniqueness_holds=bool(gamma_bar > 0),
        alpha=cont.alpha,
        beta=cont.beta,
        gamma=cont.gamma,
        optimistic=optimistic,
        R_exact=R_exact,
    )


@dataclass(frozen=True)
class LPConditions:
    theta_10: float
    theta_min_1: float
    mu: float
    nu: float
    rho: float
    tau_coeff: float
    angle_ok: bool
    N1_threshold: float
    holds: bool
    precondition_ok: bool = True
    optimistic: bool = False


def lp_conditions(arr: Arrangement, clusters=None, n0=None, probes: int = 2000, rng=None,
                  epsilons=None, R=None) -> LPConditions:
    """Conditions for the LP recursion started at ``n0`` to reach ``+-b_1`` in finitely many steps.

    A ``j`` whose denominator in ``mu`` is not positive makes ``mu`` infinite;
    a non-positive ``tau_coeff`` makes the threshold infinite. Both give a
    false verdict.
    """
    if arr.n < 2:
        raise ValueError("conditions need at least two hyperplanes")
    if n0 is None:
        raise ValueError("an initial estimate n0 is required")
    n0 = normalize(np.asarray(n0, dtype=float))
    c, eps, R, optimistic, _ = _discrete_inputs(arr, clusters, epsilons, R, probes, rng)
    cont = continuous_conditions(arr)
    alpha, beta = cont.alpha, cont.beta
    N = np.asarray(arr.weights, dtype=float)
    n = arr.n
    Th = arr.angles()
    S = np.sin(Th)
    th0 = np.array([principal_angle(arr.normals[:, i], n0) for i in range(n)])
    s0 = np.sin(th0)
    e = eps / c  # c^{-1} eps_i
    theta_min = float(Th[0, 1:].min())

    inner = 1.0 - e[0] ** 2
    angle_ok = bool(inner >= 0 and s0[0] < min(math.sin(theta_min) - 2 * eps[0], math.sqrt(max(inner, 0.0)) - 2 * e[0]))

    mu = -math.inf
    for j in range(1, n):
        others = [i for i in range(1, n) if i != j]
        num = float(np.dot(N[1:], s0[1:])) + e[j] * N[j] + sum(N[i] * (2 * e[i] - S[i, j]) for i in others)
        den = S[0, j] - s0[0] - 2 * e[0]
        mu = max(mu, num / den if den > 0 else math.inf)

    sum_eN = float(np.dot(e[1:], N[1:]))
    a_term = alpha + 2 * sum_eN
    b_term = beta + R / c + sum_eN
    nu = 2 * e[0] * b_term + 2 * (s0[0] + 2 * e[0]) * a_term
    rho = a_term**2 + b_term**2
    tau = math.cos(th0[0]) ** 2 - 4 * e[0] * s0[0] - 5 * e[0] ** 2
    if tau > 0:
        threshold = max(mu, (nu + math.sqrt(nu**2 + 4 * rho * tau)) / (2 * tau))
    else:
        threshold = math.inf
    pre = bool(c > math.sqrt(5.0) * eps[0])
    return LPConditions(
        theta_10=float(th0[0]),
        theta_min_1=theta_min,
        mu=float(mu),
        nu=float(nu),
        rho=float(rho),
        tau_coeff=float(tau),
        angle_ok=angle_ok,
        N1_threshold=float(threshold),
        holds=bool(pre and angle_ok and N[0] > threshold),
        precondition_ok=pre,
        optimistic=optimistic,
    )


# ---------------------------------------------------------------- grid oracle


def sphere_lattice(D: int, resolution: int) -> np.ndarray:
    """Deterministic quasi-uniform points on S^(D-1), one per row (D in {2, 3})."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if D == 2:
        t = 2 * np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(t), np.sin(t)])
    if D == 3:
        k = np.arange(resolution) + 0.5
        z = 1.0 - 2.0 * k / resolution
        r = np.sqrt(np.maximum(0.0, 1.0 - z**2))
        phi = k * math.pi * (3.0 - math.sqrt(5.0))  # golden angle
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError("the exhaustive lattice supports D = 2 or 3; pass a basis for a subspace")


def _lattice_spacing(D: int, resolution: int) -> float:
    return 2 * math.pi / resolution if D == 2 else math.sqrt(4 * math.pi / resolution)


def sphere_grid_argmin(f: Callable, D: int = 3, resolution: int = GRID_RESOLUTION, basis=None,
                       refine: int = REFINE_CANDIDATES, steps: int = REFINE_STEPS):
    """Minimize ``f`` over the unit sphere by lattice search plus local refinement.

    ``f`` maps an ``M x D`` array of unit rows to ``M`` values. With ``basis``
    (``D x k``, orthonormal columns, ``k`` in {2, 3}) the search runs on the
    unit sphere of that subspace. The best ``refine`` lattice points are
    polished by ``steps`` rounds of compass search on the sphere (halving the
    step when no neighbour improves). Returns ``(b, value)``; ties keep the
    lower lattice index.
    """
    if basis is not None:
        U = np.asarray(basis, dtype=float)
        k = U.shape[1]

        def g(P):
            return f(P @ U.T)

        u, val = sphere_grid_argmin(g, k, resolution, None, refine, steps)
        return normalize(U @ u), val

    P = sphere_lattice(D, resolution)
    vals = np.asarray(f(P), dtype=float)
    order = np.argsort(vals, kind="stable")[:refine]
    h0 = _lattice_spacing(D, resolution)
    best_b, best_v = P[order[0]], float(vals[order[0]])
    for idx in order:
        b, v, h = P[idx].copy(), float(vals[idx]), h0
        for _ in range(steps):
            T = project_to_hyperplane(np.eye(D), b)
            T = T[:, np.linalg.norm(T, axis=0) > 1e-8]
            moves = np.hstack([T, -T])
            cand = normalize_columns(b[:, None] + h * moves).T
            cv = np.asarray(f(cand), dtype=float)
            j = int(np.argmin(cv))
            if cv[j] < v:
                b, v = cand[j], float(cv[j])
            else:
                h *= 0.5
        if v < best_v:
            best_b, best_v = b, v
    return normalize(best_b), best_v


def angle_to_lines(b, U) -> np.ndarray:
    """Principal angles (degrees) between ``b`` and each column of ``U``."""
    U = normalize_columns(np.asarray(U, dtype=float))
    return np.degrees(np.arccos(np.clip(np.abs(U.T @ normalize(b)), 0.0, 1.0)))


# ---------------------------------------------------------------- theorem checks


@dataclass
class TheoremCheck:
    theorem: str
    case: str
    parameters: dict
    quantities: dict
    verdict: bool
    angle_gap_deg: float
    notes: list = field(default_factory=list)


def check_equiangular(a: float, resolution: int = GRID_RESOLUTION, weight: int = 1) -> TheoremCheck:
    """Equal-weight equiangular triple in R^3: the argmin sits at a normal when
    the common angle exceeds 60 degrees, at the centre direction when below,
    and both values tie exactly at 60 degrees (``a = 1/3``)."""
    arr = equiangular_arrangement(a, weight)
    center = np.ones(3) / math.sqrt(3.0)
    b, val = sphere_grid_argmin(lambda P: continuous_objective_batch(arr, P), 3, resolution)
    J_normal = continuous_objective(arr, arr.normals[:, 0])
    J_center = continuous_objective(arr, center)
    gap_normals = float(angle_to_lines(b, arr.normals).min())
    gap_center = float(angle_to_lines(b, center[:, None])[0])
    theta = math.degrees(math.acos(min(1.0, float(abs(arr.normals[:, 0] @ arr.normals[:, 1])))))
    q = dict(theta_deg=theta, J_argmin=val, J_normal=J_normal, J_center=J_center,
             gap_normals_deg=gap_normals, gap_center_deg=gap_center)
    if abs(a - 1.0 / 3.0) <= 1e-12:
        verdict = abs(J_normal - J_center) <= 1e-9
        gap = min(gap_normals, gap_center)
    elif a < 1.0 / 3.0:
        verdict, gap = gap_normals <= 1.0, gap_normals
    else:
        verdict, gap = gap_center <= 1.0, gap_center
    return TheoremCheck("equiangular", "equiangular", {"a": a, "resolution": resolution}, q, bool(verdict), gap)


def _plane_pair(rng, D: int, theta: float):
    Q, _ = np.linalg.qr(rng.standard_normal((D, 2)))
    u, v = Q[:, 0], Q[:, 1]
    return u, math.cos(theta) * u + math.sin(theta) * v, Q


def check_two_planes(trials: int = 50, N1: int = 500, N2: int = 300, D: int = 3, seed: int = 0,
                     resolution: int = CIRCLE_RESOLUTION, tol_deg: float = 0.5) -> TheoremCheck:
    """Two hyperplanes with ``N1 > N2``: the argmin is ``+-b_1``; with ``N1 = N2`` it is one of the normals.

    Each trial draws a random pair with angle in [5, 85] degrees and searches
    the unit circle of ``span(b_1, b_2)``.
    """
    worst = 0.0
    ok = True
    for t in range(trials):
        rng = make_rng(seed, t)
        theta = math.radians(rng.uniform(5.0, 85.0))
        b1, b2, Q = _plane_pair(rng, D, theta)
        arr = Arrangement(np.column_stack([b1, b2]), (N1, N2))
        b, _ = sphere_grid_argmin(lambda P: continuous_objective_batch(arr, P), D, resolution, basis=Q)
        gaps = angle_to_lines(b, arr.normals)
        gap = float(gaps[0]) if N1 > N2 else float(gaps.min())
        worst = max(worst, gap)
        ok = ok and gap <= tol_deg
    return TheoremCheck("two-planes", "two-planes", {"trials": trials, "N1": N1, "N2": N2, "D": D, "seed": seed},
                        {"worst_gap_deg": worst}, ok, worst)


def check_orthogonal(weights=(5, 3, 2), resolution: int = GRID_RESOLUTION, tol_deg: float = 1.0) -> TheoremCheck:
    """Orthogonal arrangement in R^3: the argmin is a normal of maximal weight."""
    w = tuple(int(x) for x in weights)
    D = len(w)
    arr = Arrangement(np.eye(D), w)
    b, val = sphere_grid_argmin(lambda P: continuous_objective_batch(arr, P), D, resolution)
    heavy = [i for i in range(D) if w[i] == w[0]]
    gap = float(angle_to_lines(b, arr.normals[:, heavy]).min())
    return TheoremCheck("orthogonal", "orthogonal", {"weights": w}, {"J_argmin": val}, gap <= tol_deg, gap)


def check_continuous(arr: Arrangement, resolution: int = GRID_RESOLUTION, tol_deg: float = 1.0) -> TheoremCheck:
    """If alpha/beta/gamma certify ``+-b_1``, the grid argmin must land there (D = 3)."""
    cc = continuous_conditions(arr)
    b, val = sphere_grid_argmin(lambda P: continuous_objective_batch(arr, P), arr.D, resolution)
    gap = float(angle_to_lines(b, arr.normals[:, :1])[0])
    certified = cc.dominance_holds and cc.uniqueness_holds
    verdict = (not certified) or gap <= tol_deg
    q = dict(alpha=cc.alpha, beta=cc.beta, gamma=cc.gamma, dominance=cc.dominance_holds,
             uniqueness=cc.uniqueness_holds, J_argmin=val)
    return TheoremCheck("continuous", "general", {"weights": arr.weights}, q, bool(verdict), gap)


def check_dominance(n: int, N1: int, N2: int) -> TheoremCheck:
    """Orthogonal arrangement with ``N_2 = ... = N_n``: compare the computed
    dominance threshold with ``(n - 1) N_2`` and check the sqrt(2) bound."""
    if n < 2:
        raise ValueError("need n >= 2")
    weights = (N1,) + (N2,) * (n - 1)
    cc = continuous_conditions(Arrangement(np.eye(n), weights))
    expected = (n - 1) * N2
    thr = cc.dominance_threshold
    q = dict(alpha=cc.alpha, beta=cc.beta, threshold=thr, expected=expected, sqrt2_bound=cc.sqrt2_bound,
             sqrt2_ok=thr <= cc.sqrt2_bound + 1e-9)
    verdict = abs(thr - expected) <= 1e-9 and thr <= cc.sqrt2_bound + 1e-9
    return TheoremCheck("dominance", "orthogonal-equal", {"n": n, "N1": N1, "N2": N2}, q, bool(verdict), math.nan)


def _discrete_argmin(X, init=None):
    """Global minimizer of ``||X^T b||_1`` on the sphere: lattice search for
    D <= 3, otherwise the LP recursion (a local answer)."""
    D = X.shape[0]
    if D <= 3 and init is None:
        b, _ = sphere_grid_argmin(lambda P: np.abs(P @ X).sum(axis=1), D, GRID_RESOLUTION)
        return b, "grid"
    return dpcp_r(X, SolverConfig(), init=init).normal, "dpcp_r"


def check_discrete(arr: Arrangement, clusters, probes: int = 2000, rng=None, tol_deg: float = 1.0) -> TheoremCheck:
    """If the finite-sample conditions certify ``+-b_1``, the minimizer must land there."""
    dc = discrete_conditions(arr, clusters, probes, rng)
    b, how = _discrete_argmin(np.hstack(clusters))
    gap = float(angle_to_lines(b, arr.normals[:, :1])[0])
    certified = dc.precondition_ok and dc.dominance_holds and dc.uniqueness_holds
    q = dict(c=dc.c, R=dc.R, R_exact=dc.R_exact, eps_max=max(dc.epsilons), alpha_bar=dc.alpha_bar,
             beta_bar=dc.beta_bar, gamma_bar=dc.gamma_bar, certified=certified, optimistic=dc.optimistic,
             oracle=how)
    return TheoremCheck("discrete", "discrete", {"D": arr.D, "weights": arr.weights}, q,
                        bool((not certified) or gap <= tol_deg), gap)


def check_lp(arr: Arrangement, clusters, n0, probes: int = 2000, rng=None, tol_deg: float = 1e-3) -> TheoremCheck:
    """If the LP conditions hold for ``n0``, the recursion started there must reach ``+-b_1``."""
    lc = lp_conditions(arr, clusters, n0, probes, rng)
    rep = dpcp_r(np.hstack(clusters), SolverConfig(), init=n0)
    gap = float(angle_to_lines(rep.normal, arr.normals[:, :1])[0])
    q = dict(theta_10_deg=math.degrees(lc.theta_10), mu=lc.mu, nu=lc.nu, rho=lc.rho, tau=lc.tau_coeff,
             angle_ok=lc.angle_ok, N1_threshold=lc.N1_threshold, holds=lc.holds, optimistic=lc.optimistic,
             iterations=rep.iterations)
    return TheoremCheck("lp", "lp", {"D": arr.D, "weights": arr.weights}, q,
                        bool((not lc.holds) or gap <= tol_deg), gap)
