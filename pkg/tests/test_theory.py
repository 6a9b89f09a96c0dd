import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpcp import theory as th
from dpcp.arrangement import Arrangement, equiangular_arrangement, make_rng, random_arrangement, sample_arrangement
from dpcp.numerics import normalize


def _mc_height(D, n=400_000):
    g = make_rng(99, D).standard_normal((n, D - 1))
    return float(np.mean(np.abs(g[:, 0]) / np.linalg.norm(g, axis=1)))


def test_average_height_values():
    assert th.average_height(2) == 1.0
    assert th.average_height(3) == pytest.approx(2 / math.pi, abs=1e-15)
    assert th.average_height(4) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("D", range(2, 11))
def test_average_height_quadrature_and_monte_carlo(D):
    c = th.average_height(D)
    assert abs(c - th.average_height_quadrature(D)) <= 1e-10
    if D > 2:
        assert c == pytest.approx(_mc_height(D), abs=4e-3)


def test_continuous_objective_examples():
    arr = random_arrangement(4, 3, make_rng(0), (5, 3, 2))
    c = th.average_height(4)
    expected = c * sum(arr.weights[i] * math.sin(arr.angles()[0, i]) for i in (1, 2))
    assert th.continuous_objective(arr, arr.normals[:, 0]) == pytest.approx(expected, rel=1e-14)
    orth = Arrangement(np.eye(3)[:, :2], (7, 7))
    b = normalize(np.array([1.0, 1.0, 0.0]))
    assert th.continuous_objective(orth, b) == pytest.approx(2 * 7 * (2 / math.pi) * math.sin(math.pi / 4))
    eq = equiangular_arrangement(1 / 3)
    center = np.ones(3) / math.sqrt(3)
    angle = math.acos(float(eq.normals[:, 0] @ center))
    assert th.continuous_objective(eq, center) == pytest.approx(3 * (2 / math.pi) * math.sin(angle), rel=1e-14)


def test_continuous_objective_symmetries(rng):
    arr = random_arrangement(5, 3, rng, (4, 2, 1))
    b = normalize(rng.standard_normal(5))
    J = th.continuous_objective(arr, b)
    assert th.continuous_objective(arr, -b) == pytest.approx(J, rel=1e-14)
    flipped = Arrangement(arr.normals * np.array([1, -1, -1]), arr.weights)
    assert th.continuous_objective(flipped, b) == pytest.approx(J, rel=1e-14)
    for i in range(3):  # the i-th term vanishes at b_i
        others = [k for k in range(3) if k != i]
        direct = th.average_height(5) * sum(arr.weights[k] * math.sin(arr.angles()[i, k]) for k in others)
        assert th.continuous_objective(arr, arr.normals[:, i]) == pytest.approx(direct, rel=1e-13)


def test_conditions_two_planes_hand_formula(rng):
    arr = random_arrangement(4, 2, rng, (9, 4))
    cc = th.continuous_conditions(arr)
    theta = arr.angles()[0, 1]
    assert cc.alpha == pytest.approx(4 * math.sin(theta), abs=1e-12)
    assert cc.beta == pytest.approx(4.0, abs=1e-12)
    assert cc.gamma == pytest.approx(9 * math.sin(theta) - 4 * math.sin(theta), abs=1e-12)


@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(3, 10))
def test_sqrt2_bound(seed, n, D):
    rng = make_rng(seed)
    w = tuple(sorted(rng.integers(1, 50, n).tolist(), reverse=True))
    cc = th.continuous_conditions(random_arrangement(D, n, rng, w))
    assert cc.dominance_threshold <= math.sqrt(2) * sum(w[1:]) * (1 + 1e-12)


def test_uniformity_epsilon_convergence():
    rng = make_rng(1)
    arr = Arrangement(np.eye(3)[:, 2:], (1,))
    for N, bound in ((1_000, 0.15), (10_000, 0.05)):
        X = sample_arrangement(Arrangement(arr.normals, (N,)), rng).points
        assert th.uniformity_epsilon(X, rng=make_rng(2), normal=arr.normals[:, 0]) <= bound


def test_uniformity_epsilon_identical_points():
    x = normalize(np.array([1.0, 2.0, 0.0]))
    X = np.tile(x[:, None], (1, 5))
    eps = th.uniformity_epsilon(X, normal=np.array([0.0, 0.0, 1.0]))
    assert eps >= 1 - th.average_height(3)


def test_uniformity_epsilon_pair_hand_value():
    # two points; at probe b the sign-mean and projected probe are written out by hand
    X = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    n = np.array([0.0, 0.0, 1.0])
    b = normalize(np.array([1.0, 0.5, 0.3]))
    chi = (np.sign(b[0]) * X[:, 0] + np.sign(b[1]) * X[:, 1]) / 2
    h = normalize(np.array([b[0], b[1], 0.0]))
    hand = float(np.linalg.norm(chi - (2 / math.pi) * h))
    assert th.uniformity_epsilon(X, num_probes=10, normal=n, extra_probes=b) >= hand - 1e-15


def test_circumradius_colinear_and_bound(rng):
    x = normalize(rng.standard_normal(5))
    for K in (1, 2, 3, 4):
        Y = np.tile(x[:, None], (1, K)) * rng.choice([-1.0, 1.0], K)
        assert th.zonotope_radius_exact(Y) == pytest.approx(K, abs=1e-12)
    clusters = [normalize_cols(rng.standard_normal((5, 8))) for _ in range(3)]
    assert th.circumradius_R(clusters) <= 5 - 1 + 1e-12


def normalize_cols(X):
    return X / np.linalg.norm(X, axis=0)


def test_circumradius_exact_dominates_sampling():
    for seed in range(10):
        rng = make_rng(seed)
        K = int(rng.integers(1, 5))
        Y = normalize_cols(rng.standard_normal((4, K)))
        exact = th.zonotope_radius_exact(Y)
        a = rng.uniform(-1, 1, (K, 20_000))
        sampled = np.linalg.norm(Y @ a, axis=0).max()
        assert sampled <= exact + 1e-12
        assert exact - sampled <= 0.1 * exact


def test_cluster_radius_bound_mode_is_upper_bound(rng):
    Y = normalize_cols(rng.standard_normal((4, 12)))
    exact, ex = th.cluster_radius(Y, 3)
    bound, bx = th.cluster_radius(Y, 3, limit=1)
    assert ex and not bx and bound >= exact


def test_discrete_limit_equals_continuous(rng):
    arr = random_arrangement(5, 3, rng, (30, 20, 10))
    dc = th.discrete_conditions(arr, epsilons=[0.0, 0.0, 0.0], R=0.0)
    cc = th.continuous_conditions(arr)
    assert (dc.alpha_bar, dc.beta_bar, dc.gamma_bar) == (cc.alpha, cc.beta, cc.gamma)


def test_discrete_perturbation_direction(rng):
    arr = random_arrangement(5, 3, rng, (30, 20, 10))
    cc = th.continuous_conditions(arr)
    for eps, R in (([0.01, 0.0, 0.0], 0.0), ([0.0, 0.0, 0.0], 0.5), ([0.02, 0.01, 0.03], 1.0)):
        dc = th.discrete_conditions(arr, epsilons=eps, R=R)
        assert dc.beta_bar > cc.beta
        if any(eps):
            assert dc.alpha_bar > cc.alpha and dc.gamma_bar < cc.gamma


def test_discrete_hand_instance():
    # n = 2, D = 3, orthogonal normals, chosen eps and R
    arr = Arrangement(np.eye(3)[:, :2], (10, 4))
    c = 2 / math.pi
    dc = th.discrete_conditions(arr, epsilons=[0.05, 0.1], R=1.5)
    a = 4.0 + (0.05 * 10 + 2 * 0.1 * 4) / c
    b = 4.0 + (1.5 + 0.05 * 10 + 0.1 * 4) / c
    g = (10.0 - 4.0) - (0.05 * 10 + 0.1 * 4) / c
    assert dc.alpha_bar == pytest.approx(a) and dc.beta_bar == pytest.approx(b) and dc.gamma_bar == pytest.approx(g)
    assert dc.dominance_holds == (10 > math.hypot(a, b))
    assert dc.uniqueness_holds == (g > 0)


def test_lp_conditions_limit_and_boundaries():
    theta = math.radians(50)
    b2 = np.array([math.cos(theta), math.sin(theta), 0.0])
    arr = Arrangement(np.column_stack([np.eye(3)[0], b2]), (20, 5))
    lc = th.lp_conditions(arr, n0=np.eye(3)[0], epsilons=[0, 0], R=0)
    assert lc.tau_coeff == 1.0
    # mu for n = 2: (N2 sin theta_20) / sin theta_12 with theta_20 = theta_12
    assert lc.mu == pytest.approx(5.0)
    rho = (5 * math.sin(theta)) ** 2 + 25
    assert lc.N1_threshold == pytest.approx(max(5.0, math.sqrt(rho)))
    assert lc.holds == (20 > lc.N1_threshold)
    bad = th.lp_conditions(arr, n0=np.eye(3)[0], epsilons=[th.average_height(3) / math.sqrt(5), 0], R=0)
    assert not bad.precondition_ok and not bad.holds
    far = th.lp_conditions(arr, n0=normalize(np.array([math.cos(1.0), math.sin(1.0), 0.0])), epsilons=[0, 0], R=0)
    assert not far.angle_ok and not far.holds


def test_grid_argmin_finds_fixed_direction():
    u = normalize(np.array([0.3, -0.2, 0.9]))
    b, _ = th.sphere_grid_argmin(lambda P: np.arccos(np.clip(np.abs(P @ u), 0, 1)), 3, 20_000)
    assert min(np.linalg.norm(b - u), np.linalg.norm(b + u)) <= math.sqrt(4 * math.pi / 20_000)


def test_uniqueness_implies_grid_argmin_at_b1():
    hits = 0
    for seed in range(15):
        rng = make_rng(seed)
        w = tuple(sorted(rng.integers(1, 20, 3).tolist(), reverse=True))
        arr = random_arrangement(3, 3, rng, w)
        chk = th.check_continuous(arr, resolution=50_000)
        assert chk.verdict
        hits += chk.quantities["dominance"] and chk.quantities["uniqueness"]
    assert hits >= 1  # the implication was exercised at least once


def test_equiangular_cases():
    assert th.check_equiangular(0.2).verdict
    assert th.check_equiangular(0.6).verdict
    tie = th.check_equiangular(1 / 3)
    assert abs(tie.quantities["J_normal"] - tie.quantities["J_center"]) <= 1e-9
