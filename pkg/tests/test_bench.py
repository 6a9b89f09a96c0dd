import io
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dpcp import bench


def test_accuracy_examples():
    t = np.array([1, 1, 2, 2, 0, 1])
    assert bench.accuracy(t, t, 2) == 1.0
    swapped = np.where(t == 1, 2, np.where(t == 2, 1, 0))
    assert bench.accuracy(swapped, t, 2) == 1.0
    t = np.array([1, 1, 2, 2])
    assert bench.accuracy(np.array([1, 2, 2, 1]), t, 2) == 0.5


def _brute(pred, true, n):
    keep = true > 0
    best = 0.0
    for perm in itertools.permutations(range(1, n + 1)):
        mapped = np.array([perm[p - 1] if 1 <= p <= n else -1 for p in pred[keep]])
        best = max(best, float(np.mean(mapped == true[keep])))
    return best


labels = arrays(np.int64, 25, elements=st.integers(0, 3))


@given(labels, labels, st.permutations([1, 2, 3]))
def test_accuracy_properties(pred, true, perm):
    pred = np.where(pred == 0, 1, pred)
    if not (true > 0).any():
        return
    a = bench.accuracy(pred, true, 3)
    assert 0.0 <= a <= 1.0
    assert a == pytest.approx(_brute(pred, true, 3))
    relabel = np.array([0] + list(perm))
    assert bench.accuracy(relabel[pred], true, 3) == pytest.approx(a)
    assert bench.accuracy(true, true, 3) == 1.0


def test_accuracy_length_mismatch():
    with pytest.raises(ValueError):
        bench.accuracy([1, 2], [1], 2)


def test_single_trial_svd_noiseless():
    g = bench.GridConfig((4,), (1,), (1.0,), (0.0,), trials=1, methods=("svd",), noise_sigma=0.0)
    res = bench.run_grid(g)
    assert res.rows[0].acc_mean == 1.0 and not res.failures


def _csv(res, timing=False):
    buf = io.StringIO()
    bench.write_grid_csv(res, buf)
    long = io.StringIO()
    bench.write_long_csv(res, long, timing)
    return buf.getvalue(), long.getvalue()


def test_grid_deterministic_and_parallel_identical():
    g = bench.GridConfig((4,), (2,), (0.8,), (0.1,), trials=3, methods=("dpcp_irls", "ransac"),
                         ransac_trials=50, timing=False)
    a, b = bench.run_grid(g), bench.run_grid(g)
    assert a.rows == b.rows
    p = bench.run_grid(g, jobs=2)
    assert _csv(a) == _csv(p)
    header = _csv(a)[0].splitlines()[0]
    assert header == "D,n,alpha,outlier_ratio,method,pipeline,trials,acc_mean,acc_std,runtime_mean_s"


def test_failed_trial_scored_zero():
    # with one point per plane and fast decay the smallest cluster is empty; the grid must go on
    g = bench.GridConfig((4,), (3,), (0.1,), (0.0,), trials=2, methods=("svd",), points_per_plane=1)
    res = bench.run_grid(g)
    assert res.rows[0].acc_mean == 0.0 and len(res.failures) == 2
    assert all(t.error for t in res.failures)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        bench.GridConfig(D_values=())
    with pytest.raises(ValueError):
        bench.GridConfig(trials=0)
    with pytest.raises(ValueError):
        bench.GridConfig(methods=("nope",))
    with pytest.raises(ValueError):
        bench.GridConfig(alpha_values=(1.5,))
