"""Synthetic clustering experiments: accuracy metric, trial runner and aggregation.

Every trial draws its data from ``make_rng(master_seed, D, n, alpha_key,
ratio_key, trial)``, so results do not depend on execution order or on how
trials are spread over worker processes. All methods in a cell see the same
data; the estimator's own randomness (RANSAC sampling, IHL restarts) gets a
separate stream keyed by the method.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import numpy as np

from dpcp.arrangement import SynthConfig, make_rng, random_arrangement, synthesize
from dpcp.clustering import ESTIMATORS, NormalEstimator, canonical_method, ihl_restarts, shl
from dpcp.formats import short as fmt
from dpcp.solvers import SolverConfig

logger = logging.getLogger(__name__)

PIPELINES = ("shl", "ihl")
CSV_COLUMNS = ("D", "n", "alpha", "outlier_ratio", "method", "pipeline", "trials",
               "acc_mean", "acc_std", "runtime_mean_s")
LONG_COLUMNS = ("D", "n", "alpha", "outlier_ratio", "method", "pipeline", "trial",
                "accuracy", "runtime_s", "error")
MAX_PERMUTATION_N = 8


def accuracy(pred, true, n: int) -> float:
    """Best fraction of inliers labelled correctly over all relabelings of ``1..n``.

    Ground-truth label 0 marks an outlier; those points are skipped. With no
    inliers the score is 1.0 (nothing to get wrong).
    """
    pred = np.asarray(pred, dtype=int)
    true = np.asarray(true, dtype=int)
    if pred.shape != true.shape:
        raise ValueError("label arrays differ in length")
    if n > MAX_PERMUTATION_N:
        raise ValueError(f"exact permutation search supports n <= {MAX_PERMUTATION_N}")
    keep = true > 0
    m = int(keep.sum())
    if m == 0:
        return 1.0
    p, t = pred[keep], true[keep]
    C = np.zeros((n + 1, n + 1), dtype=np.int64)  # row 0 / col 0 collect out-of-range labels
    np.add.at(C, (np.where((p >= 1) & (p <= n), p, 0), np.where(t <= n, t, 0)), 1)
    best = 0
    rows = np.arange(1, n + 1)
    for perm in itertools.permutations(range(1, n + 1)):
        best = max(best, int(C[rows, perm].sum()))
    return best / m


def _key(x: float) -> int:
    # grid parameters enter the seed as integers (parts per million)
    return int(round(x * 1_000_000))


@dataclass(frozen=True)
class GridConfig:
    D_values: tuple = (4, 9, 30)
    n_values: tuple = (2, 3, 4)
    alpha_values: tuple = (1.0, 0.8, 0.6)
    outlier_ratios: tuple = (0.1, 0.3, 0.5)
    trials: int = 10
    methods: tuple = ("dpcp_r", "dpcp_irls", "ransac")
    pipeline: str = "shl"
    master_seed: int = 0
    noise_sigma: float = 0.01
    points_per_plane: int = 300
    solver: SolverConfig = field(default_factory=SolverConfig)
    ransac_trials: int = 1000
    ransac_thresh: float = 0.03
    restarts: int = 10  # IHL only
    timing: bool = True

    def __post_init__(self):
        for name in ("D_values", "n_values", "alpha_values", "outlier_ratios", "methods"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "methods", tuple(canonical_method(m) for m in self.methods))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {PIPELINES}")
        if self.restarts < 1 or self.points_per_plane < 1:
            raise ValueError("restarts and points_per_plane must be positive")
        # let the synthesis and estimator configs validate the remaining ranges
        for D, n, a, r in self.cells():
            SynthConfig(D, n, None, a, self.noise_sigma, r)
        self.estimator(self.methods[0])

    def cells(self):
        return list(itertools.product(self.D_values, self.n_values, self.alpha_values, self.outlier_ratios))

    def estimator(self, method: str) -> NormalEstimator:
        return NormalEstimator(method, self.solver, self.ransac_trials, self.ransac_thresh)


@dataclass(frozen=True)
class TrialResult:
    cell: tuple
    method: str
    trial: int
    accuracy: float
    runtime_s: float
    error: str = ""


@dataclass(frozen=True)
class GridRow:
    D: int
    n: int
    alpha: float
    outlier_ratio: float
    method: str
    pipeline: str
    trials: int
    acc_mean: float
    acc_std: float
    runtime_mean_s: float


@dataclass
class GridResult:
    rows: list
    trials: list  # TrialResult, in grid order

    @property
    def failures(self) -> list:
        return [t for t in self.trials if t.error]

    def row(self, D, n, alpha, outlier_ratio, method) -> GridRow:
        method = canonical_method(method)
        for r in self.rows:
            if (r.D, r.n, r.alpha, r.outlier_ratio, r.method) == (D, n, alpha, outlier_ratio, method):
                return r
        raise KeyError((D, n, alpha, outlier_ratio, method))


def trial_data(g: GridConfig, cell, trial: int):
    D, n, a, r = cell
    rng = make_rng(g.master_seed, D, n, _key(a), _key(r), trial)
    arr = random_arrangement(D, n, rng)
    cfg = SynthConfig(D, n, g.points_per_plane * n, a, g.noise_sigma, r)
    return arr, synthesize(arr, cfg, rng)


def run_trial(g: GridConfig, cell, method: str, trial: int) -> TrialResult:
    """One pipeline run on one synthetic instance; failures become accuracy 0."""
    D, n, a, r = cell
    t0 = time.perf_counter()
    try:
        _, pc = trial_data(g, cell, trial)
        est = g.estimator(method)
        method_key = 1 + ESTIMATORS.index(est.method)
        t0 = time.perf_counter()
        if g.pipeline == "shl":
            res = shl(pc.points, n, est, make_rng(g.master_seed, D, n, _key(a), _key(r), trial, method_key))
        else:
            seed = int(make_rng(g.master_seed, D, n, _key(a), _key(r), trial, method_key).integers(2**63))
            res = ihl_restarts(pc.points, n, est, g.restarts, seed=seed)
        elapsed = time.perf_counter() - t0
        return TrialResult(cell, method, trial, accuracy(res.labels, pc.labels, n), elapsed)
    except Exception as exc:  # a failed trial must not abort the grid
        tag = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        logger.warning("trial failed D=%d n=%d alpha=%g ratio=%g %s #%d: %s", D, n, a, r, method, trial, tag)
        return TrialResult(cell, method, trial, 0.0, time.perf_counter() - t0, tag)


def _run_task(args):
    return run_trial(*args)


def run_grid(g: GridConfig, jobs: int = 1) -> GridResult:
    """Run every cell x method x trial and aggregate per (cell, method).

    ``jobs > 1`` spreads trials over worker processes. Aggregation is keyed,
    so the result is the same for any ``jobs``.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    tasks = [(g, cell, m, t) for cell in g.cells() for m in g.methods for t in range(g.trials)]
    if jobs == 1:
        outcomes = [_run_task(a) for a in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=1))
    by_key = {(o.cell, o.method, o.trial): o for o in outcomes}
    ordered, rows = [], []
    for cell in g.cells():
        for m in g.methods:
            ts = [by_key[(cell, m, t)] for t in range(g.trials)]
            ordered.extend(ts)
            acc = np.array([t.accuracy for t in ts])
            rt = np.array([t.runtime_s for t in ts])
            rows.append(GridRow(*cell, m, g.pipeline, g.trials, float(acc.mean()), float(acc.std()),
                                float(rt.mean()) if g.timing else math.nan))
    return GridResult(rows, ordered)


def write_grid_csv(result: GridResult, out) -> None:
    out.write(",".join(CSV_COLUMNS) + "\n")
    for r in result.rows:
        out.write(f"{r.D},{r.n},{fmt(r.alpha)},{fmt(r.outlier_ratio)},{r.method},{r.pipeline},"
                  f"{r.trials},{fmt(r.acc_mean)},{fmt(r.acc_std)},{fmt(r.runtime_mean_s)}\n")


def write_long_csv(result: GridResult, out, timing: bool = True) -> None:
    """Per-trial rows, one observation per line, for plotting tools."""
    out.write(",".join(LONG_COLUMNS) + "\n")
    pipeline = result.rows[0].pipeline if result.rows else ""
    for t in result.trials:
        D, n, a, r = t.cell
        rt = fmt(t.runtime_s) if timing else "nan"
        out.write(f"{D},{n},{fmt(a)},{fmt(r)},{t.method},{pipeline},{t.trial},{fmt(t.accuracy)},{rt},{t.error}\n")
