"""Plain-text CSV formats for point clouds, arrangements, clustering results and solver reports.

Numbers are written with 17 significant digits so that reading a file back
reproduces every double bit for bit.

Point cloud::

    D,N
    <D rows of N values>
    labels,<N integers>          (optional)

Arrangement::

    D,n
    <D rows of n values>         (normals as columns)
    weights,<n integers>

Clustering result::

    labels,<N integers>
    normals,D,n
    <D rows of n values>
    residuals,<N values>
"""

from __future__ import annotations

import contextlib
import io
import sys
from typing import Iterable, TextIO

import numpy as np

from dpcp.arrangement import Arrangement, PointCloud


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def short(x) -> str:
    """Shortest decimal that still reads back to the same double."""
    return repr(float(x))


def _row(values: Iterable) -> str:
    return ",".join(fmt(v) for v in values)


def _ints(values: Iterable) -> str:
    return ",".join(str(int(v)) for v in values)


@contextlib.contextmanager
def open_out(path):
    """Yield a text stream for ``path``; ``None`` or ``-`` means stdout."""
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _lines(src) -> list:
    if isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        text = src.read()
    else:
        with open(src, newline="") as fh:
            text = fh.read()
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _floats(line: str, expect=None) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in line.split(",")], dtype=float)
    except ValueError as exc:
        raise FormatError(f"bad numeric row: {line[:60]!r}") from exc
    if expect is not None and vals.size != expect:
        raise FormatError(f"expected {expect} values, found {vals.size}")
    return vals


def _header(line: str, first: str = None):
    parts = line.split(",")
    if first is not None:
        if parts[0] != first:
            raise FormatError(f"expected a {first!r} line, found {line[:40]!r}")
        parts = parts[1:]
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise FormatError(f"bad header {line!r}") from exc


def _tagged(line: str, tag: str) -> list:
    parts = line.split(",")
    if parts[0] != tag:
        raise FormatError(f"expected a {tag!r} line")
    return parts[1:]


# ---------------------------------------------------------------- point cloud


def write_point_cloud(pc: PointCloud, out: TextIO) -> None:
    out.write(f"{pc.D},{pc.N}\n")
    for row in pc.points:
        out.write(_row(row) + "\n")
    if pc.labels is not None:
        out.write("labels," + _ints(pc.labels) + "\n")


def read_point_cloud(src, normalized: bool = True) -> PointCloud:
    lines = _lines(src)
    if not lines:
        raise FormatError("empty point-cloud file")
    D, N = _header(lines[0])
    if len(lines) < 1 + D:
        raise FormatError(f"expected {D} matrix rows")
    X = np.vstack([_floats(lines[1 + k], N) for k in range(D)]) if D else np.zeros((0, N))
    labels = None
    if len(lines) > 1 + D:
        vals = _tagged(lines[1 + D], "labels")
        if len(vals) != N:
            raise FormatError("label count does not match N")
        labels = np.array([int(v) for v in vals])
    return PointCloud(X, labels, normalized=normalized)


# ---------------------------------------------------------------- arrangement


def write_arrangement(arr: Arrangement, out: TextIO) -> None:
    out.write(f"{arr.D},{arr.n}\n")
    for row in arr.normals:
        out.write(_row(row) + "\n")
    out.write("weights," + _ints(arr.weights) + "\n")


def read_arrangement(src) -> Arrangement:
    lines = _lines(src)
    D, n = _header(lines[0])
    B = np.vstack([_floats(lines[1 + k], n) for k in range(D)])
    weights = [int(v) for v in _tagged(lines[1 + D], "weights")]
    return Arrangement(B, tuple(weights))


# ---------------------------------------------------------------- clustering result


def write_cluster_result(res, out: TextIO) -> None:
    D, n = res.normals.shape
    out.write("labels," + _ints(res.labels) + "\n")
    out.write(f"normals,{D},{n}\n")
    for row in res.normals:
        out.write(_row(row) + "\n")
    out.write("residuals," + _row(res.residuals) + "\n")


def read_cluster_result(src):
    from dpcp.clustering import ClusterResult

    lines = _lines(src)
    labels = np.array([int(v) for v in _tagged(lines[0], "labels")])
    D, n = _header(lines[1], "normals")
    B = np.vstack([_floats(lines[2 + k], n) for k in range(D)])
    res = _floats(",".join(_tagged(lines[2 + D], "residuals")))
    return ClusterResult(labels, B, res, final_objective=float(res.sum()))


def read_labels(src) -> np.ndarray:
    """The first ``labels,...`` line of any of the formats above."""
    for line in _lines(src):
        if line.startswith("labels,"):
            return np.array([int(v) for v in line.split(",")[1:]])
    raise FormatError("no labels line found")


# ---------------------------------------------------------------- solver report


def write_solver_report(rep, out: TextIO) -> None:
    out.write("normal," + _row(rep.normal) + "\n")
    out.write("trace," + _row(rep.objective_trace) + "\n")
    out.write(f"iterations,{rep.iterations}\n")
    out.write(f"converged,{int(bool(rep.converged))}\n")
