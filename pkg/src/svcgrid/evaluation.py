"""Precision, class-distribution tables and labeling benchmarks."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .data import DataMatrix
from .kernels import build_kernel_matrix
from .labeling import ClusterAssignment, label_grid, label_knn_adjacency, label_mst_adjacency
from .optimize import BallProblem, solve_dual
from .projection import project

__all__ = [
    "ClusterPrecision",
    "PrecisionReport",
    "ClassDistributionTable",
    "BenchResult",
    "precision",
    "class_distribution",
    "bench_labeling",
    "bench_summary",
    "bench_csv",
    "format_table",
    "METHODS",
]

METHODS = ("grid", "knn_adj", "mst_adj")


def _labels_tags(assignment, tags):
    labels = np.asarray(assignment.class_points if isinstance(assignment, ClusterAssignment) else assignment)
    if tags is None:
        raise ValueError("class tags are required")
    tags = np.asarray(tags, dtype=int)
    if tags.shape != labels.shape:
        raise ValueError(f"{len(tags)} tags for {len(labels)} points")
    return labels, tags


@dataclass(frozen=True)
class ClusterPrecision:
    cluster: int
    size: int
    majority_class: int
    majority_fraction: float


@dataclass(frozen=True)
class PrecisionReport:
    """Majority-class purity of a labeling.

    ``overall_precision`` is the summed majority counts over all N points,
    so unclassified points count against it.
    """

    clusters: tuple[ClusterPrecision, ...]
    overall_precision: float
    unclassified: int
    misclassified: int
    n: int

    def to_text(self) -> str:
        rows = [[c.cluster, c.size, c.majority_class, f"{c.majority_fraction:.3f}"] for c in self.clusters]
        body = format_table(["cluster", "size", "majority", "fraction"], rows)
        return (f"{body}\nprecision {self.overall_precision:.4f}  unclassified {self.unclassified}"
                f"  misclassified {self.misclassified}  n {self.n}\n")


def precision(assignment, tags) -> PrecisionReport:
    """Per-cluster majority class and overall precision.

    Clusters are listed by size, largest first (ties by id).  Every point
    needs a class tag >= 1.
    """
    labels, tags = _labels_tags(assignment, tags)
    if np.any(tags < 1):
        raise ValueError("every point needs a class tag >= 1")
    rows = []
    hits = mis = 0
    for cid in sorted(set(labels.tolist()) - {0}):
        member = tags[labels == cid]
        counts = np.bincount(member)
        maj = int(np.argmax(counts))
        rows.append(ClusterPrecision(int(cid), len(member), maj, counts[maj] / len(member)))
        hits += int(counts[maj])
        mis += len(member) - int(counts[maj])
    rows.sort(key=lambda r: (-r.size, r.cluster))
    n = len(labels)
    return PrecisionReport(tuple(rows), hits / n, int(np.sum(labels == 0)), mis, n)


@dataclass(frozen=True)
class ClassDistributionTable:
    """Fraction of each class within each cluster, plus the whole-data baseline."""

    classes: tuple[int, ...]
    clusters: tuple[int, ...]
    fractions: np.ndarray
    sizes: tuple[int, ...]
    baseline: np.ndarray
    total: int

    def to_rows(self):
        head = ["cluster"] + [f"C{c}" for c in self.classes] + ["#"]
        rows = [[str(cid)] + [f"{v:.2f}" for v in fr] + [str(s)]
                for cid, fr, s in zip(self.clusters, self.fractions, self.sizes)]
        rows.append(["all"] + [f"{v:.2f}" for v in self.baseline] + [str(self.total)])
        return head, rows

    def to_text(self) -> str:
        return format_table(*self.to_rows()) + "\n"

    def to_csv(self) -> str:
        head, rows = self.to_rows()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(head)
        w.writerows(rows)
        return buf.getvalue()


def class_distribution(assignment, tags) -> ClassDistributionTable:
    """Class fractions per cluster (ids ascending, unclustered 0 last when present)."""
    labels, tags = _labels_tags(assignment, tags)
    classes = tuple(int(c) for c in np.unique(tags))
    ids = sorted(set(labels.tolist()) - {0})
    if np.any(labels == 0):
        ids.append(0)
    frac = np.zeros((len(ids), len(classes)))
    sizes = []
    for r, cid in enumerate(ids):
        member = tags[labels == cid]
        sizes.append(len(member))
        for c, cls in enumerate(classes):
            frac[r, c] = np.mean(member == cls)
    base = np.array([np.mean(tags == cls) for cls in classes])
    return ClassDistributionTable(classes, tuple(ids), frac, tuple(sizes), base, len(labels))


def format_table(head, rows) -> str:
    """Right-aligned plain-text table."""
    cells = [list(map(str, head))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(head))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


# -- benchmark ----------------------------------------------------------------


@dataclass(frozen=True)
class BenchResult:
    """One timed configuration; ``wall_times`` holds each repeat in seconds."""

    method: str
    n: int
    g: int
    op_count: int
    n_clusters: int
    wall_times: tuple[float, ...] = field(default=())

    @property
    def wall_time(self) -> float:
        return float(np.median(self.wall_times))


def _timed(fn, repeats):
    fn()  # warm-up
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(max(time.perf_counter() - t0, 1e-9))
    return out, tuple(times)


def bench_labeling(data: DataMatrix, *, nu: float = 0.7, q: float = 1200.0, kernel: str = "gaussian",
                   k: int = 1, adj_k: int = 3, m: int = 20, methods=METHODS, n_ladder=None,
                   g_ladder=(13,), repeats: int = 5, seed: int = 42, cx: int = 0, cy: int = 0):
    """Time the labelers over data sizes and grid sizes.

    For each N in ``n_ladder`` a seeded subsample of ``data`` is projected
    and fitted once; the grid labeler is then timed at every G in
    ``g_ladder`` and the adjacency labelers once (their ``g`` is reported
    as 0).  Each timing is one warm-up call followed by ``repeats`` timed
    calls.
    """
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    bad = set(methods) - set(METHODS)
    if bad:
        raise ValueError(f"unknown methods {sorted(bad)}")
    n_ladder = tuple(n_ladder) if n_ladder else (data.rows,)
    rng = np.random.default_rng(seed)
    results = []
    for n in n_ladder:
        if not 1 <= n <= data.rows:
            raise ValueError(f"N={n} outside 1..{data.rows}")
        idx = np.sort(rng.choice(data.rows, size=n, replace=False)) if n < data.rows else np.arange(n)
        proj = project(data.take(idx), cx, cy)
        Z = proj.coords
        model = solve_dual(BallProblem(build_kernel_matrix(Z, kernel, q), nu), "quadratic", seed, train=Z)
        for method in methods:
            if method == "grid":
                for g in g_ladder:
                    (_, a), times = _timed(lambda: label_grid(model, proj, g, k), repeats)
                    results.append(BenchResult("grid", n, g, a.op_count, a.n_clusters, times))
            else:
                fn = label_knn_adjacency if method == "knn_adj" else label_mst_adjacency
                a, times = _timed(lambda: fn(model, proj, adj_k, m), repeats)
                results.append(BenchResult(method, n, 0, a.op_count, a.n_clusters, times))
    return results


def bench_summary(results) -> list[dict]:
    """Median wall time per configuration with speed relative to the grid at the same N.

    ``relative_time`` is the method's median over the median of the grid run
    at the same N (the first G of the ladder).
    """
    ref = {}
    for r in results:
        if r.method == "grid" and r.n not in ref:
            ref[r.n] = r.wall_time
    out = []
    for r in results:
        base = ref.get(r.n)
        out.append({"method": r.method, "n": r.n, "g": r.g, "op_count": r.op_count,
                    "n_clusters": r.n_clusters, "wall_time": r.wall_time,
                    "relative_time": r.wall_time / base if base else float("nan")})
    return out


def bench_csv(results, timings: bool = True, seed: int | None = None) -> str:
    """One row per (method, N, G, repeat).

    With ``timings=False`` the wall-time column is left out, giving output
    that is identical across reruns.  ``seed`` adds a column recording the
    subsampling seed.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    extra = ["seed"] if seed is not None else []
    head = ["method", "n", "g", "repeat", "op_count", "n_clusters"] + extra + (["wall_time"] if timings else [])
    w.writerow(head)
    for r in results:
        for i, t in enumerate(r.wall_times):
            row = [r.method, r.n, r.g, i + 1, r.op_count, r.n_clusters] + ([seed] if seed is not None else [])
            w.writerow(row + ([repr(t)] if timings else []))
    return buf.getvalue()
