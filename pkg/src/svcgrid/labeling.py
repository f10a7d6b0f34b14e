"""Cluster labeling of a fitted ball.

Three labelers share one membership test, R^2(y) <= R_hat^2, evaluated in
the projected plane by a :class:`RadiusField`:

* :func:`label_grid` hashes the plane onto a G x G lattice, finds connected
  in-ball lattice regions, then gives each data point the majority id of its
  nearest in-ball lattice points.
* :func:`label_knn_adjacency` and :func:`label_mst_adjacency` test straight
  segments between data points and take connected components of the graph
  of segments lying inside the ball.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .kernels import VECTOR_KINDS, KernelKind, cross_kernel
from .optimize import KKT_REL_TOL, SvcModel
from .projection import Projection2D

__all__ = [
    "RadiusField",
    "Grid",
    "GridLabeling",
    "ClusterAssignment",
    "AdjacencyMatrix",
    "label_grid",
    "grid_components",
    "match_grid_points",
    "segment_inside",
    "build_adjacency",
    "label_knn_adjacency",
    "label_mst_adjacency",
    "minimum_spanning_edges",
    "DEFAULT_SAMPLES",
    "DEFAULT_CAP",
]

DEFAULT_SAMPLES = 20
DEFAULT_CAP = 4


# -- membership field ---------------------------------------------------------


@dataclass(frozen=True)
class RadiusField:
    """R^2 over the projected plane.

    For vector-kernel models fitted on the projected coordinates the field
    is the model itself.  Otherwise (term or precomputed kernels) the
    model's coefficients are placed on the 2-D coordinates under a Gaussian
    kernel of width ``q``; the centre norm and ``r_hat_sq`` are recomputed in
    that plane so points and lattice are judged on one scale.
    """

    coords: np.ndarray
    beta: np.ndarray
    kind: KernelKind
    q: float
    center_norm_sq: float
    r_hat_sq: float
    exact: bool = True

    @property
    def n(self) -> int:
        return len(self.beta)

    @property
    def threshold(self) -> float:
        return self.r_hat_sq + KKT_REL_TOL * max(self.r_hat_sq, 1e-4)

    @classmethod
    def from_model(cls, model: SvcModel, proj, q: float | None = None) -> "RadiusField":
        coords = np.asarray(proj.coords if isinstance(proj, Projection2D) else proj, dtype=float)
        if len(coords) != model.n:
            raise ValueError(f"projection has {len(coords)} rows, model has {model.n}")
        if (model.kind in VECTOR_KINDS and model.train is not None
                and model.train.shape == coords.shape and np.array_equal(model.train, coords)):
            return cls(coords, model.beta, model.kind, model.q, model.center_norm_sq, model.r_hat_sq, True)
        q = model.q if q is None else q
        K = cross_kernel(KernelKind.GAUSSIAN, coords, coords, q)
        beta = model.beta
        cn = float(beta @ K @ beta)
        r2 = np.maximum(1.0 - 2.0 * K @ beta + cn, 0.0)
        if len(model.sv_indices):
            rhat = float(r2[model.sv_indices].mean())
        elif len(model.bsv_indices):
            rhat = float(r2[model.bsv_indices].max())
        else:
            rhat = float(r2.max())
        return cls(coords, beta, KernelKind.GAUSSIAN, q, cn, rhat, False)

    def radii_sq(self, Y) -> np.ndarray:
        """R^2 at each row of ``Y``; costs ``len(Y) * n`` kernel evaluations."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        rows = cross_kernel(self.kind, Y, self.coords, self.q)
        if self.kind is KernelKind.LINEAR:
            kyy = np.einsum("ij,ij->i", Y, Y)
        else:
            kyy = 1.0
        return np.maximum(kyy - 2.0 * rows @ self.beta + self.center_norm_sq, 0.0)

    def inside(self, Y) -> np.ndarray:
        return self.radii_sq(Y) <= self.threshold


def _field(model, proj) -> RadiusField:
    if isinstance(model, RadiusField):
        return model
    return RadiusField.from_model(model, proj)


def _coords(proj):
    return np.asarray(proj.coords if isinstance(proj, Projection2D) else proj, dtype=float)


# -- result types -------------------------------------------------------------


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster id per data point; 0 means unclustered."""

    class_points: np.ndarray
    method: str = "grid"
    op_count: int = 0

    def __post_init__(self):
        a = np.array(self.class_points, dtype=int)
        a.setflags(write=False)
        object.__setattr__(self, "class_points", a)

    @property
    def n(self) -> int:
        return len(self.class_points)

    @property
    def cluster_ids(self) -> list[int]:
        return sorted(int(i) for i in np.unique(self.class_points) if i > 0)

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_ids)

    @property
    def sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.class_points, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts) if i > 0}

    @property
    def unclassified(self) -> int:
        return int(np.sum(self.class_points == 0))

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.class_points == cluster_id)

    def save_csv(self, path, row_names=None) -> None:
        names = row_names if row_names is not None else [str(i + 1) for i in range(self.n)]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "cluster"])
            for name, c in zip(names, self.class_points):
                w.writerow([name, int(c)])


@dataclass(frozen=True)
class Grid:
    """G x G lattice over the projection's bounding box.

    The step is ``(max - min) / G`` per axis and lattice point ``(a, b)``
    sits at the centre of its cell, ``origin + (a + 1/2, b + 1/2) * scale``,
    so the lattice spans the whole box symmetrically.
    """

    g: int
    origin: np.ndarray
    scale: np.ndarray

    @classmethod
    def over(cls, proj: Projection2D, g: int) -> "Grid":
        if g < 2:
            raise ValueError(f"grid size must be >= 2, got {g}")
        box = proj.min_max
        origin = box[:, 0].copy()
        scale = (box[:, 1] - box[:, 0]) / g
        return cls(int(g), origin, scale)

    @property
    def points(self) -> np.ndarray:
        """(G, G, 2) lattice coordinates, indexed ``[a, b]``."""
        a = np.arange(self.g) + 0.5
        A, B = np.meshgrid(a, a, indexing="ij")
        return self.origin + np.stack([A, B], axis=-1) * self.scale

    def cell_of(self, Y) -> np.ndarray:
        """Lattice index ``(a, b)`` of the cell holding each point."""
        idx = np.floor((np.atleast_2d(Y) - self.origin) / self.scale).astype(int)
        return np.clip(idx, 0, self.g - 1)


@dataclass(frozen=True)
class GridLabeling:
    """Per lattice point: 0 outside the ball, otherwise the cluster id."""

    grid: Grid
    num_points: np.ndarray
    radii_sq: np.ndarray
    op_count: int = 0

    def __post_init__(self):
        for name in ("num_points", "radii_sq"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def cluster_count(self) -> int:
        return int(self.num_points.max(initial=0))

    @property
    def inball(self) -> np.ndarray:
        return self.num_points > 0

    def save_csv(self, path) -> None:
        np.savetxt(path, self.num_points, fmt="%d", delimiter=",")


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric, reflexive boolean segment-adjacency matrix."""

    bits: np.ndarray
    op_count: int = 0

    def __post_init__(self):
        b = np.array(self.bits, dtype=bool)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("adjacency must be square")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def components(self) -> np.ndarray:
        return connected_components(self.bits, directed=False)[1]


# -- grid labeler -------------------------------------------------------------


class _DisjointSet:
    def __init__(self):
        self.parent = [0]

    def make(self):
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _dense_by_size(raw):
    """Renumber positive labels 1..n by size (descending), ties by first position."""
    flat = raw.ravel()
    ids, first, counts = np.unique(flat, return_index=True, return_counts=True)
    keep = ids > 0
    ids, first, counts = ids[keep], first[keep], counts[keep]
    order = np.lexsort((first, -counts))
    lut = np.zeros(int(flat.max(initial=0)) + 1, dtype=int)
    lut[ids[order]] = np.arange(1, len(ids) + 1)
    return lut[raw]


def grid_components(inball) -> np.ndarray:
    """8-connected components of a boolean lattice.

    Raster scan: an in-ball point takes the smallest label among its
    already-visited neighbours (W, NW, N, NE), or a new label; labels that
    meet are merged in a disjoint-set forest.  Ids are then renumbered
    densely by component size.
    """
    inball = np.asarray(inball, dtype=bool)
    G0, G1 = inball.shape
    raw = np.zeros(inball.shape, dtype=int)
    ds = _DisjointSet()
    for a in range(G0):
        for b in range(G1):
            if not inball[a, b]:
                continue
            seen = [raw[a + da, b + db] for da, db in ((-1, -1), (-1, 0), (-1, 1), (0, -1))
                    if 0 <= a + da < G0 and 0 <= b + db < G1 and raw[a + da, b + db]]
            if not seen:
                raw[a, b] = ds.make()
                continue
            lab = min(seen)
            raw[a, b] = lab
            for other in seen:
                ds.union(lab, other)
    roots = np.array([ds.find(i) for i in range(len(ds.parent))])
    return _dense_by_size(roots[raw])


def match_grid_points(num_points, grid: Grid, Y, k: int = 1, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Give each point of ``Y`` the majority id of its ``k`` nearest in-ball lattice points.

    Candidates are lattice points inside the ball within ``cap`` cells (in
    lattice index, along both axes) of the point's own cell; they are ranked
    by Euclidean distance in the plane.  Vote ties go to the lowest id.
    Points with fewer than ``k`` candidates vote with those they have; no
    candidate at all gives 0.
    """
    if not 1 <= k <= 8:
        raise ValueError(f"k must be in 1..8, got {k}")
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    num_points = np.asarray(num_points)
    G = grid.g
    cells = grid.cell_of(Y)
    r = np.arange(-cap, cap + 1)
    off = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2)
    cand = cells[:, None, :] + off[None, :, :]
    valid = np.all((cand >= 0) & (cand < G), axis=-1)
    ca = np.clip(cand, 0, G - 1)
    ids = np.where(valid, num_points[ca[..., 0], ca[..., 1]], 0)
    pos = grid.origin + (ca + 0.5) * grid.scale
    dist = np.sqrt(np.sum((pos - Y[:, None, :]) ** 2, axis=-1))
    dist = np.where(ids > 0, dist, np.inf)
    raster = ca[..., 0] * G + ca[..., 1]
    order = np.lexsort((raster, ids, dist), axis=-1)[:, :k]
    top = np.take_along_axis(ids, order, axis=1)
    counts = np.where(top > 0, (top[:, :, None] == top[:, None, :]).sum(axis=2), 0)
    best = counts.max(axis=1, keepdims=True)
    winner = np.where((counts == best) & (top > 0), top, np.iinfo(int).max).min(axis=1)
    return np.where(best[:, 0] > 0, winner, 0)


def label_grid(model, proj, g: int = 13, k: int = 1, cap: int = DEFAULT_CAP):
    """Grid labeler.

    Parameters
    ----------
    model : SvcModel or RadiusField
    proj : Projection2D
    g : int
        Lattice points per axis.
    k : int
        Number of nearest in-ball lattice points voting for each data point.
    cap : int
        Search window half-width, in cells, around a point's own cell.

    Returns
    -------
    GridLabeling, ClusterAssignment
        ``op_count`` is the number of kernel evaluations spent on lattice
        radii, ``G * G * N``.
    """
    field = _field(model, proj)
    coords = _coords(proj)
    if not isinstance(proj, Projection2D):
        proj = Projection2D.from_coords(coords)
    grid = Grid.over(proj, g)
    pts = grid.points.reshape(-1, 2)
    r2 = field.radii_sq(pts).reshape(g, g)
    ops = g * g * field.n
    inball = r2 <= field.threshold
    if not inball.any():
        warnings.warn("no lattice point lies inside the ball; check q and nu", RuntimeWarning, stacklevel=2)
        num = np.zeros((g, g), dtype=int)
        return (GridLabeling(grid, num, r2, ops),
                ClusterAssignment(np.zeros(len(coords), dtype=int), "grid", ops))
    cells = grid.cell_of(coords)
    if len(coords) > 1 and len(np.unique(cells, axis=0)) == 1:
        warnings.warn("all data points hash to one lattice cell; increase the grid size",
                      RuntimeWarning, stacklevel=2)
    num = grid_components(inball)
    labels = match_grid_points(num, grid, coords, k, cap)
    return GridLabeling(grid, num, r2, ops), ClusterAssignment(labels, "grid", ops)


# -- adjacency labelers -------------------------------------------------------


def _segment_points(A, B, m):
    t = np.arange(1, m + 1) / (m + 1)
    return A[:, None, :] + t[None, :, None] * (B - A)[:, None, :]


def segment_inside(field: RadiusField, I, J, coords, m: int = DEFAULT_SAMPLES) -> np.ndarray:
    """For each pair (I[p], J[p]): do all ``m`` interior segment samples lie in the ball?"""
    I = np.asarray(I, dtype=int)
    J = np.asarray(J, dtype=int)
    if m < 1:
        raise ValueError("need at least one segment sample")
    out = np.ones(len(I), dtype=bool)
    if len(I) == 0:
        return out
    thr = field.threshold
    step = max(1, 200_000 // (m * field.n))
    for s in range(0, len(I), step):
        pts = _segment_points(coords[I[s:s + step]], coords[J[s:s + step]], m)
        r2 = field.radii_sq(pts.reshape(-1, 2)).reshape(-1, m)
        out[s:s + step] = np.all(r2 <= thr, axis=1)
    return out


def build_adjacency(model, proj, m: int = DEFAULT_SAMPLES) -> AdjacencyMatrix:
    """Full segment adjacency over all pairs of data points."""
    field = _field(model, proj)
    coords = _coords(proj)
    n = len(coords)
    I, J = np.triu_indices(n, 1)
    ok = segment_inside(field, I, J, coords, m)
    A = np.eye(n, dtype=bool)
    A[I[ok], J[ok]] = True
    A[J[ok], I[ok]] = True
    return AdjacencyMatrix(A, len(I) * m * n)


def _assignment_from_edges(field, coords, I, J, method, ops):
    n = len(coords)
    graph = coo_matrix((np.ones(len(I)), (I, J)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    sizes = np.bincount(comp)
    outside = ~field.inside(coords)
    labels = comp + 1
    labels[(sizes[comp] == 1) & outside] = 0
    labels = _dense_by_size(labels)
    return ClusterAssignment(labels, method, ops)


def label_knn_adjacency(model, proj, k: int = 3, m: int = DEFAULT_SAMPLES) -> ClusterAssignment:
    """Segment-test each point against its ``k`` nearest neighbours; components are clusters.

    Every directed (point, neighbour) pair is tested, so ``op_count`` is
    ``N * k * m * N`` kernel evaluations.  Singletons outside the ball get 0.
    """
    field = _field(model, proj)
    coords = _coords(proj)
    n = len(coords)
    k = int(min(k, n - 1))
    if k < 1:
        return _assignment_from_edges(field, coords, np.array([], int), np.array([], int), "knn_adj", 0)
    _, nbr = cKDTree(coords).query(coords, k=min(k + 1, n))
    nbr = np.atleast_2d(nbr)
    rows = []
    for i in range(n):
        rows.append([j for j in nbr[i] if j != i][:k])
    I = np.repeat(np.arange(n), k)
    J = np.asarray(rows, dtype=int).ravel()
    ok = segment_inside(field, I, J, coords, m)
    return _assignment_from_edges(field, coords, I[ok], J[ok], "knn_adj", n * k * m * n)


def minimum_spanning_edges(D) -> np.ndarray:
    """Prim's algorithm on a dense distance matrix; ``inf`` marks a missing edge.

    Returns an (E, 2) edge array, E = N - 1 when the graph is connected.
    Zero-length edges between duplicate points are kept.
    """
    D = np.asarray(D, dtype=float)
    n = len(D)
    if n == 0:
        return np.empty((0, 2), dtype=int)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = D[0].copy()
    parent = np.zeros(n, dtype=int)
    best[0] = np.inf
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        if not np.isfinite(cand[j]):
            # restart from the next unreached vertex (forest)
            j = int(np.flatnonzero(~in_tree)[0])
            in_tree[j] = True
        else:
            edges.append((int(parent[j]), j))
            in_tree[j] = True
        closer = D[j] < best
        best = np.where(closer, D[j], best)
        parent = np.where(closer, j, parent)
    return np.asarray(edges, dtype=int).reshape(-1, 2)


def label_mst_adjacency(model, proj, k: int = 1, m: int = DEFAULT_SAMPLES) -> ClusterAssignment:
    """Segment-test the edges of ``k`` successive edge-disjoint Euclidean MSTs.

    ``k = 1`` is the plain minimum spanning tree; each further tree is built
    with the previous trees' edges removed, adding up to ``k`` links per
    node-neighbourhood.  Failing edges are dropped and the remaining
    components are clusters.  Singletons outside the ball get 0.
    """
    field = _field(model, proj)
    coords = _coords(proj)
    n = len(coords)
    d = coords[:, None, :] - coords[None, :, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    np.fill_diagonal(D, np.inf)
    edges = []
    for _ in range(max(1, k)):
        e = minimum_spanning_edges(D)
        if len(e) == 0:
            break
        edges.append(e)
        D[e[:, 0], e[:, 1]] = np.inf
        D[e[:, 1], e[:, 0]] = np.inf
    E = np.concatenate(edges) if edges else np.empty((0, 2), dtype=int)
    ok = segment_inside(field, E[:, 0], E[:, 1], coords, m)
    return _assignment_from_edges(field, coords, E[ok, 0], E[ok, 1], "mst_adj", len(E) * m * n)
