"""End-to-end fitting and cluster navigation.

:func:`find_svc_model` projects the data to the plane, fits the ball and
labels the points; the returned :class:`SvcResult` answers cluster queries,
writes exports and round-trips through JSON.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import DataMatrix, TermDataset, build_feature_matrix
from .evaluation import format_table
from .kernels import TERM_KINDS, VECTOR_KINDS, KernelKind, build_kernel_matrix
from .labeling import (DEFAULT_CAP, DEFAULT_SAMPLES, ClusterAssignment, Grid, GridLabeling, RadiusField,
                       label_grid, label_knn_adjacency, label_mst_adjacency)
from .optimize import BallProblem, SvcModel, solve_dual
from .projection import Projection2D, project

__all__ = ["SvcParams", "SvcResult", "find_svc_model", "PRESETS", "LABELERS", "RESULT_VERSION"]

RESULT_VERSION = 1
LABELERS = ("grid", "knn_adj", "mst_adj")


@dataclass(frozen=True)
class SvcParams:
    """Fitting and labeling settings.

    ``field_q`` sets the Gaussian width of the planar membership field used
    with term and precomputed kernels (defaults to ``q``).  ``eps`` is the
    Jaccard+ noise amplitude and ``spectrum_n`` the spectrum-kernel length.
    """

    kernel: str = "gaussian"
    method: str = "quadratic"
    labeler: str = "grid"
    nu: float = 0.5
    q: float = 40.0
    k: int = 1
    g: int = 5
    cx: int = 0
    cy: int = 0
    seed: int = 42
    field_q: float | None = None
    eps: float = 0.05
    spectrum_n: int = 3
    samples: int = DEFAULT_SAMPLES
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel).value)
        if self.method not in ("quadratic", "stochastic"):
            raise ValueError(f"unknown optimiser {self.method!r}")
        if self.labeler not in LABELERS:
            raise ValueError(f"unknown labeler {self.labeler!r}; expected one of {', '.join(LABELERS)}")
        if not (0 < self.nu <= 1):
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.field_q is not None and not self.field_q > 0:
            raise ValueError("field_q must be positive")
        if self.labeler == "grid" and not 1 <= self.k <= 8:
            raise ValueError(f"k must be in 1..8, got {self.k}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.g < 2:
            raise ValueError(f"grid size must be >= 2, got {self.g}")
        if self.cx < 0 or self.cy < 0:
            raise ValueError("cx and cy must be >= 0")


PRESETS = {
    "svcr-example": dict(kernel="gaussian", nu=0.5, q=40.0, k=1, g=5, cx=0, cy=0),
    "iris-fig2": dict(kernel="gaussian", nu=0.7, q=1200.0, k=1, g=13, cx=0, cy=0),
    "terms-fig7": dict(kernel="jrb-plus", nu=1.0, q=2000.0, k=1, g=30, cx=0, cy=0),
}


@dataclass(frozen=True)
class SvcResult:
    """A fitted and labeled dataset."""

    data: DataMatrix
    projection: Projection2D
    model: SvcModel
    field: RadiusField
    assignment: ClusterAssignment
    params: SvcParams
    grid_labeling: GridLabeling | None = None
    terms: tuple[str, ...] = field(default=())

    # -- navigation --------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return self.data.row_names

    @property
    def n_clusters(self) -> int:
        return self.assignment.n_clusters

    def _ids(self):
        ids = self.assignment.cluster_ids
        return ids + ([0] if self.assignment.unclassified else [])

    def cluster_by_id(self, cluster_id: int) -> list[str]:
        """Row names in a cluster (empty for an unknown id)."""
        return [self.names[i] for i in self.assignment.members(cluster_id)]

    def show_clusters(self) -> dict[int, list[str]]:
        """Every cluster by id; unclustered points (id 0) last."""
        return {cid: self.cluster_by_id(cid) for cid in self._ids()}

    def clusters_with_term(self, term: str) -> dict[int, list[str]]:
        """Clusters holding a member whose name contains ``term``."""
        out = {}
        for cid in self._ids():
            members = self.cluster_by_id(cid)
            if any(term in m for m in members):
                out[cid] = members
        return out

    def summary(self) -> str:
        """Cluster count, sizes and per-cluster attribute means."""
        a = self.assignment
        p = self.params
        lines = [
            f"points {a.n}  clusters {a.n_clusters}  unclustered {a.unclassified}",
            f"kernel {p.kernel}  method {p.method}  labeler {p.labeler}  nu {p.nu!r}  q {p.q!r}"
            f"  k {p.k}  g {p.g}  cx {p.cx}  cy {p.cy}  seed {p.seed}",
            f"support vectors {len(self.model.sv_indices)}  bounded {len(self.model.bsv_indices)}"
            f"  r_hat_sq {self.model.r_hat_sq:.6g}",
        ]
        cols = list(self.data.col_names)
        shown = cols[:8]
        rows = []
        for cid in self._ids():
            idx = a.members(cid)
            means = self.data.values[idx, :len(shown)].mean(axis=0)
            rows.append([cid, len(idx)] + [f"{v:.3f}" for v in means])
        lines.append(format_table(["cluster", "size"] + shown, rows))
        if len(cols) > len(shown):
            lines.append(f"({len(cols) - len(shown)} more attributes not shown)")
        return "\n".join(lines) + "\n"

    def export_clusters(self, name: str, directory=".") -> Path:
        """Write ``<name>_clusters.txt``: one section per id, 0 (unclustered) first."""
        path = Path(directory) / f"{name}_clusters.txt"
        parts = []
        for cid in [0] + self.assignment.cluster_ids:
            members = self.cluster_by_id(cid)
            head = f"# cluster 0 unclustered ({len(members)})" if cid == 0 else f"# cluster {cid} ({len(members)})"
            parts.append("\n".join([head] + members))
        path.write_text("\n\n".join(parts) + "\n", encoding="utf-8")
        return path

    # -- relabeling --------------------------------------------------------

    def relabel(self, labeler: str | None = None, k: int | None = None, g: int | None = None) -> "SvcResult":
        """Same model, another labeler or labeler setting."""
        params = replace(self.params, labeler=labeler or self.params.labeler,
                         k=self.params.k if k is None else k, g=self.params.g if g is None else g)
        grid_lab, assignment = _label(self.field, self.projection, params)
        return replace(self, params=params, grid_labeling=grid_lab, assignment=assignment)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        m, f, pr = self.model, self.field, self.projection
        grid = None
        if self.grid_labeling is not None:
            gl = self.grid_labeling
            grid = {"g": gl.grid.g, "origin": _fl(gl.grid.origin), "scale": _fl(gl.grid.scale),
                    "num_points": gl.num_points.tolist(), "radii_sq": _fl(gl.radii_sq), "op_count": gl.op_count}
        return {
            "format": "svcgrid-result",
            "version": RESULT_VERSION,
            "params": asdict(self.params),
            "data": {"row_names": list(self.data.row_names), "col_names": list(self.data.col_names),
                     "class_tags": None if self.data.class_tags is None else self.data.class_tags.tolist(),
                     "values": _fl(self.data.values)},
            "terms": list(self.terms),
            "projection": {"source": pr.source, "coords": _fl(pr.coords), "min_max": _fl(pr.min_max),
                           "singular_values": None if pr.singular_values is None else _fl(pr.singular_values)},
            "model": {"beta": _fl(m.beta), "r_hat_sq": float(m.r_hat_sq), "center_norm_sq": float(m.center_norm_sq),
                      "C": float(m.C), "nu": float(m.nu), "kind": m.kind.value, "q": float(m.q),
                      "sv_indices": m.sv_indices.tolist(), "bsv_indices": m.bsv_indices.tolist(),
                      "radius_fallback": bool(m.radius_fallback), "method": m.method,
                      "iterations": int(m.iterations), "gap": float(m.gap),
                      "trained_on_projection": m.train is not None},
            "field": {"kind": f.kind.value, "q": float(f.q), "center_norm_sq": float(f.center_norm_sq),
                      "r_hat_sq": float(f.r_hat_sq), "exact": bool(f.exact)},
            "assignment": {"method": self.assignment.method, "op_count": int(self.assignment.op_count),
                           "class_points": self.assignment.class_points.tolist()},
            "grid": grid,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "SvcResult":
        if d.get("format") != "svcgrid-result" or d.get("version") != RESULT_VERSION:
            raise ValueError("not a svcgrid result file (or unsupported version)")
        dd = d["data"]
        tags = dd["class_tags"]
        data = DataMatrix(np.array(dd["values"], dtype=float), tuple(dd["row_names"]), tuple(dd["col_names"]),
                          None if tags is None else np.array(tags, dtype=int))
        pj = d["projection"]
        sv = pj["singular_values"]
        proj = Projection2D(np.array(pj["coords"]), pj["source"], np.array(pj["min_max"]),
                            None if sv is None else np.array(sv), data.row_names)
        md = d["model"]
        model = SvcModel(
            beta=np.array(md["beta"]), r_hat_sq=md["r_hat_sq"], center_norm_sq=md["center_norm_sq"],
            C=md["C"], nu=md["nu"], kind=md["kind"], q=md["q"],
            sv_indices=np.array(md["sv_indices"], dtype=int), bsv_indices=np.array(md["bsv_indices"], dtype=int),
            radius_fallback=md["radius_fallback"], method=md["method"], iterations=md["iterations"],
            gap=md["gap"], train=proj.coords if md["trained_on_projection"] else None,
        )
        fd = d["field"]
        fld = RadiusField(proj.coords, model.beta, KernelKind.parse(fd["kind"]), fd["q"], fd["center_norm_sq"],
                          fd["r_hat_sq"], fd["exact"])
        ad = d["assignment"]
        assignment = ClusterAssignment(np.array(ad["class_points"], dtype=int), ad["method"], ad["op_count"])
        grid_lab = None
        if d["grid"] is not None:
            gd = d["grid"]
            grid = Grid(gd["g"], np.array(gd["origin"]), np.array(gd["scale"]))
            grid_lab = GridLabeling(grid, np.array(gd["num_points"], dtype=int), np.array(gd["radii_sq"]),
                                    gd["op_count"])
        return cls(data, proj, model, fld, assignment, SvcParams(**d["params"]), grid_lab, tuple(d["terms"]))

    @classmethod
    def load(cls, path) -> "SvcResult":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: corrupt result file ({exc.msg})") from None
        try:
            return cls.from_dict(d)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: corrupt result file (missing {exc})") from None


def _fl(a):
    return np.asarray(a, dtype=float).tolist()


def _label(fld, proj, params):
    if params.labeler == "grid":
        return label_grid(fld, proj, params.g, params.k, params.cap)
    if params.labeler == "knn_adj":
        return None, label_knn_adjacency(fld, proj, params.k, params.samples)
    return None, label_mst_adjacency(fld, proj, params.k, params.samples)


def find_svc_model(data, params: SvcParams | None = None, *, kernel_matrix=None, **kwargs) -> SvcResult:
    """Project, fit and label.

    Parameters
    ----------
    data : DataMatrix or TermDataset
        Numeric rows, or terms (projected through their binary feature
        matrix).
    params : SvcParams, optional
        Settings; keyword arguments override individual fields.
    kernel_matrix : array_like, optional
        User matrix for the ``precomputed`` kernel.

    Notes
    -----
    Vector kernels are fitted on the planar coordinates, so every labeler
    queries the fitted ball itself.  Term and precomputed kernels are fitted
    on their own matrix; labeling then uses the planar Gaussian field
    described in :class:`~svcgrid.labeling.RadiusField`.
    """
    params = replace(params or SvcParams(), **kwargs) if kwargs else (params or SvcParams())
    kind = KernelKind.parse(params.kernel)
    terms = ()
    if isinstance(data, TermDataset):
        terms = data.terms
        matrix = build_feature_matrix(data)
    elif isinstance(data, DataMatrix):
        matrix = data
        if kind in TERM_KINDS:
            raise ValueError(f"{kind.value} kernel needs a term dataset")
    else:
        raise TypeError("data must be a DataMatrix or TermDataset")

    proj = project(matrix, params.cx, params.cy)
    if kind in VECTOR_KINDS:
        Z = proj.coords
        km = build_kernel_matrix(Z, kind, params.q)
        model = solve_dual(BallProblem(km, params.nu), params.method, params.seed, train=Z)
    else:
        if kind is KernelKind.PRECOMPUTED:
            if kernel_matrix is None:
                raise ValueError("precomputed kernel needs kernel_matrix")
            km = build_kernel_matrix(None, kind, params.q, matrix=kernel_matrix)
            if km.n != matrix.rows:
                raise ValueError(f"kernel matrix is {km.n} x {km.n} but data has {matrix.rows} rows")
        else:
            km = build_kernel_matrix(data, kind, params.q, params.seed, eps=params.eps, n=params.spectrum_n)
        model = solve_dual(BallProblem(km, params.nu), params.method, params.seed)
    fld = RadiusField.from_model(model, proj, q=params.field_q)
    grid_lab, assignment = _label(fld, proj, params)
    return SvcResult(matrix, proj, model, fld, assignment, params, grid_lab, tuple(terms))
