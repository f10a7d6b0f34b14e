"""Two-dimensional coordinates for grid labeling.

Either two attribute columns are copied, or the rows are placed by
correspondence analysis (COA): with ``P = X / X.sum()``, row masses ``r`` and
column masses ``c``, the standardised residuals

    S = D_r^{-1/2} (P - r c') D_c^{-1/2}

are factored by SVD and rows get principal coordinates
``D_r^{-1/2} U Sigma`` on the two leading axes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DataMatrix

__all__ = ["Projection2D", "project", "coa", "save_coords", "DEGENERATE_SV", "DEGENERATE_PAD"]

DEGENERATE_SV = 1e-12
DEGENERATE_PAD = 0.5


@dataclass(frozen=True)
class Projection2D:
    """N x 2 coordinates plus the bounding box used for the grid.

    ``min_max`` is ``[[min_c1, max_c1], [min_c2, max_c2]]``; an axis with no
    spread is padded by ``DEGENERATE_PAD`` on each side.
    """

    coords: np.ndarray
    source: str
    min_max: np.ndarray
    singular_values: np.ndarray | None = None
    row_names: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("coords", "min_max", "singular_values"):
            a = getattr(self, name)
            if a is not None:
                a = np.array(a, dtype=float)
                a.setflags(write=False)
                object.__setattr__(self, name, a)
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError("coords must be N x 2")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("coords must be finite")
        if np.any(self.min_max[:, 1] <= self.min_max[:, 0]):
            raise ValueError("bounding box must have positive extent")

    @classmethod
    def from_coords(cls, coords, source: str = "coords", singular_values=None, row_names=()):
        coords = np.asarray(coords, dtype=float)
        return cls(coords, source, _bounding_box(coords), singular_values, tuple(row_names))

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def _bounding_box(coords):
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    flat = hi - lo <= 0
    lo = np.where(flat, lo - DEGENERATE_PAD, lo)
    hi = np.where(flat, hi + DEGENERATE_PAD, hi)
    return np.column_stack([lo, hi])


def coa(data) -> Projection2D:
    """Row principal coordinates on the first two correspondence axes.

    Each axis is signed so that its largest-magnitude row loading is
    positive.  Axes whose singular value is at most ``DEGENERATE_SV`` (or that
    do not exist) are returned as zero columns.

    Raises
    ------
    ValueError
        Negative entries, an all-zero row or column, or zero total mass.
    """
    names = data.row_names if isinstance(data, DataMatrix) else ()
    X = np.asarray(data.values if isinstance(data, DataMatrix) else data, dtype=float)
    if X.ndim != 2:
        raise ValueError("correspondence analysis needs a 2-D table")
    if np.any(X < 0):
        raise ValueError("correspondence analysis needs nonnegative entries")
    total = X.sum()
    if total <= 0:
        raise ValueError("correspondence analysis needs a positive total mass")
    if np.any(X.sum(axis=1) == 0):
        raise ValueError(f"all-zero row {int(np.flatnonzero(X.sum(axis=1) == 0)[0]) + 1}")
    if np.any(X.sum(axis=0) == 0):
        raise ValueError(f"all-zero column {int(np.flatnonzero(X.sum(axis=0) == 0)[0]) + 1}")

    P = X / total
    r = P.sum(axis=1)
    c = P.sum(axis=0)
    expected = np.outer(r, c)
    S = (P - expected) / np.sqrt(expected)
    U, s, _ = np.linalg.svd(S, full_matrices=False)

    coords = np.zeros((X.shape[0], 2))
    sv = np.zeros(2)
    for a in range(min(2, len(s))):
        if s[a] <= DEGENERATE_SV:
            continue
        u = U[:, a]
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        coords[:, a] = u * s[a] / np.sqrt(r)
        sv[a] = s[a]
    return Projection2D.from_coords(coords, "coa", sv, names)


def project(data: DataMatrix, cx: int = 0, cy: int = 0) -> Projection2D:
    """Columns ``cx``, ``cy`` (1-based) verbatim, or COA when both are 0."""
    if cx == 0 and cy == 0:
        return coa(data)
    d = data.values.shape[1]
    for c in (cx, cy):
        if not (1 <= c <= d):
            raise ValueError(f"column {c} out of range 1..{d}")
    if cx == cy:
        raise ValueError("cx and cy must be distinct columns")
    coords = data.values[:, [cx - 1, cy - 1]]
    return Projection2D.from_coords(coords, f"columns({cx},{cy})", None, data.row_names)


def save_coords(proj: Projection2D, path, row_names=None) -> None:
    """CSV of ``name,c1,c2``."""
    names = row_names if row_names is not None else (proj.row_names or [str(i + 1) for i in range(proj.n)])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "c1", "c2"])
        for name, (a, b) in zip(names, proj.coords):
            w.writerow([name, repr(float(a)), repr(float(b))])
