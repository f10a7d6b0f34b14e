"""Kernel functions and kernel-matrix assembly.

Vector kernels (linear, Gaussian, exponential) act on numeric rows.  Term
kernels act on a :class:`~svcgrid.data.TermDataset`: Levenshtein- and
Jaccard-based radial kernels and two string kernels.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import DataMatrix, TermDataset, build_feature_matrix

__all__ = [
    "KernelKind",
    "KernelMatrix",
    "LevenshteinWeights",
    "VECTOR_KINDS",
    "TERM_KINDS",
    "gaussian_kernel",
    "gaussian_dist_kernel",
    "linear_kernel",
    "cross_kernel",
    "levenshtein",
    "levenshtein_matrix",
    "jaccard",
    "jaccard_matrix",
    "jaccard_plus",
    "profile_rbf",
    "string_kernel",
    "string_kernel_matrix",
    "build_kernel_matrix",
]


class KernelKind(str, enum.Enum):
    LINEAR = "linear"
    GAUSSIAN = "gaussian"
    GAUSSIAN_DIST = "gaussian-dist"
    PRECOMPUTED = "precomputed"
    LRB = "lrb"
    RBL = "rbl"
    JRB = "jrb"
    RBJ = "rbj"
    JRB_PLUS = "jrb-plus"
    SK_CONSTANT = "sk-constant"
    SK_SPECTRUM = "sk-spectrum"

    @classmethod
    def parse(cls, value) -> "KernelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"rbf": "gaussian", "exponential": "gaussian-dist", "jrb+": "jrb-plus", "jrbplus": "jrb-plus"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown kernel {value!r}; expected one of {names}") from None

    @property
    def radial(self) -> bool:
        return self not in (KernelKind.LINEAR, KernelKind.PRECOMPUTED)


VECTOR_KINDS = frozenset({KernelKind.LINEAR, KernelKind.GAUSSIAN, KernelKind.GAUSSIAN_DIST})
TERM_KINDS = frozenset(
    {KernelKind.LRB, KernelKind.RBL, KernelKind.JRB, KernelKind.RBJ, KernelKind.JRB_PLUS,
     KernelKind.SK_CONSTANT, KernelKind.SK_SPECTRUM}
)
_Q_KINDS = frozenset({KernelKind.GAUSSIAN, KernelKind.GAUSSIAN_DIST, KernelKind.LRB, KernelKind.RBL,
                      KernelKind.JRB, KernelKind.RBJ, KernelKind.JRB_PLUS})


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric N x N kernel matrix with the settings that produced it."""

    values: np.ndarray
    kind: KernelKind
    q: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"kernel matrix must be square and non-empty, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel matrix has non-finite entries")
        if not np.array_equal(v, v.T):
            raise ValueError("kernel matrix is not symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", KernelKind.parse(self.kind))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LevenshteinWeights:
    """Costs of insertion, deletion and substitution."""

    w_insert: float = 1.0
    w_delete: float = 1.0
    w_substitute: float = 1.0

    def __post_init__(self):
        if min(self.w_insert, self.w_delete, self.w_substitute) < 0:
            raise ValueError("Levenshtein weights must be nonnegative")


# -- vector kernels ---------------------------------------------------------


def _check_q(q):
    if not (np.isfinite(q) and q > 0):
        raise ValueError(f"kernel width q must be positive, got {q}")


_TINY = np.finfo(float).tiny


def _decay(x):
    # exp(-x) floored at the smallest normal double, so radial values stay positive
    return np.maximum(np.exp(-x), _TINY)


def _pair(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x1.shape} vs {x2.shape}")
    return x1, x2


def gaussian_kernel(x1, x2, q: float) -> float:
    """exp(-q ||x1 - x2||^2)."""
    _check_q(q)
    x1, x2 = _pair(x1, x2)
    return float(_decay(q * np.sum((x1 - x2) ** 2)))


def gaussian_dist_kernel(x1, x2, q: float) -> float:
    """exp(-q ||x1 - x2||), the exponential kernel."""
    _check_q(q)
    x1, x2 = _pair(x1, x2)
    return float(_decay(q * np.sqrt(np.sum((x1 - x2) ** 2))))


def linear_kernel(x1, x2) -> float:
    x1, x2 = _pair(x1, x2)
    return float(x1 @ x2)


def _sq_dists(A, B):
    # direct differences: exact zeros for identical rows
    d = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def cross_kernel(kind, A, B, q: float = 1.0) -> np.ndarray:
    """Kernel values between rows of ``A`` (m x d) and ``B`` (n x d).

    Only vector kernels can be evaluated on unseen points.
    """
    kind = KernelKind.parse(kind)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if kind is KernelKind.LINEAR:
        return A @ B.T
    if kind not in VECTOR_KINDS:
        raise ValueError(f"{kind.value} kernel cannot be evaluated on new points")
    _check_q(q)
    d2 = _sq_dists(A, B)
    if kind is KernelKind.GAUSSIAN:
        return _decay(q * d2)
    return _decay(q * np.sqrt(d2))


# -- Levenshtein --------------------------------------------------------------


def levenshtein(a: str, b: str, w: LevenshteinWeights | None = None) -> float:
    """Weighted edit distance.

    D[i, j] = min(D[i-1, j] + w_insert,
                  D[i-1, j-1] + w_substitute * (a[i] != b[j]),
                  D[i, j-1] + w_delete)

    with D[i, 0] = i * w_insert and D[0, j] = j * w_delete.
    """
    return float(levenshtein_matrix([a], [b], w)[0, 0])


def _encode(strings):
    # pad with -1 so padding never matches a real code point
    L = max((len(s) for s in strings), default=0)
    out = np.full((len(strings), L), -1, dtype=np.int64)
    for i, s in enumerate(strings):
        if s:
            out[i, : len(s)] = np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)
    return out


def levenshtein_matrix(rows: Sequence[str], cols: Sequence[str] | None = None,
                       w: LevenshteinWeights | None = None) -> np.ndarray:
    """All-pairs weighted edit distance, ``D[i, j] = levenshtein(rows[i], cols[j])``.

    Each string in ``rows`` is aligned against every string in ``cols`` at
    once; the within-row deletion chain is a running minimum.
    """
    w = w or LevenshteinWeights()
    cols = list(rows) if cols is None else list(cols)
    rows = list(rows)
    out = np.empty((len(rows), len(cols)))
    if not cols:
        return out
    codes = _encode(cols)
    lens = np.array([len(s) for s in cols])
    L = codes.shape[1]
    jw = np.arange(L + 1) * w.w_delete
    for r, a in enumerate(rows):
        D = np.broadcast_to(jw, (len(cols), L + 1)).copy()
        for i, ch in enumerate(a, start=1):
            sub = D[:, :-1] + w.w_substitute * (codes != ord(ch))
            T = np.empty_like(D)
            T[:, 0] = D[:, 0] + w.w_insert
            T[:, 1:] = np.minimum(D[:, 1:] + w.w_insert, sub)
            # D[i, j] = min_{l <= j} T[l] + (j - l) w_delete
            D = np.minimum.accumulate(T - jw, axis=1) + jw
        out[r] = D[np.arange(len(cols)), lens]
    return out


# -- Jaccard ------------------------------------------------------------------


def jaccard(s1, s2) -> float:
    """|s1 & s2| / |s1 | s2|, and 0 when both are empty."""
    s1, s2 = set(s1), set(s2)
    union = len(s1 | s2)
    return len(s1 & s2) / union if union else 0.0


def jaccard_matrix(features) -> np.ndarray:
    """Pairwise Jaccard index between rows of a binary occurrence matrix."""
    F = (np.asarray(features) != 0).astype(float)
    inter = F @ F.T
    size = F.sum(axis=1)
    union = size[:, None] + size[None, :] - inter
    J = np.divide(inter, union, out=np.zeros_like(inter), where=union > 0)
    return np.minimum(J, J.T)


def jaccard_plus(J, eps: float = 0.05, seed: int = 42) -> np.ndarray:
    """Replace zero entries of ``J`` by seeded values in (0, eps].

    The same value is used at (i, j) and (j, i).  ``eps=0`` returns ``J``
    unchanged.
    """
    J = np.array(J, dtype=float)
    if eps < 0:
        raise ValueError("noise amplitude must be nonnegative")
    if eps == 0:
        return J
    u = np.random.default_rng(seed).random(J.shape)
    u = np.triu(u) + np.triu(u, 1).T
    return np.where(J == 0, eps * (1.0 - u), J)


def profile_rbf(P, q: float) -> np.ndarray:
    """exp(-q ||P_i - P_j||^2) between rows of a similarity-profile matrix."""
    _check_q(q)
    P = np.asarray(P, dtype=float)
    sq = np.einsum("ij,ij->i", P, P)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (P @ P.T), 0.0)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return _decay(q * d2)


# -- string kernels -----------------------------------------------------------


def _ngrams(s, n):
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def string_kernel(a: str, b: str, kind: str = "spectrum", n: int = 3) -> float:
    """Substring-matching kernels.

    ``spectrum`` sums, over every length-``n`` substring, the product of its
    occurrence counts in ``a`` and ``b``.  ``constant`` does the same over
    substrings of every length and adds 1, so that any two strings share at
    least the empty match; longer ordered matches contribute once per
    contained substring.
    """
    if kind == "spectrum":
        if n < 1:
            raise ValueError("spectrum length n must be >= 1")
        A, B = _ngrams(a, n), _ngrams(b, n)
        return float(sum(c * B[g] for g, c in A.items() if g in B))
    if kind == "constant":
        return float(1 + _common_prefix_total(a, b))
    raise ValueError(f"unknown string kernel {kind!r}; expected 'constant' or 'spectrum'")


def _common_prefix_total(a, b):
    # sum over start pairs (i, j) of the common-prefix length of a[i:], b[j:]
    if not a or not b:
        return 0
    E = (_encode([a])[0][:, None] == _encode([b])[0][None, :]).astype(np.int64)
    L = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i in range(len(a) - 1, -1, -1):
        L[i, :-1] = E[i] * (1 + L[i + 1, 1:])
    return int(L.sum())


def string_kernel_matrix(strings: Sequence[str], kind: str = "spectrum", n: int = 3,
                         normalize: bool = True) -> np.ndarray:
    """Pairwise string kernel, cosine-normalised by default."""
    m = len(strings)
    K = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            K[i, j] = K[j, i] = string_kernel(strings[i], strings[j], kind, n)
    if normalize:
        d = np.sqrt(np.diag(K))
        d[d == 0] = 1.0
        K = K / np.outer(d, d)
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, np.where(np.diag(K) > 0, 1.0, 0.0))
    return K


# -- assembly -----------------------------------------------------------------


def _vector_values(data):
    if isinstance(data, DataMatrix):
        return data.values
    if isinstance(data, TermDataset):
        raise TypeError("vector kernels need numeric data, got a TermDataset")
    X = np.asarray(data, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def build_kernel_matrix(data, kind, q: float = 1.0, seed: int = 42, *,
                        weights: LevenshteinWeights | None = None, eps: float = 0.05,
                        n: int = 3, matrix=None) -> KernelMatrix:
    """Kernel matrix for ``data`` under ``kind``.

    Parameters
    ----------
    data : DataMatrix, ndarray or TermDataset
        Numeric rows for vector kernels, terms for term kernels.  Ignored
        for ``precomputed``.
    kind : KernelKind or str
    q : float
        Width for radial kernels.
    seed : int
        Seed of the Jaccard+ noise.
    weights : LevenshteinWeights, optional
    eps : float
        Jaccard+ noise amplitude.
    n : int
        Spectrum length.
    matrix : array_like, optional
        The user matrix for ``precomputed``.
    """
    kind = KernelKind.parse(kind)
    if kind in _Q_KINDS:
        _check_q(q)

    if kind is KernelKind.PRECOMPUTED:
        if matrix is None:
            raise ValueError("precomputed kernel needs a matrix")
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"precomputed kernel must be square, got {M.shape}")
        if not np.allclose(M, M.T, rtol=0, atol=1e-12):
            raise ValueError("precomputed kernel is not symmetric")
        return KernelMatrix(0.5 * (M + M.T), kind, q)

    if kind in VECTOR_KINDS:
        X = _vector_values(data)
        K = cross_kernel(kind, X, X, q)
        K = 0.5 * (K + K.T)
        if kind.radial:
            np.fill_diagonal(K, 1.0)
        return KernelMatrix(K, kind, q)

    if not isinstance(data, TermDataset):
        raise TypeError(f"{kind.value} kernel needs a TermDataset")

    if kind in (KernelKind.LRB, KernelKind.RBL):
        D = levenshtein_matrix(list(data.terms), w=weights)
        if kind is KernelKind.LRB:
            return KernelMatrix(profile_rbf(D, q), kind, q)
        K = _decay(q * 0.5 * (D + D.T))
        np.fill_diagonal(K, 1.0)
        return KernelMatrix(K, kind, q)

    if kind in (KernelKind.SK_CONSTANT, KernelKind.SK_SPECTRUM):
        sk = "constant" if kind is KernelKind.SK_CONSTANT else "spectrum"
        return KernelMatrix(string_kernel_matrix(list(data.terms), sk, n), kind, q)

    J = jaccard_matrix(build_feature_matrix(data).values)
    np.fill_diagonal(J, 1.0)
    if kind is KernelKind.RBJ:
        K = _decay(q * (1.0 - J))
        np.fill_diagonal(K, 1.0)
        return KernelMatrix(K, kind, q)
    if kind is KernelKind.JRB_PLUS:
        J = jaccard_plus(J, eps, seed)
    return KernelMatrix(profile_rbf(J, q), kind, q)
