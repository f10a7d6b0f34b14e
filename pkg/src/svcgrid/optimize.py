"""Minimum enclosing ball in kernel feature space.

The dual problem solved here is::

    maximise   sum_i beta_i K_ii - sum_ij beta_i beta_j K_ij
    subject to sum_i beta_i = 1,  0 <= beta_i <= C,  C = 1 / (N nu)

The squared feature-space distance of a point y from the ball centre is::

    R^2(y) = K(y, y) - 2 sum_i beta_i K(y, x_i) + sum_ij beta_i beta_j K_ij
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernels import VECTOR_KINDS, KernelKind, KernelMatrix, cross_kernel

__all__ = [
    "BallProblem",
    "SvcModel",
    "ConvergenceError",
    "DIAG_REG",
    "solve_dual",
    "radius_sq",
    "is_inside",
    "save_model",
    "load_model",
]

DIAG_REG = 1e-10
KKT_REL_TOL = 1e-6
FORMAT_VERSION = 1


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; ``gap`` is the final optimality gap."""

    def __init__(self, gap, iterations):
        super().__init__(f"dual optimiser did not converge after {iterations} iterations (gap {gap:.3e})")
        self.gap = gap
        self.iterations = iterations


@dataclass(frozen=True)
class BallProblem:
    """Kernel matrix plus the outlier budget ``nu``.

    ``C = 1/(N nu)`` is capped at 1 (a larger bound is never active because
    the coefficients sum to 1); ``nu`` then reports the effective value
    ``1/(N C)``.
    """

    kernel: KernelMatrix
    nu: float = 0.5

    def __post_init__(self):
        if not (0 < self.nu <= 1):
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        object.__setattr__(self, "nu", 1.0 / (self.n * self.C))

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def C(self) -> float:
        return min(1.0, 1.0 / (self.n * self.nu))


@dataclass(frozen=True)
class SvcModel:
    """Fitted ball.

    Attributes
    ----------
    beta : ndarray
        Dual coefficients, summing to one.
    r_hat_sq : float
        Squared ball radius: mean of R^2 over unbounded support vectors.
    center_norm_sq : float
        beta' K beta.
    sv_indices, bsv_indices : ndarray
        Unbounded (0 < beta < C) and bounded (beta = C) support vectors.
    radius_fallback : bool
        True when no unbounded support vector exists and ``r_hat_sq`` is the
        largest R^2 over bounded ones.
    train : ndarray or None
        Training coordinates, needed to evaluate vector kernels on new points.
    """

    beta: np.ndarray
    r_hat_sq: float
    center_norm_sq: float
    C: float
    nu: float
    kind: KernelKind
    q: float
    sv_indices: np.ndarray
    bsv_indices: np.ndarray
    radius_fallback: bool = False
    method: str = "quadratic"
    iterations: int = 0
    gap: float = 0.0
    train: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("beta", "sv_indices", "bsv_indices", "train"):
            a = getattr(self, name)
            if a is not None:
                a = np.array(a)
                a.setflags(write=False)
                object.__setattr__(self, name, a)
        object.__setattr__(self, "kind", KernelKind.parse(self.kind))

    @property
    def n(self) -> int:
        return len(self.beta)

    @property
    def tol_kkt(self) -> float:
        return KKT_REL_TOL * max(self.r_hat_sq, 1e-4)

    def kernel_rows(self, Y) -> np.ndarray:
        """Kernel values between new points ``Y`` and the training points."""
        if self.train is None or self.kind not in VECTOR_KINDS:
            raise ValueError(f"{self.kind.value} model cannot be evaluated on unseen points")
        return cross_kernel(self.kind, Y, self.train, self.q)

    def radii_sq(self, Y) -> np.ndarray:
        """R^2 at each row of ``Y``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        rows = self.kernel_rows(Y)
        if self.kind is KernelKind.LINEAR:
            kyy = np.einsum("ij,ij->i", Y, Y)
        else:
            kyy = np.ones(len(Y))
        return np.maximum(kyy - 2.0 * rows @ self.beta + self.center_norm_sq, 0.0)


# -- solvers ------------------------------------------------------------------


def _pair_step(K, beta, g, i, j, C):
    # move mass t from j to i along the exact line optimum
    gap = g[j] - g[i]
    curv = 2.0 * (K[i, i] + K[j, j] - 2.0 * K[i, j])
    t = gap / curv if curv > 1e-300 else np.inf
    room_i, room_j = C - beta[i], beta[j]
    if t >= room_i or t >= room_j:
        if room_i <= room_j:
            t = room_i
            beta[j] -= t
            beta[i] = C
            if room_i == room_j:
                beta[j] = 0.0
        else:
            t = room_j
            beta[i] += t
            beta[j] = 0.0
    else:
        beta[i] += t
        beta[j] -= t
    g += 2.0 * t * (K[:, i] - K[:, j])


def _quadratic(K, C, tol, max_iter, rng):
    n = len(K)
    beta = np.full(n, 1.0 / n)
    g = 2.0 * K @ beta - np.diag(K)
    idx = np.arange(n)
    for it in range(max_iter):
        up = beta < C
        lo = beta > 0
        if not up.any() or not lo.any():
            return beta, it, 0.0
        iu, il = idx[up], idx[lo]
        i = iu[np.argmin(g[up])]
        j = il[np.argmax(g[lo])]
        if g[j] - g[i] <= tol:
            return beta, it, max(g[j] - g[i], 0.0)
        _pair_step(K, beta, g, i, j, C)
    up, lo = beta < C, beta > 0
    raise ConvergenceError(g[lo].max() - g[up].min(), max_iter)


def _stochastic(K, C, tol, max_iter, rng):
    # random violating index, best partner on the opposite side
    n = len(K)
    beta = np.full(n, 1.0 / n)
    g = 2.0 * K @ beta - np.diag(K)
    idx = np.arange(n)
    for it in range(max_iter):
        up = beta < C
        lo = beta > 0
        if not up.any() or not lo.any():
            return beta, it, 0.0
        gmin, gmax = g[up].min(), g[lo].max()
        if gmax - gmin <= tol:
            return beta, it, max(gmax - gmin, 0.0)
        if rng.random() < 0.5:
            cand = idx[up & (g < gmax - tol)]
            i = cand[rng.integers(len(cand))]
            il = idx[lo & (idx != i)]
            j = il[np.argmax(g[il])]
        else:
            cand = idx[lo & (g > gmin + tol)]
            j = cand[rng.integers(len(cand))]
            iu = idx[up & (idx != j)]
            i = iu[np.argmin(g[iu])]
        _pair_step(K, beta, g, i, j, C)
    up, lo = beta < C, beta > 0
    raise ConvergenceError(g[lo].max() - g[up].min(), max_iter)


_SOLVERS = {"quadratic": _quadratic, "stochastic": _stochastic}


def solve_dual(problem: BallProblem, method: str = "quadratic", seed: int = 42, *,
               tol: float = 1e-10, max_iter: int = 1_000_000, train=None) -> SvcModel:
    """Fit the enclosing ball.

    Parameters
    ----------
    problem : BallProblem
    method : {"quadratic", "stochastic"}
        ``quadratic`` always updates the most violating pair; ``stochastic``
        picks the first index of each pair at random among violators.  Both
        stop when the largest KKT violation is below ``tol``.
    seed : int
        Seed of the stochastic pair choice.
    train : array_like, optional
        Coordinates the kernel was computed from; stored so the model can
        evaluate new points.

    Raises
    ------
    ConvergenceError
        ``max_iter`` pair updates without reaching ``tol``.
    """
    try:
        solver = _SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown optimiser {method!r}; expected 'quadratic' or 'stochastic'") from None
    K = np.array(problem.kernel.values, dtype=float)
    K[np.diag_indices_from(K)] += DIAG_REG
    C = problem.C
    beta, iters, gap = solver(K, C, tol, max_iter, np.random.default_rng(seed))

    # radii on the unregularised kernel, matching later evaluation of new points
    K = problem.kernel.values
    cn = float(beta @ K @ beta)
    r2 = np.maximum(np.diag(K) - 2.0 * K @ beta + cn, 0.0)
    eps = 1e-12 * C
    free = (beta > eps) & (beta < C - eps)
    bounded = beta >= C - eps
    fallback = not free.any()
    if not fallback:
        rhat = float(r2[free].mean())
    elif bounded.any():
        rhat = float(r2[bounded].max())
    else:
        rhat = 0.0
    if train is not None:
        train = np.asarray(train, dtype=float)
        if len(train) != problem.n:
            raise ValueError("train must have one row per kernel row")
    return SvcModel(
        beta=beta, r_hat_sq=rhat, center_norm_sq=cn, C=C, nu=problem.nu,
        kind=problem.kernel.kind, q=problem.kernel.q,
        sv_indices=np.flatnonzero(free), bsv_indices=np.flatnonzero(bounded),
        radius_fallback=fallback, method=method, iterations=iters, gap=gap, train=train,
    )


def radius_sq(model: SvcModel, y_kernel_row, k_yy: float) -> float:
    """R^2(y) from y's kernel values against the training points."""
    row = np.asarray(y_kernel_row, dtype=float)
    if row.shape != (model.n,):
        raise ValueError(f"kernel row must have length {model.n}, got {row.shape}")
    v = k_yy - 2.0 * row @ model.beta + model.center_norm_sq
    return float(max(v, 0.0))


def is_inside(model: SvcModel, y) -> bool:
    """True when R^2(y) <= R_hat^2 (surface points, within ``tol_kkt``, count as inside)."""
    return bool(model.radii_sq(np.asarray(y, dtype=float)[None, :])[0] <= model.r_hat_sq + model.tol_kkt)


# -- persistence --------------------------------------------------------------


def save_model(model: SvcModel, path) -> None:
    """Write a versioned plain-text model file with full-precision floats."""
    lines = [
        f"svcgrid-model {FORMAT_VERSION}",
        f"n {model.n}",
        f"kernel {model.kind.value}",
        f"q {model.q!r}",
        f"nu {model.nu!r}",
        f"C {model.C!r}",
        f"method {model.method}",
        f"r_hat_sq {model.r_hat_sq!r}",
        f"center_norm_sq {model.center_norm_sq!r}",
        f"radius_fallback {int(model.radius_fallback)}",
        f"iterations {model.iterations}",
        f"gap {float(model.gap)!r}",
        "beta",
    ]
    lines += [repr(float(b)) for b in model.beta]
    if model.train is not None:
        lines.append(f"train {model.train.shape[1]}")
        lines += [" ".join(repr(float(v)) for v in row) for row in model.train]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> SvcModel:
    """Read a file written by :func:`save_model`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        magic, version = lines[0].split()
        if magic != "svcgrid-model" or int(version) != FORMAT_VERSION:
            raise ValueError
        head = {}
        pos = 1
        while lines[pos] != "beta":
            key, value = lines[pos].split(" ", 1)
            head[key] = value
            pos += 1
        n = int(head["n"])
        beta = np.array([float(v) for v in lines[pos + 1:pos + 1 + n]])
        pos += 1 + n
        train = None
        if pos < len(lines) and lines[pos].startswith("train"):
            train = np.array([[float(v) for v in row.split()] for row in lines[pos + 1:pos + 1 + n]])
        C = float(head["C"])
        eps = 1e-12 * C
        return SvcModel(
            beta=beta, r_hat_sq=float(head["r_hat_sq"]), center_norm_sq=float(head["center_norm_sq"]),
            C=C, nu=float(head["nu"]), kind=head["kernel"], q=float(head["q"]),
            sv_indices=np.flatnonzero((beta > eps) & (beta < C - eps)),
            bsv_indices=np.flatnonzero(beta >= C - eps),
            radius_fallback=bool(int(head["radius_fallback"])), method=head["method"],
            iterations=int(head["iterations"]), gap=float(head["gap"]), train=train,
        )
    except (ValueError, KeyError, IndexError) as exc:
        raise ValueError(f"{path}: not a valid model file") from exc
