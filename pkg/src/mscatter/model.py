"""Core value types: datasets with a fixed center, downweighting families,
and scatter-estimate records shared by every other module."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "union",
    "TWeight",
    "HuberWeight",
    "WeightSpec",
    "default_weight",
    "SolveStatus",
    "ScatterEstimate",
    "symmetrize",
    "is_positive_definite",
]


def _frozen_array(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Points in R^p together with the fixed center the scatter is taken about.

    The value is immutable after construction; arrays are stored read-only so
    instances are safe to share between threads.
    """

    points: np.ndarray
    center: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2:
            raise ValueError("points must form a 2-d array of shape (n, p)")
        n, p = pts.shape
        if n < 1 or p < 1:
            raise ValueError("need n >= 1 points of dimension p >= 1")
        ctr = np.asarray(self.center, dtype=float).reshape(-1)
        if ctr.shape != (p,):
            raise ValueError(f"center has dimension {ctr.size}, points have {p}")
        if not (np.isfinite(pts).all() and np.isfinite(ctr).all()):
            raise ValueError("points and center must be finite")
        object.__setattr__(self, "points", _frozen_array(pts))
        object.__setattr__(self, "center", _frozen_array(ctr))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    def centered(self) -> np.ndarray:
        """Points relative to the center, as a fresh writable array."""
        return self.points - self.center


def union(x: Dataset, y: Dataset, label: str | None = None) -> Dataset:
    """Concatenate two datasets that share the same center."""
    if x.p != y.p or not np.array_equal(x.center, y.center):
        raise ValueError("datasets must share dimension and center")
    return Dataset(np.vstack([x.points, y.points]), x.center, label=label)


@dataclass(frozen=True)
class TWeight:
    """Student-t style downweighting, u(s) = (p + nu)/(nu + s).

    psi(s) = s u(s) is bounded and strictly increasing; it approaches its
    supremum p + nu without ever attaining it, so the robustness cap
    automatically exceeds the dimension for every nu > 0.
    """

    p: int
    nu: float

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValueError("dimension p must be >= 1")
        if not self.nu > 0:
            raise ValueError("nu must be positive")

    @property
    def psi_max(self) -> float:
        """Supremum of psi; must exceed p for the estimator to be defined."""
        return float(self.p + self.nu)

    def weight(self, s):
        s = np.asarray(s, dtype=float)
        out = (self.p + self.nu) / (self.nu + s)
        return float(out) if out.ndim == 0 else out

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        out = (self.p + self.nu) * s / (self.nu + s)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HuberWeight:
    """Huber-type downweighting, u(s) = c * min(1, s0/s).

    psi(s) = c * min(s, s0) attains its plateau c*s0 at s >= s0.  The plateau
    must exceed the dimension p, otherwise no scatter solution can satisfy the
    trace identity; the constructor rejects such parameters.
    """

    p: int
    c: float
    s0: float

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValueError("dimension p must be >= 1")
        if not (self.c > 0 and self.s0 > 0):
            raise ValueError("c and s0 must be positive")
        if not self.c * self.s0 > self.p:
            raise ValueError(
                f"psi plateau c*s0 = {self.c * self.s0} must exceed the dimension p = {self.p}"
            )

    @property
    def psi_max(self) -> float:
        return float(self.c * self.s0)

    def weight(self, s):
        s = np.asarray(s, dtype=float)
        ratio = np.divide(self.s0, s, out=np.full_like(s, np.inf), where=s > 0)
        out = self.c * np.minimum(1.0, ratio)
        return float(out) if out.ndim == 0 else out

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        out = self.c * np.minimum(s, self.s0)
        return float(out) if out.ndim == 0 else out


WeightSpec = TWeight | HuberWeight


def default_weight(p: int) -> TWeight:
    """Default experiment family: t-style with nu = p, cap 2p (the compromise
    between outlier and inlier protection)."""
    return TWeight(p=p, nu=float(p))


class SolveStatus(enum.Enum):
    CONVERGED = "CONVERGED"
    NONEXISTENT = "NONEXISTENT"
    MAX_ITER = "MAX_ITER"
    DEGENERATE_INPUT = "DEGENERATE_INPUT"


@dataclass(frozen=True)
class ScatterEstimate:
    """Outcome of a scatter solve: matrix, status, and per-point diagnostics.

    distances holds s_i = (x_i - t)' V^{-1} (x_i - t) at the reported V and
    weights holds u(s_i).  When the status is CONVERGED the residual is within
    the solver tolerance and the trace identity gap |ave psi(s_i) - p| is
    within the identity tolerance.
    """

    V: np.ndarray
    status: SolveStatus
    iterations: int
    residual: float
    trace_gap: float
    distances: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "V", _frozen_array(self.V))
        object.__setattr__(self, "distances", _frozen_array(self.distances))
        object.__setattr__(self, "weights", _frozen_array(self.weights))

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy of M; (A + A')/2 is bitwise symmetric in IEEE
    arithmetic because addition commutes."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def is_positive_definite(V: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(np.asarray(V, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True
