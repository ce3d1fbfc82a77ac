"""Positional combinatorics about the center: general position, subspace
masses, the existence conditions for the scatter equation, and the
contamination-class statistics built from point directions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import Dataset, WeightSpec

__all__ = [
    "RANK_RTOL",
    "SUBSET_BUDGET",
    "SubsetBudgetExceeded",
    "BadSubspaceError",
    "TooFewPointsError",
    "DirectionSet",
    "direction_set",
    "ExistenceReport",
    "is_general_position",
    "general_position_count",
    "subspace_mass",
    "check_existence",
    "coplanarity_margin",
    "min_squared_radius",
]

# Rank decisions compare the smallest singular value against this fraction of
# the largest one.
RANK_RTOL = 1e-9

# Cap on the number of point subsets any exact combinatorial search may touch.
SUBSET_BUDGET = 10**6

_CHUNK = 4096


class SubsetBudgetExceeded(RuntimeError):
    """An exact subset search went past its configured budget."""


class BadSubspaceError(ValueError):
    """Basis vectors are dependent or span too large a subspace."""


class TooFewPointsError(ValueError):
    """Not enough off-center points for the requested statistic."""


@dataclass(frozen=True)
class DirectionSet:
    """Unit directions (z - t)/|z - t| of the off-center points, plus the
    count of points sitting exactly at the center."""

    directions: np.ndarray
    omitted_count: int


def direction_set(data: Dataset) -> DirectionSet:
    x = data.centered()
    norms = np.linalg.norm(x, axis=1)
    keep = norms > 0
    dirs = x[keep] / norms[keep, None]
    dirs.setflags(write=False)
    return DirectionSet(directions=dirs, omitted_count=int((~keep).sum()))


def _iter_index_chunks(n: int, k: int, chunk: int = _CHUNK):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)


def _full_rank_mask(mats: np.ndarray, rtol: float) -> np.ndarray:
    sv = np.linalg.svd(mats, compute_uv=False)
    return sv[:, -1] > rtol * sv[:, 0]


def is_general_position(data: Dataset, rank_rtol: float = RANK_RTOL) -> bool:
    """True iff every p-subset of centered points is linearly independent,
    i.e. any p points together with the center span R^p.

    Cost grows like C(n, p); intended for the small dimensions this package
    targets.
    """
    x = data.centered()
    n, p = x.shape
    if n < p:
        return False
    if (np.linalg.norm(x, axis=1) == 0).any():
        # a point at the center belongs to some p-subset and kills its rank
        return False
    for idx in _iter_index_chunks(n, p):
        if not _full_rank_mask(x[idx], rank_rtol).all():
            return False
    return True


def _subset_in_general_position(x: np.ndarray, idx: list[int], rtol: float) -> bool:
    # for k < p require the k vectors independent, else every p-subset full rank
    k = len(idx)
    p = x.shape[1]
    pts = x[np.asarray(idx, dtype=np.intp)]
    if k <= p:
        sv = np.linalg.svd(pts, compute_uv=False)
        return bool(sv[-1] > rtol * sv[0])
    for sub in itertools.combinations(range(k), p):
        sv = np.linalg.svd(pts[list(sub)], compute_uv=False)
        if sv[-1] <= rtol * sv[0]:
            return False
    return True


def general_position_count(
    data: Dataset,
    rank_rtol: float = RANK_RTOL,
    budget: int = SUBSET_BUDGET,
) -> int:
    """Size of the largest subset of the data in general position about the
    center.

    Fast path returns n when the whole set qualifies (or all off-center points
    do).  Otherwise an exact branch-and-bound search runs, visiting at most
    `budget` nodes before raising SubsetBudgetExceeded.
    """
    if is_general_position(data, rank_rtol):
        return data.n

    x = data.centered()
    p = x.shape[1]
    keep = np.linalg.norm(x, axis=1) > 0
    xs = x[keep]
    q = xs.shape[0]
    if q == 0:
        return 0
    sub = Dataset(xs + 0.0, np.zeros(p))
    if is_general_position(sub, rank_rtol):
        return q

    best = min(q, max(p - 1, 1))  # any single off-center point qualifies
    nodes = 0

    def compatible(chosen: list[int], j: int) -> bool:
        if len(chosen) + 1 <= p:
            return _subset_in_general_position(xs, chosen + [j], rank_rtol)
        for sub_idx in itertools.combinations(chosen, p - 1):
            pts = xs[list(sub_idx) + [j]]
            sv = np.linalg.svd(pts, compute_uv=False)
            if sv[-1] <= rank_rtol * sv[0]:
                return False
        return True

    def extend(chosen: list[int], start: int):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise SubsetBudgetExceeded(
                f"general-position search exceeded budget of {budget} nodes"
            )
        best = max(best, len(chosen))
        for j in range(start, q):
            if len(chosen) + (q - j) <= best:
                break
            if compatible(chosen, j):
                extend(chosen + [j], j + 1)

    extend([], 0)
    return best


def _orthonormal_rows(basis: np.ndarray, rtol: float) -> np.ndarray:
    if basis.size == 0:
        return basis.reshape(0, basis.shape[-1] if basis.ndim == 2 else 0)
    u, s, vt = np.linalg.svd(basis, full_matrices=False)
    rank = int((s > rtol * s[0]).sum()) if s.size else 0
    return vt[:rank]


def subspace_mass(data: Dataset, basis, tol: float = RANK_RTOL) -> float:
    """Fraction of points whose centered position lies in span(basis).

    basis is a (possibly empty) list of vectors spanning a subspace of rank
    at most p - 1; the empty basis denotes the rank-0 subspace {0}, whose mass
    counts points sitting exactly at the center.  Membership is judged on the
    orthogonal residual relative to the point's own length.
    """
    x = data.centered()
    n, p = x.shape
    basis = np.asarray(basis, dtype=float).reshape(-1, p) if len(basis) else np.zeros((0, p))
    k = basis.shape[0]
    if k >= p:
        raise BadSubspaceError(f"subspace rank must be < p = {p}")
    if k:
        q = _orthonormal_rows(basis, tol)
        if q.shape[0] < k:
            raise BadSubspaceError("basis vectors are linearly dependent")
        resid = x - (x @ q.T) @ q
    else:
        resid = x
    own = np.linalg.norm(x, axis=1)
    inside = np.linalg.norm(resid, axis=1) <= tol * own
    return float(inside.sum()) / n


@dataclass(frozen=True)
class ExistenceReport:
    """Evaluation of the two empirical-mass conditions that govern existence
    and uniqueness of the scatter solution.

    margin is the smallest slack in the sufficient (strict) inequality over
    the enumerated subspaces; worst_subspace_* locate where it binds.  The
    necessary condition is evaluated as mass <= 1 - (p - rank)/cap, reading an
    evident typo in the source condition as a minus sign; notes records the
    interpretation.
    """

    cond_2_2_i: bool
    cond_2_2_ii: bool
    n0: int
    worst_subspace_rank: int
    worst_subspace_mass: float
    margin: float
    notes: tuple[str, ...] = (
        "necessary condition read as mass(S) <= 1 - (p - rank(S))/cap",
        "subspace ranks enumerated over 0..p-1",
    )


def _candidate_subspaces(x: np.ndarray, rtol: float, budget: int):
    """Rank-0 plus every distinct span of up to p-1 centered data points.

    Only spans of data points can maximize empirical subspace mass, so this
    enumeration is exhaustive for the existence check.  Deduplicated by
    projector equality.
    """
    n, p = x.shape
    norms = np.linalg.norm(x, axis=1)
    nz = np.where(norms > 0)[0]
    yield 0, np.zeros((0, p))
    seen: set[bytes] = set()
    examined = 0
    for k in range(1, p):
        if math.comb(len(nz), k) + examined > budget:
            raise SubsetBudgetExceeded(
                f"subspace enumeration exceeded budget of {budget} subsets"
            )
        for idx in itertools.combinations(nz, k):
            examined += 1
            q = _orthonormal_rows(x[list(idx)], rtol)
            if q.shape[0] < k:
                continue  # degenerate span already covered at lower rank
            proj = q.T @ q
            key = np.round(proj, 9).tobytes()
            if key in seen:
                continue
            seen.add(key)
            yield k, q


def check_existence(
    data: Dataset,
    spec: WeightSpec,
    rank_rtol: float = RANK_RTOL,
    budget: int = SUBSET_BUDGET,
) -> ExistenceReport:
    """Evaluate the sufficient and necessary empirical-mass conditions for a
    positive definite scatter solution at this dataset and weight family."""
    x = data.centered()
    n, p = x.shape
    cap = spec.psi_max
    n0 = general_position_count(data, rank_rtol, budget)

    worst_rank = 0
    worst_mass = 0.0
    margin = math.inf
    ok_ii = True
    for rank, q in _candidate_subspaces(x, rank_rtol, budget):
        mass = subspace_mass(data, q, rank_rtol)
        bound_i = 1.0 - p / cap + min(1.0, n0 * rank / n) / cap
        slack = bound_i - mass
        if slack < margin:
            margin = slack
            worst_rank = rank
            worst_mass = mass
        if mass > 1.0 - (p - rank) / cap + 1e-12:
            ok_ii = False

    cond_i = margin > 0.0 and n0 > p * (p - 1)
    return ExistenceReport(
        cond_2_2_i=bool(cond_i),
        cond_2_2_ii=bool(ok_ii),
        n0=int(n0),
        worst_subspace_rank=int(worst_rank),
        worst_subspace_mass=float(worst_mass),
        margin=float(margin),
    )


def coplanarity_margin(data: Dataset, budget: int = SUBSET_BUDGET) -> float:
    """Minimum over p-subsets of off-center points of the smallest eigenvalue
    of the summed direction outer products.

    Zero exactly when those points fail general position about the center;
    the larger the value, the farther the configuration is from putting p
    points in a common hyperplane through the center.
    """
    ds = direction_set(data)
    dirs = ds.directions
    q, p = dirs.shape if dirs.size else (0, data.p)
    if q < p:
        raise TooFewPointsError(f"need at least p = {data.p} off-center points")
    if math.comb(q, p) > budget:
        raise SubsetBudgetExceeded(
            f"{math.comb(q, p)} direction subsets exceed budget of {budget}"
        )
    smallest = math.inf
    for idx in _iter_index_chunks(q, p):
        sub = dirs[idx]
        mats = np.einsum("bkp,bkq->bpq", sub, sub)
        eig = np.linalg.eigvalsh(mats)[:, 0]
        smallest = min(smallest, float(eig.min()))
    return max(smallest, 0.0)


def min_squared_radius(contamination: Dataset) -> float:
    """Smallest squared distance of the contaminating points from the center."""
    x = contamination.centered()
    return float((x * x).sum(axis=1).min())
