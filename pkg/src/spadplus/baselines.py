"""Comparison detectors: LOF, isolation forest, and Sp (1NN-in-subsample).

All three expose a fit function returning an immutable model plus a score
function over test rows, and every score batch is wrapped in a
:class:`DetectorOutput` carrying its orientation, because the conventions
differ: LOF and Sp grow with anomalousness, while isolation-forest path
lengths (and the histogram scores elsewhere in this package) shrink.

LOF is computed brute force over all pairwise distances (quadratic in the
training size) in memory-bounded blocks; that is the honest cost of the
method and exactly what makes it a useful runtime baseline. Neighborhood
ties (d <= d_k) are decided on squared euclidean distances from the
a^2 + b^2 - 2ab expansion; for integer-valued coordinates those squared
distances are exact, so lattice/grid tie semantics are preserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from spadplus.dataset import _read_only

HIGHER_IS_ANOMALOUS = "higher_is_anomalous"
LOWER_IS_ANOMALOUS = "lower_is_anomalous"
Orientation = Literal["higher_is_anomalous", "lower_is_anomalous"]

# Memory cap per distance block, in float64 entries (~128 MB).
_BLOCK_ENTRIES = 16_000_000


@dataclass(frozen=True)
class DetectorOutput:
    """Scores for a test batch plus the direction that means 'anomalous'."""

    scores: np.ndarray
    orientation: Orientation

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ValueError(f"scores must be 1-D, got shape {scores.shape}")
        if self.orientation not in (HIGHER_IS_ANOMALOUS, LOWER_IS_ANOMALOUS):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        object.__setattr__(self, "scores", _read_only(scores))


def _block_rows(n_cols: int) -> int:
    return max(1, _BLOCK_ENTRIES // max(1, n_cols))


def _sq_dists(queries: np.ndarray, points: np.ndarray, points_sq: np.ndarray) -> np.ndarray:
    """Squared euclidean distances, clamped at 0 against rounding."""
    q_sq = np.einsum("ij,ij->i", queries, queries)
    d = q_sq[:, None] + points_sq[None, :] - 2.0 * (queries @ points.T)
    np.maximum(d, 0.0, out=d)
    return d


# ---------------------------------------------------------------------------
# LOF
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LofModel:
    """Training data with precomputed k-distances and reachability densities.

    ``k_distance[i]`` is the euclidean distance from training point i to its
    k-th nearest neighbor (self excluded); ``lrd[i]`` its local reachability
    density. Both are finite and positive unless training rows coincide, in
    which case an lrd can be +inf (a zero-reach duplicate cluster).
    """

    train: np.ndarray
    k: int
    k_distance: np.ndarray
    lrd: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "train", _read_only(np.asarray(self.train, dtype=np.float64)))
        object.__setattr__(self, "k_distance", _read_only(np.asarray(self.k_distance, dtype=np.float64)))
        object.__setattr__(self, "lrd", _read_only(np.asarray(self.lrd, dtype=np.float64)))


def default_lof_k(train_size: int) -> int:
    """Default neighborhood size: floor(sqrt(N))."""
    return max(1, int(math.isqrt(train_size)))


def lof_fit(train_values: np.ndarray, k: int | None = None) -> LofModel:
    """Precompute k-distances and lrd for every training point.

    Neighborhoods include every point within the k-th neighbor distance, so
    they can exceed k under distance ties. Each training point is excluded
    from its own neighborhood.

    Raises:
        ValueError: if N <= k (needs at least k + 1 rows).
    """
    x = np.ascontiguousarray(train_values, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training set must be a nonempty 2-D matrix")
    n = x.shape[0]
    if k is None:
        k = default_lof_k(n)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    x_sq = np.einsum("ij,ij->i", x, x)
    block = _block_rows(n)

    # Pass 1: k-th neighbor squared distance per training point.
    dk_sq = np.empty(n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _sq_dists(x[start:stop], x, x_sq)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        dk_sq[start:stop] = np.partition(d, k - 1, axis=1)[:, k - 1]
    k_distance = np.sqrt(dk_sq)

    # Pass 2: reachability sums over tie-inclusive neighborhoods.
    lrd = np.empty(n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _sq_dists(x[start:stop], x, x_sq)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        in_nbr = d <= dk_sq[start:stop, None]
        reach = np.maximum(k_distance[None, :], np.sqrt(d))
        reach_sum = np.where(in_nbr, reach, 0.0).sum(axis=1)
        count = in_nbr.sum(axis=1)
        with np.errstate(divide="ignore"):
            lrd[start:stop] = np.where(reach_sum > 0.0, count / reach_sum, np.inf)

    return LofModel(train=x, k=k, k_distance=k_distance, lrd=lrd)


def lof_scores(model: LofModel, values: np.ndarray) -> DetectorOutput:
    """LOF of each test row against the training data; higher = anomalous.

    A test point with zero reach-distance sum (all its neighbors coincide
    with it) gets lrd = +inf; the score ratio then resolves as
    finite/inf = 0 and inf/inf = 1.
    """
    q = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if q.shape[1] != model.train.shape[1]:
        raise ValueError(
            f"expected {model.train.shape[1]} dimensions, got {q.shape[1]}"
        )
    x = model.train
    x_sq = np.einsum("ij,ij->i", x, x)
    n_q = q.shape[0]
    block = _block_rows(x.shape[0])
    scores = np.empty(n_q)
    for start in range(0, n_q, block):
        stop = min(start + block, n_q)
        d = _sq_dists(q[start:stop], x, x_sq)
        dk_sq = np.partition(d, model.k - 1, axis=1)[:, model.k - 1]
        in_nbr = d <= dk_sq[:, None]
        reach = np.maximum(model.k_distance[None, :], np.sqrt(d))
        reach_sum = np.where(in_nbr, reach, 0.0).sum(axis=1)
        count = in_nbr.sum(axis=1)
        with np.errstate(divide="ignore"):
            lrd_q = np.where(reach_sum > 0.0, count / reach_sum, np.inf)
        nbr_lrd_mean = np.where(in_nbr, model.lrd[None, :], 0.0).sum(axis=1) / count
        with np.errstate(invalid="ignore"):
            ratio = nbr_lrd_mean / lrd_q
        ratio[np.isnan(ratio)] = 1.0  # inf/inf: duplicate cluster against itself
        scores[start:stop] = ratio
    return DetectorOutput(scores=scores, orientation=HIGHER_IS_ANOMALOUS)


def lof_score(model: LofModel, x: np.ndarray) -> float:
    """LOF of a single point; higher = anomalous."""
    return float(lof_scores(model, np.atleast_2d(x)).scores[0])


# ---------------------------------------------------------------------------
# Isolation forest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Tree:
    """Flat array form of one isolation tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray


@dataclass(frozen=True)
class IForestModel:
    trees: tuple[_Tree, ...]
    n_features: int
    subsample_size: int
    height_limit: int
    seed: int
    path_adjustment: np.ndarray  # c(m) lookup, index = leaf instance count


def average_path_adjustment(m: int) -> float:
    """Expected extra path length c(m) for a leaf holding m instances.

    c(m) = 2 * (H(m - 1) - (m - 1) / m) with H the exact harmonic number;
    c(0) = c(1) = 0.
    """
    if m <= 1:
        return 0.0
    harmonic = sum(1.0 / i for i in range(1, m))
    return 2.0 * (harmonic - (m - 1) / m)


def _adjustment_table(max_m: int) -> np.ndarray:
    table = np.zeros(max_m + 1)
    if max_m >= 2:
        harmonic = np.cumsum(1.0 / np.arange(1, max_m))  # H(1) .. H(max_m - 1)
        ms = np.arange(2, max_m + 1)
        table[2:] = 2.0 * (harmonic[ms - 2] - (ms - 1) / ms)
    return table


def _build_tree(
    data: np.ndarray, height_limit: int, rng: np.random.Generator
) -> _Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    size: list[int] = []

    def grow(rows: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        size.append(rows.shape[0])
        if rows.shape[0] <= 1 or depth >= height_limit:
            return node
        lo = rows.min(axis=0)
        hi = rows.max(axis=0)
        spread = np.flatnonzero(hi > lo)
        if spread.size == 0:  # all dimensions constant: nothing left to split
            return node
        dim = int(rng.choice(spread))
        while True:
            split = float(rng.uniform(lo[dim], hi[dim]))
            if split > lo[dim]:
                break
        mask = rows[:, dim] < split
        feature[node] = dim
        threshold[node] = split
        left[node] = grow(rows[mask], depth + 1)
        right[node] = grow(rows[~mask], depth + 1)
        return node

    grow(data, 0)
    return _Tree(
        feature=_read_only(np.array(feature, dtype=np.int64)),
        threshold=_read_only(np.array(threshold, dtype=np.float64)),
        left=_read_only(np.array(left, dtype=np.int64)),
        right=_read_only(np.array(right, dtype=np.int64)),
        size=_read_only(np.array(size, dtype=np.int64)),
    )


def iforest_fit(
    train_values: np.ndarray, trees: int = 100, psi: int = 256, seed: int = 0
) -> IForestModel:
    """Build an ensemble of random isolation trees.

    Each tree gets min(psi, N) rows sampled without replacement and is grown
    to height at most floor(log2 of that subsample size). Split dimensions
    are drawn uniformly among dimensions with nonzero spread at the node and
    split values uniformly strictly inside the node's (min, max) on that
    dimension, so both children are nonempty.

    Raises:
        ValueError: with fewer than 2 training rows or fewer than 1 tree.
    """
    x = np.ascontiguousarray(train_values, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("isolation forest needs at least 2 training rows")
    if trees < 1:
        raise ValueError(f"need at least 1 tree, got {trees}")
    n = x.shape[0]
    psi_eff = min(psi, n)
    if psi_eff < 2:
        raise ValueError(f"subsample size must be >= 2, got {psi_eff}")
    height_limit = int(math.log2(psi_eff))
    rng = np.random.default_rng(seed)
    built = tuple(
        _build_tree(x[rng.choice(n, size=psi_eff, replace=False)], height_limit, rng)
        for _ in range(trees)
    )
    return IForestModel(
        trees=built,
        n_features=x.shape[1],
        subsample_size=psi_eff,
        height_limit=height_limit,
        seed=seed,
        path_adjustment=_read_only(_adjustment_table(psi_eff)),
    )


def iforest_scores(model: IForestModel, values: np.ndarray) -> DetectorOutput:
    """Mean path length over all trees; LOWER = more anomalous.

    Per tree, the contribution is the edge count from root to the reached
    leaf plus c(m) when the leaf holds m > 1 instances. The 2^(-E/c(psi))
    rescaling some implementations apply is a monotone transform and is
    deliberately omitted.
    """
    q = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if q.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} dimensions, got {q.shape[1]}")
    n_q = q.shape[0]
    total = np.zeros(n_q)
    row_ids = np.arange(n_q)
    for tree in model.trees:
        pos = np.zeros(n_q, dtype=np.int64)
        depth = np.zeros(n_q)
        for _ in range(model.height_limit):
            feat = tree.feature[pos]
            interior = feat >= 0
            if not interior.any():
                break
            go_left = q[row_ids, np.where(interior, feat, 0)] < tree.threshold[pos]
            child = np.where(go_left, tree.left[pos], tree.right[pos])
            pos = np.where(interior, child, pos)
            depth += interior
        total += depth + model.path_adjustment[tree.size[pos]]
    return DetectorOutput(scores=total / len(model.trees), orientation=LOWER_IS_ANOMALOUS)


def iforest_score(model: IForestModel, x: np.ndarray) -> float:
    """Mean path length of a single point; lower = anomalous."""
    return float(iforest_scores(model, np.atleast_2d(x)).scores[0])


# ---------------------------------------------------------------------------
# Sp
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpModel:
    """A small training subsample; scoring is 1NN distance into it."""

    subsample: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        sub = np.asarray(self.subsample, dtype=np.float64)
        if sub.ndim != 2 or sub.shape[0] == 0:
            raise ValueError("subsample must be a nonempty 2-D matrix")
        object.__setattr__(self, "subsample", _read_only(sub))


def sp_fit(train_values: np.ndarray, psi: int = 25, seed: int = 0) -> SpModel:
    """Draw min(psi, N) training rows without replacement."""
    x = np.asarray(train_values, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training set must be a nonempty 2-D matrix")
    rng = np.random.default_rng(seed)
    idx = rng.choice(x.shape[0], size=min(psi, x.shape[0]), replace=False)
    return SpModel(subsample=x[idx], seed=seed)


def sp_scores(model: SpModel, values: np.ndarray) -> DetectorOutput:
    """Euclidean distance to the nearest subsample member; higher = anomalous."""
    q = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if q.shape[1] != model.subsample.shape[1]:
        raise ValueError(
            f"expected {model.subsample.shape[1]} dimensions, got {q.shape[1]}"
        )
    # Explicit differences (not the gemm expansion): the full-scan oracle
    # contract is exact equality, and psi is small anyway.
    diff = q[:, None, :] - model.subsample[None, :, :]
    dists = np.sqrt((diff * diff).sum(axis=2))
    return DetectorOutput(scores=dists.min(axis=1), orientation=HIGHER_IS_ANOMALOUS)


def sp_score(model: SpModel, x: np.ndarray) -> float:
    """Nearest-subsample distance of a single point; higher = anomalous."""
    return float(sp_scores(model, np.atleast_2d(x)).scores[0])
