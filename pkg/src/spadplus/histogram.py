"""Per-dimension modified equal-width histograms and the SPAD log-mass score.

Each dimension i of the training data gets b equal-width bins spanning
[mu_i - 3*sigma_i, mu_i + 3*sigma_i] (variance-adaptive rather than
min/max-adaptive, which keeps skewed tails from stretching the bins).
The anomaly score of an instance is the sum over dimensions of

    log((count of the bin holding x_i + 1) / (N + b))

i.e. the log of a Laplace-smoothed product of per-dimension probability
masses. Lower scores mean more anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from spadplus.dataset import _read_only


def default_bin_count(train_size: int) -> int:
    """Default number of bins: floor(log2 N) + 1."""
    if train_size < 1:
        raise ValueError("train_size must be >= 1")
    return int(math.log2(train_size)) + 1


@dataclass(frozen=True)
class HistogramModel:
    """Fitted per-dimension histograms.

    Attributes:
        mu: per-dimension training means, shape (n_features,).
        sigma: per-dimension population standard deviations, shape
            (n_features,). A zero entry collapses that dimension to a single
            effective bin.
        bin_count: number of equal-width bins b shared by every dimension.
        counts: int64 array of shape (n_features, bin_count); row i holds the
            training occupancy of dimension i's bins and sums to train_size.
        train_size: number of training rows N.
    """

    mu: np.ndarray
    sigma: np.ndarray
    bin_count: int
    counts: np.ndarray
    train_size: int

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if mu.ndim != 1 or sigma.shape != mu.shape:
            raise ValueError("mu and sigma must be 1-D arrays of equal length")
        if self.bin_count < 1:
            raise ValueError(f"bin_count must be >= 1, got {self.bin_count}")
        if (sigma < 0.0).any():
            raise ValueError("sigma must be nonnegative")
        if counts.shape != (mu.shape[0], self.bin_count):
            raise ValueError(
                f"counts shape {counts.shape} does not match "
                f"({mu.shape[0]}, {self.bin_count})"
            )
        if (counts < 0).any() or (counts.sum(axis=1) != self.train_size).any():
            raise ValueError("each dimension's counts must sum to train_size")
        object.__setattr__(self, "mu", _read_only(mu))
        object.__setattr__(self, "sigma", _read_only(sigma))
        object.__setattr__(self, "counts", _read_only(counts))

    @property
    def n_features(self) -> int:
        return self.mu.shape[0]


def _bin_indices(
    mu: np.ndarray, sigma: np.ndarray, bin_count: int, values: np.ndarray
) -> np.ndarray:
    """Vectorized bin assignment; total over the reals.

    index = floor((x - (mu - 3*sigma)) / (6*sigma / b)), clamped into
    [0, b - 1]; dimensions with sigma == 0 always map to bin 0.
    """
    width = 6.0 * sigma / bin_count
    raw = (values - (mu - 3.0 * sigma)) / np.where(width > 0.0, width, 1.0)
    idx = np.clip(np.floor(raw), 0, bin_count - 1).astype(np.int64)
    return np.where(width > 0.0, idx, 0)


def fit_histograms(train_values: np.ndarray, bin_count: int | None = None) -> HistogramModel:
    """Fit one histogram per dimension on the training matrix.

    Args:
        train_values: array of shape (n_rows, n_features), n_rows >= 1.
        bin_count: override for b; defaults to floor(log2 N) + 1.

    Raises:
        ValueError: on an empty training set or bin_count < 1.
    """
    values = np.asarray(train_values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise ValueError("training set must be a nonempty 2-D matrix")
    n, m = values.shape
    b = default_bin_count(n) if bin_count is None else int(bin_count)
    if b < 1:
        raise ValueError(f"bin_count must be >= 1, got {b}")
    mu = values.mean(axis=0)
    sigma = values.std(axis=0)  # population std (ddof=0): describes the sample itself
    idx = _bin_indices(mu, sigma, b, values)
    counts = np.zeros((m, b), dtype=np.int64)
    for j in range(m):
        counts[j] = np.bincount(idx[:, j], minlength=b)
    return HistogramModel(mu=mu, sigma=sigma, bin_count=b, counts=counts, train_size=n)


def bin_index(model: HistogramModel, dim: int, x: float) -> int:
    """Bin of value ``x`` in dimension ``dim``; always in [0, bin_count - 1]."""
    if not 0 <= dim < model.n_features:
        raise ValueError(f"dimension {dim} out of range for {model.n_features} features")
    idx = _bin_indices(
        model.mu[dim : dim + 1],
        model.sigma[dim : dim + 1],
        model.bin_count,
        np.array([x], dtype=np.float64),
    )
    return int(idx[0])


def log_mass_terms(model: HistogramModel, values: np.ndarray) -> np.ndarray:
    """Per-dimension score terms log((count + 1) / (N + b)).

    Args:
        values: array of shape (n_rows, n_features).

    Returns:
        Array of shape (n_rows, n_features); summing a row gives the score.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} dimensions, got {values.shape[1]}"
        )
    idx = _bin_indices(model.mu, model.sigma, model.bin_count, values)
    hit = model.counts[np.arange(model.n_features), idx]
    return np.log((hit + 1.0) / (model.train_size + model.bin_count))


def spad_scores(model: HistogramModel, values: np.ndarray) -> np.ndarray:
    """SPAD scores for a batch of rows; lower = more anomalous."""
    return log_mass_terms(model, values).sum(axis=1)


def spad_score(model: HistogramModel, x: np.ndarray) -> float:
    """SPAD score of a single instance; lower = more anomalous."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected an M-vector, got shape {x.shape}")
    return float(spad_scores(model, x[np.newaxis, :])[0])
