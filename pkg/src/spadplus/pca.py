"""Covariance PCA and dual-space histogram scoring.

A strongly correlated feature pair can hide an anomaly that looks ordinary in
every single dimension. Projecting onto the principal components of the
training covariance turns that correlation violation into a one-dimensional
outlier (typically in a low-variance component), where per-dimension
histograms can see it again. Scoring therefore sums the histogram log-mass
terms of the input space AND of the full PC space - all M components are
kept, because low-variance components are precisely where correlation-
breaking instances stick out.

The eigensolver is a hand-rolled cyclic Jacobi iteration: deterministic,
dependency-free, and entirely adequate for the feature counts this library
targets (hundreds of dimensions).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from spadplus.dataset import _read_only
from spadplus.histogram import (
    HistogramModel,
    fit_histograms,
    log_mass_terms,
    spad_scores,
)

Variant = Literal["input_only", "pcs_only", "top_m_pcs"]


def _offdiag_norm(a: np.ndarray) -> float:
    upper = np.triu(a, k=1)
    return float(np.sqrt(2.0 * np.sum(upper * upper)))


def jacobi_eigh(
    matrix: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away every off-diagonal entry in a fixed (p, q) order until
    the off-diagonal Frobenius norm drops below ``tol``. Convergence is
    quadratic, so the default budget of 100 sweeps is generous.

    Note: ``tol`` is absolute. Matrices with entries many orders of magnitude
    above 1 may need a correspondingly scaled tolerance.

    Args:
        matrix: symmetric (m, m) array.
        tol: absolute off-diagonal Frobenius norm at which to stop.
        max_sweeps: sweep budget before giving up.

    Returns:
        (eigenvalues, eigenvectors): eigenvalues sorted descending and the
        matrix whose column j is the unit eigenvector for eigenvalue j, with
        each column's largest-magnitude entry made positive.

    Raises:
        ValueError: if the input is not square and symmetric.
        RuntimeError: if the sweep budget is exhausted (reports the residual).
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-8 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    m = a.shape[0]
    a = (a + a.T) / 2.0
    v = np.eye(m)

    sweeps = 0
    off = _offdiag_norm(a)
    while off >= tol:
        if sweeps >= max_sweeps:
            raise RuntimeError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal residual {off:.3e}, tolerance {tol:.1e})"
            )
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        sweeps += 1
        off = _offdiag_norm(a)

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    # Sign convention: largest-magnitude entry of each column is positive.
    pivot = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[pivot, np.arange(m)] < 0.0
    vectors[:, flip] *= -1.0
    return eigenvalues, vectors


@dataclass(frozen=True)
class PcaTransform:
    """Centering vector plus an orthonormal eigenvector basis.

    Columns of ``components`` are unit eigenvectors of the training
    covariance matrix (1/(N-1) scaling), ordered by descending eigenvalue.
    Transforming an instance x gives x' = components^T (x - mean).
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        components = np.asarray(self.components, dtype=np.float64)
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        m = mean.shape[0]
        if mean.ndim != 1 or components.shape != (m, m) or eigenvalues.shape != (m,):
            raise ValueError("inconsistent transform shapes")
        if (eigenvalues < 0.0).any():
            raise ValueError("eigenvalues must be nonnegative")
        if (np.diff(eigenvalues) > 0.0).any():
            raise ValueError("eigenvalues must be sorted descending")
        object.__setattr__(self, "mean", _read_only(mean))
        object.__setattr__(self, "components", _read_only(components))
        object.__setattr__(self, "eigenvalues", _read_only(eigenvalues))

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def fit_pca(train_values: np.ndarray, tol: float = 1e-10) -> PcaTransform:
    """Fit the PCA transform on training rows.

    Args:
        train_values: array of shape (n_rows, n_features) with n_rows >= 2.
        tol: Jacobi convergence tolerance (absolute off-diagonal norm).

    Raises:
        ValueError: with fewer than 2 rows.
        RuntimeError: if the eigensolver fails to converge.
    """
    values = np.asarray(train_values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {values.shape}")
    n = values.shape[0]
    if n < 2:
        raise ValueError(f"PCA needs at least 2 rows, got {n}")
    mean = values.mean(axis=0)
    centered = values - mean
    covariance = centered.T @ centered / (n - 1)
    eigenvalues, components = jacobi_eigh(covariance, tol=tol)
    # Covariance eigenvalues are nonnegative up to rounding; clamp the dust.
    eigenvalues = np.maximum(eigenvalues, 0.0)
    return PcaTransform(mean=mean, components=components, eigenvalues=eigenvalues)


def pca_transform(transform: PcaTransform, values: np.ndarray) -> np.ndarray:
    """Project instances into PC space: x' = components^T (x - mean).

    Accepts a single M-vector or an (n, M) batch and returns the same shape.
    """
    values = np.asarray(values, dtype=np.float64)
    single = values.ndim == 1
    batch = np.atleast_2d(values)
    if batch.shape[1] != transform.n_features:
        raise ValueError(
            f"expected {transform.n_features} dimensions, got {batch.shape[1]}"
        )
    projected = (batch - transform.mean) @ transform.components
    return projected[0] if single else projected


@dataclass(frozen=True)
class SpadPlusModel:
    """Histogram models over the input space and the full PC space."""

    input_hist: HistogramModel
    pc_hist: HistogramModel
    transform: PcaTransform

    def __post_init__(self) -> None:
        if self.input_hist.train_size != self.pc_hist.train_size:
            raise ValueError("input and PC histograms disagree on train size")
        if self.input_hist.bin_count != self.pc_hist.bin_count:
            raise ValueError("input and PC histograms disagree on bin count")
        if self.pc_hist.n_features != self.input_hist.n_features:
            raise ValueError("PC histogram must keep all input dimensions")

    @property
    def n_features(self) -> int:
        return self.input_hist.n_features


def fit_spad_plus(train_values: np.ndarray, bin_count: int | None = None) -> SpadPlusModel:
    """Fit PCA plus histograms in both spaces, sharing one bin count.

    PC-space values are histogrammed raw (no re-normalization): the
    mu +/- 3*sigma bin range already adapts to each component's scale.
    """
    values = np.asarray(train_values, dtype=np.float64)
    transform = fit_pca(values)
    input_hist = fit_histograms(values, bin_count)
    pc_hist = fit_histograms(pca_transform(transform, values), input_hist.bin_count)
    return SpadPlusModel(input_hist=input_hist, pc_hist=pc_hist, transform=transform)


def spad_plus_scores(model: SpadPlusModel, values: np.ndarray) -> np.ndarray:
    """Dual-space scores for a batch of rows; lower = more anomalous."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    input_part = spad_scores(model.input_hist, values)
    pc_part = spad_scores(model.pc_hist, pca_transform(model.transform, values))
    return input_part + pc_part


def spad_plus_score(model: SpadPlusModel, x: np.ndarray) -> float:
    """Dual-space score of a single instance; lower = more anomalous."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected an M-vector, got shape {x.shape}")
    return float(spad_plus_scores(model, x[np.newaxis, :])[0])


def spad_variant_scores(
    model: SpadPlusModel,
    values: np.ndarray,
    variant: Variant,
    top_m: int | None = None,
) -> np.ndarray:
    """Ablation scores: input terms only, PC terms only, or input + top-m PCs.

    ``top_m_pcs`` keeps the input-space sum and adds the first ``top_m``
    PC terms in eigenvalue-descending order; ``top_m = M`` reproduces the
    full dual-space score exactly.

    Raises:
        ValueError: on an unknown variant or top_m outside [1, M].
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if variant == "input_only":
        return spad_scores(model.input_hist, values)
    pc_values = pca_transform(model.transform, values)
    if variant == "pcs_only":
        return spad_scores(model.pc_hist, pc_values)
    if variant == "top_m_pcs":
        m = model.n_features
        if top_m is None or not 1 <= top_m <= m:
            raise ValueError(f"top_m must be in [1, {m}], got {top_m}")
        input_part = spad_scores(model.input_hist, values)
        pc_terms = log_mass_terms(model.pc_hist, pc_values)
        return input_part + pc_terms[:, :top_m].sum(axis=1)
    raise ValueError(f"unknown variant {variant!r}")
