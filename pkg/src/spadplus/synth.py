"""Synthetic 2-D correlated-Gaussian data with correlation-violating plants.

The generator produces the canonical failure case for per-dimension
histogram scoring: normal points form a strongly correlated bivariate
Gaussian with unit marginals, and each planted anomaly sits well inside
one marginal standard deviation of both means yet on the wrong side of
the correlation axis, so it is only separable in the low-variance
principal direction.
"""

from __future__ import annotations

import numpy as np

from spadplus.dataset import LabeledDataset


def correlated_gaussian_with_planted(
    n_points: int,
    rho: float,
    n_planted: int,
    seed: int = 0,
) -> LabeledDataset:
    """Generate `n_points` correlated normals plus `n_planted` anomalies.

    Normals: x1 = z1, x2 = rho*z1 + sqrt(1 - rho^2)*z2 with z iid standard
    normal, giving unit marginal variances and correlation exactly rho.
    Planted points: (u1, -s*u2) with u1, u2 ~ Uniform[0.9, 1.0) and s the
    sign of rho (s = +1 at rho = 0). Each coordinate stays within one
    marginal standard deviation of its mean, while the pair opposes the
    correlation: at rho = 0.95 the Mahalanobis distance under the
    generating covariance exceeds 5.6, at rho = 0 it is about 1.3 (the
    plant is then deliberately unremarkable).

    Args:
        n_points: number of normal rows, at least 10.
        rho: correlation of the two features, |rho| < 1.
        n_planted: number of anomaly rows, at least 0.
        seed: RNG seed; fixed seed reproduces the dataset exactly.

    Returns:
        LabeledDataset with normal rows first, features ("x1", "x2").

    Raises:
        ValueError: n_points < 10, |rho| >= 1, or n_planted < 0.
    """
    if n_points < 10:
        raise ValueError(f"n_points must be >= 10, got {n_points}")
    if not -1.0 < rho < 1.0:
        raise ValueError(f"correlation must satisfy |rho| < 1, got {rho}")
    if n_planted < 0:
        raise ValueError(f"n_planted must be >= 0, got {n_planted}")
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n_points)
    z2 = rng.standard_normal(n_points)
    normals = np.column_stack([z1, rho * z1 + np.sqrt(1.0 - rho * rho) * z2])
    sign = 1.0 if rho >= 0.0 else -1.0
    u = rng.uniform(0.9, 1.0, size=(n_planted, 2))
    planted = np.column_stack([u[:, 0], -sign * u[:, 1]])
    values = np.vstack([normals, planted])
    labels = np.zeros(n_points + n_planted, dtype=bool)
    labels[n_points:] = True
    return LabeledDataset(values=values, labels=labels, feature_names=("x1", "x2"))
