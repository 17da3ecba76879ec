"""Labeled numeric datasets: CSV ingestion, half-normal splits, min-max scaling.

Everything here is deliberately immutable: datasets and fitted parameters are
frozen dataclasses whose arrays are marked read-only, so they can be shared
freely between detectors and threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NORMAL = "normal"
ANOMALY = "anomaly"


class CsvParseError(ValueError):
    """A CSV file could not be interpreted as a labeled numeric dataset."""


def _read_only(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    """An N x M matrix of finite reals with per-row normal/anomaly flags.

    Attributes:
        values: float64 array of shape (n_rows, n_features).
        labels: bool array of shape (n_rows,); True marks an anomaly.
        feature_names: one name per column.
    """

    values: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=bool)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if labels.shape != (values.shape[0],):
            raise ValueError(
                f"labels length {labels.shape} does not match {values.shape[0]} rows"
            )
        if len(self.feature_names) != values.shape[1]:
            raise ValueError(
                f"{len(self.feature_names)} feature names for "
                f"{values.shape[1]} columns"
            )
        if not np.isfinite(values).all():
            raise ValueError("values must be finite (no NaN/Inf)")
        object.__setattr__(self, "values", _read_only(values))
        object.__setattr__(self, "labels", _read_only(labels))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def n_anomalies(self) -> int:
        return int(self.labels.sum())

    def take(self, rows: np.ndarray) -> LabeledDataset:
        """A new dataset made of the given row indices, in the given order."""
        return LabeledDataset(self.values[rows], self.labels[rows], self.feature_names)


@dataclass(frozen=True)
class EvalSplit:
    """Half the normals as training data, the rest plus all anomalies as test."""

    train: LabeledDataset
    test: LabeledDataset
    seed: int

    def __post_init__(self) -> None:
        if self.train.n_anomalies != 0:
            raise ValueError("train split must not contain anomalies")


@dataclass(frozen=True)
class MinMaxParams:
    """Per-dimension (min, max) pairs fitted on training data."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D arrays of equal length")
        if (mins > maxs).any():
            raise ValueError("min exceeds max in some dimension")
        object.__setattr__(self, "mins", _read_only(mins))
        object.__setattr__(self, "maxs", _read_only(maxs))

    @property
    def n_features(self) -> int:
        return self.mins.shape[0]


def load_csv(path: str | Path, label_column: str, anomaly_value: str) -> LabeledDataset:
    """Load a comma-delimited UTF-8 file with a header row into a dataset.

    Rows whose label cell equals ``anomaly_value`` (exact string match) are
    flagged anomalous; every other row is normal. All non-label columns must
    parse as finite reals.

    Args:
        path: file to read.
        label_column: header name of the label column.
        anomaly_value: label cell value that marks an anomaly.

    Raises:
        FileNotFoundError: if the file does not exist.
        CsvParseError: on a missing label column, zero feature columns,
            ragged rows, or a cell that does not parse as a finite number
            (the error names the 1-based data row and the column).
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        if label_column not in header:
            raise CsvParseError(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        if not feature_names:
            raise CsvParseError(f"{path}: zero feature columns")

        rows: list[list[float]] = []
        flags: list[bool] = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise CsvParseError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            flags.append(row[label_idx] == anomaly_value)
            parsed = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                name = header[i]
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvParseError(
                        f"{path}: row {row_no}, column {name!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise CsvParseError(
                        f"{path}: row {row_no}, column {name!r}: "
                        f"non-finite value {cell!r}"
                    )
                parsed.append(value)
            rows.append(parsed)

    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    return LabeledDataset(values, np.array(flags, dtype=bool), feature_names)


def save_csv(
    data: LabeledDataset,
    path: str | Path,
    label_column: str = "label",
    anomaly_value: str = ANOMALY,
    normal_value: str = NORMAL,
) -> None:
    """Write a dataset back to CSV; inverse of :func:`load_csv`.

    Floats are rendered with ``repr`` so values survive a round trip
    bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*data.feature_names, label_column])
        for row, is_anomaly in zip(data.values, data.labels):
            writer.writerow(
                [*(repr(float(v)) for v in row),
                 anomaly_value if is_anomaly else normal_value]
            )


def semi_supervised_split(data: LabeledDataset, seed: int) -> EvalSplit:
    """Split off half the normal rows for training, keyed on ``seed``.

    Normals are shuffled by a seeded uniform permutation; the first
    floor(n_normals / 2) become the training set and the remaining normals
    plus every anomaly become the test set. Row order inside each side
    follows the original file order. The same seed always yields the same
    membership.

    Raises:
        ValueError: with fewer than 2 normal rows.
    """
    normal_idx = np.flatnonzero(~data.labels)
    anomaly_idx = np.flatnonzero(data.labels)
    if normal_idx.size < 2:
        raise ValueError(f"need at least 2 normal rows, got {normal_idx.size}")
    perm = np.random.default_rng(seed).permutation(normal_idx.size)
    half = normal_idx.size // 2
    train_rows = np.sort(normal_idx[perm[:half]])
    test_rows = np.sort(np.concatenate([normal_idx[perm[half:]], anomaly_idx]))
    return EvalSplit(train=data.take(train_rows), test=data.take(test_rows), seed=seed)


def minmax_fit(train_values: np.ndarray) -> MinMaxParams:
    """Fit per-dimension (min, max) on training rows."""
    values = np.asarray(train_values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise ValueError("minmax_fit needs a nonempty 2-D training matrix")
    return MinMaxParams(mins=values.min(axis=0), maxs=values.max(axis=0))


def minmax_apply(params: MinMaxParams, values: np.ndarray) -> np.ndarray:
    """Map each value x to (x - min) / (max - min) with the fitted bounds.

    A constant training dimension (max == min) maps to 0. Values outside the
    training range are transformed by the same affine formula and may fall
    outside [0, 1]; nothing is clamped here.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != params.n_features:
        raise ValueError(
            f"expected {params.n_features} columns, got shape {values.shape}"
        )
    span = params.maxs - params.mins
    out = (values - params.mins) / np.where(span > 0.0, span, 1.0)
    out[:, span == 0.0] = 0.0
    return out
