"""Text serialization of fitted histogram detectors for the fit/score handoff.

The format is a flat, self-describing, line-oriented text file:

    spadplus-model 1
    kind spad+
    minmax <M>
    mins <m_1> ... <m_M>
    maxs <M_1> ... <M_M>
    histogram input <N> <M> <b>
    dim 0 <mu> <sigma> <count_0> ... <count_{b-1}>
    ...
    pca <M>
    mean <...>
    eigenvalues <...>
    component 0 <row-major row 0 of the components matrix>
    ...
    histogram pc <N> <M> <b>
    dim 0 ...

A plain SPAD model stops after the input histogram block. All floats are
written with repr(), so save -> load -> score is bit-identical to scoring
with the in-memory model.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spadplus.dataset import MinMaxParams
from spadplus.histogram import HistogramModel
from spadplus.pca import PcaTransform, SpadPlusModel

_MAGIC = "spadplus-model"
_VERSION = "1"


class ModelFormatError(ValueError):
    """A model file is missing, truncated, or malformed."""


@dataclass(frozen=True)
class SavedModel:
    """A fitted detector plus the normalization fitted on its training data."""

    kind: str  # "spad" | "spad+"
    model: HistogramModel | SpadPlusModel
    minmax: MinMaxParams

    def __post_init__(self) -> None:
        if self.kind == "spad":
            if not isinstance(self.model, HistogramModel):
                raise ValueError("kind 'spad' requires a HistogramModel")
        elif self.kind == "spad+":
            if not isinstance(self.model, SpadPlusModel):
                raise ValueError("kind 'spad+' requires a SpadPlusModel")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")
        m = self.minmax.n_features
        hist = self.model if self.kind == "spad" else self.model.input_hist
        if hist.n_features != m:
            raise ValueError(
                f"model has {hist.n_features} features but minmax has {m}"
            )

    @property
    def n_features(self) -> int:
        return self.minmax.n_features


def _floats(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in values)


def _hist_lines(tag: str, hist: HistogramModel) -> list[str]:
    lines = [f"histogram {tag} {hist.train_size} {hist.n_features} {hist.bin_count}"]
    for i in range(hist.n_features):
        counts = " ".join(str(int(c)) for c in hist.counts[i])
        mu, sigma = repr(float(hist.mu[i])), repr(float(hist.sigma[i]))
        lines.append(f"dim {i} {mu} {sigma} {counts}")
    return lines


def save_model(saved: SavedModel, path: str | Path) -> None:
    """Write a fitted SPAD or SPAD+ model with its normalization to `path`."""
    lines = [f"{_MAGIC} {_VERSION}", f"kind {saved.kind}"]
    lines.append(f"minmax {saved.minmax.n_features}")
    lines.append("mins " + _floats(saved.minmax.mins))
    lines.append("maxs " + _floats(saved.minmax.maxs))
    if saved.kind == "spad":
        lines += _hist_lines("input", saved.model)
    else:
        model: SpadPlusModel = saved.model
        lines += _hist_lines("input", model.input_hist)
        t = model.transform
        lines.append(f"pca {t.n_features}")
        lines.append("mean " + _floats(t.mean))
        lines.append("eigenvalues " + _floats(t.eigenvalues))
        for i in range(t.n_features):
            lines.append(f"component {i} " + _floats(t.components[i]))
        lines += _hist_lines("pc", model.pc_hist)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


class _LineReader:
    """Sequential reader that raises ModelFormatError with line context."""

    def __init__(self, path: Path, lines: list[str]) -> None:
        self.path = path
        self.lines = lines
        self.pos = 0

    def next(self, expect: str) -> list[str]:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"{self.path}: truncated file, expected {expect!r}")
        line = self.lines[self.pos]
        self.pos += 1
        tokens = line.split()
        if not tokens or tokens[0] != expect:
            raise ModelFormatError(
                f"{self.path}: line {self.pos}: expected {expect!r}, got {line!r}"
            )
        return tokens[1:]

    def fail(self, message: str) -> ModelFormatError:
        return ModelFormatError(f"{self.path}: line {self.pos}: {message}")

    def next_one(self, expect: str, what: str) -> str:
        tokens = self.next(expect)
        if len(tokens) != 1:
            raise self.fail(f"{what}: expected one value, got {len(tokens)}")
        return tokens[0]


def _parse_int(reader: _LineReader, token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise reader.fail(f"bad {what}: {token!r}") from None


def _parse_floats(reader: _LineReader, tokens: list[str], count: int, what: str) -> np.ndarray:
    if len(tokens) != count:
        raise reader.fail(f"{what}: expected {count} values, got {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError:
        raise reader.fail(f"{what}: non-numeric value") from None


def _read_hist(reader: _LineReader, tag: str) -> HistogramModel:
    head = reader.next("histogram")
    if len(head) != 4 or head[0] != tag:
        raise reader.fail(f"expected 'histogram {tag} N M b' header")
    n = _parse_int(reader, head[1], "N")
    m = _parse_int(reader, head[2], "M")
    b = _parse_int(reader, head[3], "b")
    mu = np.empty(m)
    sigma = np.empty(m)
    counts = np.empty((m, b), dtype=np.int64)
    for i in range(m):
        tokens = reader.next("dim")
        if len(tokens) != 3 + b:
            raise reader.fail(f"dim line: expected {3 + b} fields, got {len(tokens)}")
        if _parse_int(reader, tokens[0], "dim index") != i:
            raise reader.fail(f"dim lines out of order at index {tokens[0]}")
        mu[i] = _parse_floats(reader, tokens[1:2], 1, "mu")[0]
        sigma[i] = _parse_floats(reader, tokens[2:3], 1, "sigma")[0]
        for j, tok in enumerate(tokens[3:]):
            counts[i, j] = _parse_int(reader, tok, "bin count")
    try:
        return HistogramModel(mu=mu, sigma=sigma, bin_count=b, counts=counts, train_size=n)
    except ValueError as exc:
        raise reader.fail(f"inconsistent {tag} histogram: {exc}") from None


def load_model(path: str | Path) -> SavedModel:
    """Read a model file written by :func:`save_model`.

    Raises:
        FileNotFoundError: missing file.
        ModelFormatError: anything structurally wrong, with line context.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = [line.rstrip("\n") for line in fh]
    reader = _LineReader(path, [line for line in raw if line.strip()])

    magic = reader.next(_MAGIC)
    if magic != [_VERSION]:
        raise reader.fail(f"unsupported version {magic!r}, expected {_VERSION!r}")
    kind = reader.next_one("kind", "kind")
    if kind not in ("spad", "spad+"):
        raise reader.fail(f"unknown kind {kind!r}")
    m = _parse_int(reader, reader.next_one("minmax", "dimension count"), "dimension count")
    mins = _parse_floats(reader, reader.next("mins"), m, "mins")
    maxs = _parse_floats(reader, reader.next("maxs"), m, "maxs")
    try:
        minmax = MinMaxParams(mins=mins, maxs=maxs)
    except ValueError as exc:
        raise reader.fail(f"bad minmax block: {exc}") from None

    input_hist = _read_hist(reader, "input")
    if kind == "spad":
        try:
            saved = SavedModel(kind="spad", model=input_hist, minmax=minmax)
        except ValueError as exc:
            raise reader.fail(f"inconsistent model: {exc}") from None
    else:
        pca_m = _parse_int(
            reader, reader.next_one("pca", "pca dimension count"), "pca dimension count"
        )
        mean = _parse_floats(reader, reader.next("mean"), pca_m, "mean")
        eigenvalues = _parse_floats(
            reader, reader.next("eigenvalues"), pca_m, "eigenvalues"
        )
        components = np.empty((pca_m, pca_m))
        for i in range(pca_m):
            tokens = reader.next("component")
            if not tokens or _parse_int(reader, tokens[0], "component index") != i:
                raise reader.fail("component rows out of order")
            components[i] = _parse_floats(reader, tokens[1:], pca_m, "component row")
        pc_hist = _read_hist(reader, "pc")
        try:
            transform = PcaTransform(
                mean=mean, components=components, eigenvalues=eigenvalues
            )
            model = SpadPlusModel(
                input_hist=input_hist, pc_hist=pc_hist, transform=transform
            )
            saved = SavedModel(kind="spad+", model=model, minmax=minmax)
        except ValueError as exc:
            raise reader.fail(f"inconsistent model: {exc}") from None
    if reader.pos != len(reader.lines):
        raise reader.fail("trailing content after model body")
    return saved
