"""AUC scoring and the repeated-run benchmark harness.

The benchmark applies one fixed protocol per dataset: split off half of the
normal rows for training (seeded), min-max normalize with parameters fitted
on the training half only, fit each detector on the normalized training
rows, score the normalized test rows, and reduce to AUC. Deterministic
detectors are run once and their AUC is replicated across repeats; random
detectors (iforest, sp) are run once per repeat with distinct seeds.

AUC uses the Mann-Whitney rank formulation with average ranks, so ties
count as half a win. Scores are oriented before ranking, which makes the
statistic exactly invariant to any strictly increasing transform of the
scores and to the (negate scores, flip orientation) involution.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from spadplus.baselines import (
    HIGHER_IS_ANOMALOUS,
    LOWER_IS_ANOMALOUS,
    DetectorOutput,
    iforest_fit,
    iforest_scores,
    lof_fit,
    lof_scores,
    sp_fit,
    sp_scores,
)
from spadplus.dataset import (
    LabeledDataset,
    minmax_apply,
    minmax_fit,
    semi_supervised_split,
)
from spadplus.histogram import fit_histograms, spad_scores
from spadplus.pca import Variant, fit_spad_plus, spad_plus_scores, spad_variant_scores

DETECTOR_NAMES = ("spad", "spad+", "lof", "iforest", "sp")
RANDOM_DETECTOR_NAMES = ("iforest", "sp")


class DetectorRunError(RuntimeError):
    """A detector failed during a benchmark run; carries the detector name."""

    def __init__(self, detector: str, dataset: str, cause: Exception) -> None:
        super().__init__(f"detector {detector!r} on dataset {dataset!r}: {cause}")
        self.detector = detector
        self.dataset = dataset


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks of `values` ascending; tied entries share the mean rank."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    # Group boundaries via != on adjacent sorted entries (diff() would
    # produce nan for infinities; equality comparison cannot).
    bounds = np.empty(n + 1, dtype=bool)
    bounds[0] = True
    bounds[-1] = True
    bounds[1:-1] = ordered[1:] != ordered[:-1]
    edges = np.flatnonzero(bounds)
    starts, stops = edges[:-1], edges[1:]
    group_rank = (starts + 1 + stops) / 2.0  # mean of 1-based ranks start+1..stop
    ranks = np.empty(n)
    ranks[order] = np.repeat(group_rank, stops - starts)
    return ranks


def auc(output: DetectorOutput, labels: np.ndarray) -> float:
    """Probability an anomaly outranks a normal point, ties counted half.

    Args:
        output: scores plus orientation from any detector.
        labels: boolean flags per test row, True = anomaly.

    Returns:
        AUC in [0, 1] via the Mann-Whitney rank-sum identity.

    Raises:
        ValueError: on length mismatch or single-class labels.
    """
    labels = np.asarray(labels, dtype=bool)
    scores = output.scores
    if labels.shape != scores.shape:
        raise ValueError(
            f"labels shape {labels.shape} does not match scores shape {scores.shape}"
        )
    n_anom = int(labels.sum())
    n_norm = labels.size - n_anom
    if n_anom == 0 or n_norm == 0:
        raise ValueError("AUC needs at least one anomaly and one normal label")
    oriented = scores if output.orientation == HIGHER_IS_ANOMALOUS else -scores
    ranks = _average_ranks(oriented)
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_anom * (n_anom + 1) / 2.0) / (n_anom * n_norm)


# ---------------------------------------------------------------------------
# Benchmark harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorParams:
    """Optional hyperparameter overrides shared across the detector set.

    Unset fields fall back to each detector's documented default: b =
    floor(log2 N) + 1 bins, k = floor(sqrt N) neighbors, 100 trees with
    a 256-row subsample for iforest, a 25-row subsample for sp. `psi`
    overrides both subsample sizes when given. `variant` reroutes spad+
    scoring to one of its component decompositions.
    """

    bin_count: int | None = None
    k: int | None = None
    trees: int = 100
    psi: int | None = None
    variant: Variant | None = None
    top_m: int | None = None

    def __post_init__(self) -> None:
        if self.bin_count is not None and self.bin_count < 1:
            raise ValueError(f"bin_count must be >= 1, got {self.bin_count}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.trees < 1:
            raise ValueError(f"trees must be >= 1, got {self.trees}")
        if self.psi is not None and self.psi < 1:
            raise ValueError(f"psi must be >= 1, got {self.psi}")
        if self.variant is not None and self.variant not in (
            "input_only",
            "pcs_only",
            "top_m_pcs",
        ):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.top_m is not None and self.variant != "top_m_pcs":
            raise ValueError("top_m is only meaningful with variant='top_m_pcs'")


@dataclass(frozen=True)
class BenchmarkRow:
    """One (detector, dataset) cell of the benchmark."""

    detector: str
    dataset: str
    mean_auc: float
    aucs: tuple[float, ...]
    seeds: tuple[int, ...]
    fit_seconds: float
    score_seconds: float

    def __post_init__(self) -> None:
        if not self.aucs:
            raise ValueError("row needs at least one AUC")
        if not all(0.0 <= a <= 1.0 for a in self.aucs):
            raise ValueError(f"AUC out of [0, 1]: {self.aucs}")
        if not 0.0 <= self.mean_auc <= 1.0:
            raise ValueError(f"mean AUC out of [0, 1]: {self.mean_auc}")
        if self.total_seconds <= 0.0:
            raise ValueError("runtime must be positive")

    @property
    def total_seconds(self) -> float:
        return self.fit_seconds + self.score_seconds


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]
    repeats: int
    split_seed: int

    def detectors(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.detector, None)
        return tuple(seen)

    def datasets(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.dataset, None)
        return tuple(seen)


def detector_display_name(name: str, params: DetectorParams) -> str:
    """Row label; spad+ variants are made explicit so reports self-describe."""
    if name == "spad+" and params.variant is not None:
        if params.variant == "top_m_pcs":
            return f"spad+/top_{params.top_m}_pcs"
        return f"spad+/{params.variant}"
    return name


def _fit_detector(name: str, train: np.ndarray, seed: int, p: DetectorParams):
    if name == "spad":
        return fit_histograms(train, bin_count=p.bin_count)
    if name == "spad+":
        return fit_spad_plus(train, bin_count=p.bin_count)
    if name == "lof":
        return lof_fit(train, k=p.k)
    if name == "iforest":
        return iforest_fit(train, trees=p.trees, psi=p.psi if p.psi else 256, seed=seed)
    if name == "sp":
        return sp_fit(train, psi=p.psi if p.psi else 25, seed=seed)
    raise ValueError(f"unknown detector {name!r}; expected one of {DETECTOR_NAMES}")


def _score_detector(name: str, model, test: np.ndarray, p: DetectorParams) -> DetectorOutput:
    if name == "spad":
        return DetectorOutput(spad_scores(model, test), LOWER_IS_ANOMALOUS)
    if name == "spad+":
        if p.variant is None:
            raw = spad_plus_scores(model, test)
        else:
            raw = spad_variant_scores(model, test, p.variant, top_m=p.top_m)
        return DetectorOutput(raw, LOWER_IS_ANOMALOUS)
    if name == "lof":
        return lof_scores(model, test)
    if name == "iforest":
        return iforest_scores(model, test)
    if name == "sp":
        return sp_scores(model, test)
    raise ValueError(f"unknown detector {name!r}; expected one of {DETECTOR_NAMES}")


def benchmark(
    datasets: Sequence[tuple[str, LabeledDataset]],
    detectors: Sequence[str],
    repeats: int = 10,
    split_seed: int = 0,
    detector_seeds: Sequence[int] | None = None,
    params: DetectorParams = DetectorParams(),
) -> BenchmarkReport:
    """Run every detector on every dataset under one split per dataset.

    Each dataset is split once with `split_seed`; all detectors see the
    identical normalized train/test pair. Random detectors run `repeats`
    times using `detector_seeds` (default: split_seed, split_seed + 1, ...);
    deterministic ones run once and the AUC is copied across repeats so
    every row carries `repeats` values. Fit and score phases are timed
    separately on a monotonic clock and summed over runs.

    Raises:
        ValueError: bad repeats/seeds/detector names, or a test split
            without both classes.
        DetectorRunError: a detector raised; the message names it.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    for name in detectors:
        if name not in DETECTOR_NAMES:
            raise ValueError(f"unknown detector {name!r}; expected one of {DETECTOR_NAMES}")
    if not detectors:
        raise ValueError("at least one detector is required")
    if detector_seeds is None:
        seeds = tuple(split_seed + i for i in range(repeats))
    else:
        seeds = tuple(int(s) for s in detector_seeds)
        if len(seeds) != repeats:
            raise ValueError(f"need {repeats} detector seeds, got {len(seeds)}")
        if len(set(seeds)) != len(seeds):
            raise ValueError("detector seeds must be distinct")

    rows: list[BenchmarkRow] = []
    for ds_name, data in datasets:
        split = semi_supervised_split(data, split_seed)
        if split.test.n_anomalies == 0:
            raise ValueError(f"dataset {ds_name!r}: no anomalies, AUC undefined")
        mm = minmax_fit(split.train.values)
        train = minmax_apply(mm, split.train.values)
        test = minmax_apply(mm, split.test.values)
        test_labels = split.test.labels

        for name in detectors:
            is_random = name in RANDOM_DETECTOR_NAMES
            run_seeds = seeds if is_random else seeds[:1]
            aucs: list[float] = []
            fit_s = 0.0
            score_s = 0.0
            for run_seed in run_seeds:
                try:
                    t0 = time.perf_counter()
                    model = _fit_detector(name, train, run_seed, params)
                    t1 = time.perf_counter()
                    out = _score_detector(name, model, test, params)
                    t2 = time.perf_counter()
                except DetectorRunError:
                    raise
                except Exception as exc:
                    raise DetectorRunError(name, ds_name, exc) from exc
                fit_s += t1 - t0
                score_s += t2 - t1
                aucs.append(auc(out, test_labels))
            if not is_random:
                aucs = aucs * repeats
            rows.append(
                BenchmarkRow(
                    detector=detector_display_name(name, params),
                    dataset=ds_name,
                    mean_auc=float(np.mean(aucs)),
                    aucs=tuple(aucs),
                    seeds=run_seeds if is_random else (),
                    fit_seconds=fit_s,
                    score_seconds=score_s,
                )
            )
    return BenchmarkReport(rows=tuple(rows), repeats=repeats, split_seed=split_seed)


# ---------------------------------------------------------------------------
# Report writers
# ---------------------------------------------------------------------------


def report_csv_lines(report: BenchmarkReport, include_timing: bool = True) -> list[str]:
    """CSV lines for the report; floats via repr() so output is bit-stable.

    With include_timing=False the timing columns are dropped, leaving only
    deterministic content: identical configuration and seeds then yield
    byte-identical lines.
    """
    header = ["dataset", "detector", "mean_auc", "runs", "aucs", "seeds"]
    if include_timing:
        header += ["fit_seconds", "score_seconds", "total_seconds"]
    lines = [",".join(header)]
    for row in report.rows:
        cells = [
            row.dataset,
            row.detector,
            repr(row.mean_auc),
            str(len(row.aucs)),
            ";".join(repr(a) for a in row.aucs),
            ";".join(str(s) for s in row.seeds),
        ]
        if include_timing:
            cells += [
                repr(row.fit_seconds),
                repr(row.score_seconds),
                repr(row.total_seconds),
            ]
        lines.append(",".join(cells))
    return lines


def write_report_csv(report: BenchmarkReport, path: str, include_timing: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(report_csv_lines(report, include_timing)) + "\n")


def _cell_map(report: BenchmarkReport) -> dict[tuple[str, str], BenchmarkRow]:
    return {(row.dataset, row.detector): row for row in report.rows}


def write_report_markdown(report: BenchmarkReport, path: str) -> None:
    """Markdown report: AUC table with an average-rank row, runtime table.

    Datasets are rows and detectors are columns. Ranks are assigned per
    dataset from mean AUC (1 = best) and tied detectors share the mean of
    the tied ranks; the average-rank row is the per-detector mean over
    datasets. That tie convention is ours, hence the footnote in the file.
    """
    detectors = report.detectors()
    datasets = report.datasets()
    cells = _cell_map(report)

    lines = [
        "# Benchmark report",
        "",
        f"Split seed {report.split_seed}; {report.repeats} repeats for random detectors.",
        "",
        "## Mean AUC",
        "",
        "| dataset | " + " | ".join(detectors) + " |",
        "|" + "---|" * (len(detectors) + 1),
    ]
    rank_sums = np.zeros(len(detectors))
    for ds in datasets:
        aucs = np.array([cells[(ds, det)].mean_auc for det in detectors])
        rank_sums += _average_ranks(-aucs)  # rank 1 = highest AUC
        lines.append("| " + ds + " | " + " | ".join(f"{a:.4f}" for a in aucs) + " |")
    avg_ranks = rank_sums / len(datasets)
    lines += [
        "| Avg. rank | " + " | ".join(f"{r:.2f}" for r in avg_ranks) + " |",
        "",
        "Ranks per dataset from mean AUC, 1 = best; ties share the mean of",
        "the tied ranks (this tool's convention).",
        "",
        "## Total runtime, fit + score, seconds",
        "",
        "| dataset | " + " | ".join(detectors) + " |",
        "|" + "---|" * (len(detectors) + 1),
    ]
    for ds in datasets:
        cols = " | ".join(f"{cells[(ds, det)].total_seconds:.3f}" for det in detectors)
        lines.append("| " + ds + " | " + cols + " |")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
