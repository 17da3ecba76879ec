"""Histogram-based anomaly detection over input features and principal components.

The core detector sums log-smoothed histogram masses per dimension (lower
score = more anomalous); its extension scores the same histograms over all
principal components as additional dimensions, which exposes anomalies that
are unremarkable in every single feature but violate feature correlations.
LOF, isolation forest, and an 1NN-subsample detector are included as
comparison baselines, together with a seeded semi-supervised AUC benchmark.
"""

from spadplus.baselines import (
    HIGHER_IS_ANOMALOUS,
    LOWER_IS_ANOMALOUS,
    DetectorOutput,
    IForestModel,
    LofModel,
    SpModel,
    iforest_fit,
    iforest_score,
    iforest_scores,
    lof_fit,
    lof_score,
    lof_scores,
    sp_fit,
    sp_score,
    sp_scores,
)
from spadplus.dataset import (
    ANOMALY,
    NORMAL,
    CsvParseError,
    EvalSplit,
    LabeledDataset,
    MinMaxParams,
    load_csv,
    minmax_apply,
    minmax_fit,
    save_csv,
    semi_supervised_split,
)
from spadplus.evaluate import (
    BenchmarkReport,
    BenchmarkRow,
    DetectorParams,
    DetectorRunError,
    auc,
    benchmark,
    write_report_csv,
    write_report_markdown,
)
from spadplus.histogram import (
    HistogramModel,
    bin_index,
    default_bin_count,
    fit_histograms,
    spad_score,
    spad_scores,
)
from spadplus.model_io import ModelFormatError, SavedModel, load_model, save_model
from spadplus.pca import (
    PcaTransform,
    SpadPlusModel,
    fit_pca,
    fit_spad_plus,
    jacobi_eigh,
    pca_transform,
    spad_plus_score,
    spad_plus_scores,
    spad_variant_scores,
)
from spadplus.synth import correlated_gaussian_with_planted

__version__ = "0.1.0"

__all__ = [
    "ANOMALY",
    "NORMAL",
    "HIGHER_IS_ANOMALOUS",
    "LOWER_IS_ANOMALOUS",
    "BenchmarkReport",
    "BenchmarkRow",
    "CsvParseError",
    "DetectorOutput",
    "DetectorParams",
    "DetectorRunError",
    "EvalSplit",
    "HistogramModel",
    "IForestModel",
    "LabeledDataset",
    "LofModel",
    "MinMaxParams",
    "ModelFormatError",
    "PcaTransform",
    "SavedModel",
    "SpModel",
    "SpadPlusModel",
    "auc",
    "benchmark",
    "bin_index",
    "correlated_gaussian_with_planted",
    "default_bin_count",
    "fit_histograms",
    "fit_pca",
    "fit_spad_plus",
    "iforest_fit",
    "iforest_score",
    "iforest_scores",
    "jacobi_eigh",
    "load_csv",
    "load_model",
    "lof_fit",
    "lof_score",
    "lof_scores",
    "minmax_apply",
    "minmax_fit",
    "pca_transform",
    "save_csv",
    "save_model",
    "semi_supervised_split",
    "sp_fit",
    "sp_score",
    "sp_scores",
    "spad_plus_score",
    "spad_plus_scores",
    "spad_score",
    "spad_scores",
    "spad_variant_scores",
    "write_report_csv",
    "write_report_markdown",
]
