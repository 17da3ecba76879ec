"""Command-line front end: fit, score, bench, and synth subcommands.

Pipeline order is fixed and identical everywhere: load -> (split) ->
min-max fit on training rows only -> apply to train and test -> fit
detectors on train -> score test -> AUC -> report. `fit` trains on the
normal rows of its input and serializes the model together with the
fitted normalization; `score` replays that normalization, so a saved
model scores data exactly as the in-memory pipeline would.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 parse or
model-format error, 5 detector failure. Every failure prints a one-line
"error: ..." diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from spadplus.dataset import CsvParseError, load_csv, minmax_apply, minmax_fit, save_csv
from spadplus.evaluate import (
    DETECTOR_NAMES,
    DetectorParams,
    DetectorRunError,
    benchmark,
    report_csv_lines,
    write_report_csv,
    write_report_markdown,
)
from spadplus.histogram import fit_histograms, spad_scores
from spadplus.model_io import ModelFormatError, SavedModel, load_model, save_model
from spadplus.pca import fit_spad_plus, spad_plus_scores, spad_variant_scores
from spadplus.synth import correlated_gaussian_with_planted

_EXIT_CONFIG = 2
_EXIT_IO = 3
_EXIT_PARSE = 4
_EXIT_DETECTOR = 5


def _check_overrides(args: argparse.Namespace, detectors: Sequence[str]) -> None:
    """Reject hyperparameter flags that target detectors not being run."""
    have = set(detectors)
    if getattr(args, "bin_count", None) is not None and not have & {"spad", "spad+"}:
        raise ValueError("--b applies only to spad and spad+")
    if getattr(args, "k", None) is not None and "lof" not in have:
        raise ValueError("--k applies only to lof")
    if getattr(args, "trees", None) is not None and "iforest" not in have:
        raise ValueError("--trees applies only to iforest")
    if getattr(args, "psi", None) is not None and not have & {"iforest", "sp"}:
        raise ValueError("--psi applies only to iforest and sp")
    if getattr(args, "variant", None) is not None and "spad+" not in have:
        raise ValueError("--variant applies only to spad+")
    if getattr(args, "top_m", None) is not None:
        if getattr(args, "variant", None) != "top_m_pcs":
            raise ValueError("--top-m requires --variant top_m_pcs")
    elif getattr(args, "variant", None) == "top_m_pcs":
        raise ValueError("--variant top_m_pcs requires --top-m")


def cmd_fit(args: argparse.Namespace) -> int:
    data = load_csv(args.input, args.label_col, args.anomaly_value)
    train_rows = data.values[~data.labels]
    if train_rows.shape[0] == 0:
        raise ValueError(f"{args.input}: no normal rows to train on")
    mm = minmax_fit(train_rows)
    train = minmax_apply(mm, train_rows)
    try:
        if args.detector == "spad":
            saved = SavedModel("spad", fit_histograms(train, bin_count=args.bin_count), mm)
        else:
            saved = SavedModel("spad+", fit_spad_plus(train, bin_count=args.bin_count), mm)
    except (ValueError, RuntimeError) as exc:
        raise DetectorRunError(args.detector, str(args.input), exc) from exc
    save_model(saved, args.out)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    saved = load_model(args.model)
    if args.variant is not None and saved.kind != "spad+":
        raise ValueError("--variant requires a spad+ model")
    if args.variant == "top_m_pcs" and args.top_m is None:
        raise ValueError("--variant top_m_pcs requires --top-m")
    if args.top_m is not None and args.variant != "top_m_pcs":
        raise ValueError("--top-m requires --variant top_m_pcs")
    data = load_csv(args.input, args.label_col, args.anomaly_value)
    if data.n_features != saved.n_features:
        raise ValueError(
            f"model expects {saved.n_features} features, "
            f"{args.input} has {data.n_features}"
        )
    values = minmax_apply(saved.minmax, data.values)
    try:
        if saved.kind == "spad":
            scores = spad_scores(saved.model, values)
        elif args.variant is None:
            scores = spad_plus_scores(saved.model, values)
        else:
            scores = spad_variant_scores(saved.model, values, args.variant, top_m=args.top_m)
    except (ValueError, RuntimeError) as exc:
        raise DetectorRunError(saved.kind, str(args.input), exc) from exc
    lines = ["id,score"] + [f"{i},{float(s)!r}" for i, s in enumerate(scores)]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    detectors = tuple(args.detector) if args.detector else DETECTOR_NAMES
    _check_overrides(args, detectors)
    params = DetectorParams(
        bin_count=args.bin_count,
        k=args.k,
        trees=args.trees if args.trees is not None else 100,
        psi=args.psi,
        variant=args.variant,
        top_m=args.top_m,
    )
    names = [path.stem for path in args.input]
    if len(set(names)) != len(names):
        raise ValueError("dataset file names (stems) must be unique")
    datasets = [
        (name, load_csv(path, args.label_col, args.anomaly_value))
        for name, path in zip(names, args.input)
    ]
    report = benchmark(
        datasets,
        detectors,
        repeats=args.repeats,
        split_seed=args.seed,
        params=params,
    )
    if args.out is None:
        sys.stdout.write("\n".join(report_csv_lines(report)) + "\n")
    else:
        write_report_csv(report, f"{args.out}.csv")
        write_report_markdown(report, f"{args.out}.md")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    data = correlated_gaussian_with_planted(
        args.n, args.rho, args.n_planted, seed=args.seed
    )
    save_csv(data, args.out)
    return 0


def _add_data_flags(p: argparse.ArgumentParser, repeatable_input: bool = False) -> None:
    if repeatable_input:
        p.add_argument(
            "--input", type=Path, action="append", required=True, metavar="CSV",
            help="input dataset; repeat the flag to benchmark several files",
        )
    else:
        p.add_argument("--input", type=Path, required=True, metavar="CSV",
                       help="input dataset")
    p.add_argument("--label-col", default="label", metavar="NAME",
                   help="label column name (default: label)")
    p.add_argument("--anomaly-value", default="anomaly", metavar="VALUE",
                   help="label value marking anomalies (default: anomaly)")


def _add_variant_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=("input_only", "pcs_only", "top_m_pcs"),
                   help="spad+ scoring variant (default: input + all PCs)")
    p.add_argument("--top-m", type=int, metavar="M",
                   help="number of leading PCs for --variant top_m_pcs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spadplus",
        description="Histogram-based anomaly detection over input features "
                    "and principal components, with comparison detectors "
                    "and a semi-supervised AUC benchmark.",
        epilog="exit codes: 0 success, 2 configuration error, 3 I/O error, "
               "4 parse/format error, 5 detector failure",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    fit = sub.add_parser(
        "fit",
        help="fit a spad or spad+ model on the normal rows of a CSV",
        description="Fits min-max normalization and a histogram model on the "
                    "normal rows of --input, then writes a portable model file.",
    )
    _add_data_flags(fit)
    fit.add_argument("--detector", choices=("spad", "spad+"), required=True)
    fit.add_argument("--b", type=int, dest="bin_count", metavar="BINS",
                     help="histogram bins per dimension (default: floor(log2 N) + 1)")
    fit.add_argument("--out", type=Path, required=True, metavar="MODEL",
                     help="model file to write")
    fit.set_defaults(func=cmd_fit)

    score = sub.add_parser(
        "score",
        help="score a CSV with a saved model",
        description="Scores every row of --input with a model from `fit`, "
                    "writing 'id,score' lines in input order. Labels in the "
                    "input are ignored. Lower scores are more anomalous.",
    )
    _add_data_flags(score)
    score.add_argument("--model", type=Path, required=True, metavar="MODEL",
                       help="model file from `spadplus fit`")
    _add_variant_flags(score)
    score.add_argument("--out", type=Path, metavar="CSV",
                       help="scores file (default: stdout)")
    score.set_defaults(func=cmd_score)

    bench = sub.add_parser(
        "bench",
        help="run the semi-supervised AUC benchmark",
        description="Splits off half the normal rows per dataset (seeded), "
                    "normalizes, fits every detector on the training half, "
                    "scores the rest plus all anomalies, and reports AUC and "
                    "runtimes. Writes OUT.csv and OUT.md when --out is given, "
                    "otherwise prints the CSV report.",
    )
    _add_data_flags(bench, repeatable_input=True)
    bench.add_argument("--detector", choices=DETECTOR_NAMES, action="append",
                       metavar="NAME",
                       help="detector to run (repeatable; default: all of "
                            + ", ".join(DETECTOR_NAMES) + ")")
    bench.add_argument("--b", type=int, dest="bin_count", metavar="BINS",
                       help="histogram bins for spad/spad+")
    bench.add_argument("--k", type=int, metavar="K",
                       help="lof neighborhood size (default: floor(sqrt N))")
    bench.add_argument("--trees", type=int, metavar="T",
                       help="iforest tree count (default: 100)")
    bench.add_argument("--psi", type=int, metavar="PSI",
                       help="subsample size for iforest (default 256) and sp (default 25)")
    bench.add_argument("--seed", type=int, default=0,
                       help="split seed; run seeds derive from it (default: 0)")
    bench.add_argument("--repeats", type=int, default=10,
                       help="runs per random detector (default: 10)")
    _add_variant_flags(bench)
    bench.add_argument("--out", type=Path, metavar="BASE",
                       help="report base path; writes BASE.csv and BASE.md")
    bench.set_defaults(func=cmd_bench)

    synth = sub.add_parser(
        "synth",
        help="generate the correlated-Gaussian dataset with planted anomalies",
        description="Writes a labeled CSV: n correlated bivariate Gaussian "
                    "normals plus planted points that are unremarkable in "
                    "each dimension but violate the correlation.",
    )
    synth.add_argument("--n", type=int, required=True, help="number of normal rows (>= 10)")
    synth.add_argument("--rho", type=float, required=True, help="feature correlation, |rho| < 1")
    synth.add_argument("--n-planted", type=int, default=1, metavar="P",
                       help="number of planted anomalies (default: 1)")
    synth.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    synth.add_argument("--out", type=Path, required=True, metavar="CSV",
                       help="output dataset file")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CsvParseError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARSE
    except DetectorRunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DETECTOR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
