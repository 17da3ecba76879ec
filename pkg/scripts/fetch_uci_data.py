"""Fetch the Pima and Ionosphere datasets into data/ as labeled CSVs.

Both files come from public mirrors of the UCI repository. The script
normalizes them into the loader's format: a header row, numeric feature
columns, and a string label column named "class".

    pima.csv        768 rows, 8 features; anomalies are class == "1"
    ionosphere.csv  351 rows, 32 features; anomalies are class == "b"

Ionosphere's first two raw attributes are dropped: one is binary and one is
identically zero, leaving the 32 continuous features the benchmark uses.

Usage: python3 scripts/fetch_uci_data.py [--dest DIR]
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

PIMA_URL = (
    "https://raw.githubusercontent.com/jbrownlee/Datasets/master/"
    "pima-indians-diabetes.data.csv"
)
IONOSPHERE_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "ionosphere/ionosphere.data"
)

PIMA_HEADER = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"]


def _download(url: str) -> list[list[str]]:
    with urllib.request.urlopen(url, timeout=60) as response:
        text = response.read().decode("utf-8")
    return [row for row in csv.reader(io.StringIO(text)) if row]


def _write(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def fetch_pima(dest: Path) -> None:
    rows = _download(PIMA_URL)
    if len(rows) != 768 or any(len(row) != 9 for row in rows):
        raise SystemExit(f"pima: expected 768 rows x 9 columns, got {len(rows)} rows")
    positives = sum(row[-1] == "1" for row in rows)
    if positives != 268:
        raise SystemExit(f"pima: expected 268 positive rows, got {positives}")
    _write(dest / "pima.csv", PIMA_HEADER, rows)
    print(f"wrote {dest / 'pima.csv'} (768 rows, 8 features, 268 anomalies)")


def fetch_ionosphere(dest: Path) -> None:
    rows = _download(IONOSPHERE_URL)
    if len(rows) != 351 or any(len(row) != 35 for row in rows):
        raise SystemExit(
            f"ionosphere: expected 351 rows x 35 columns, got {len(rows)} rows"
        )
    bad = sum(row[-1] == "b" for row in rows)
    if bad != 126:
        raise SystemExit(f"ionosphere: expected 126 'b' rows, got {bad}")
    # Drop the binary first attribute and the all-zero second one.
    trimmed = [row[2:] for row in rows]
    header = [f"a{i}" for i in range(3, 35)] + ["class"]
    _write(dest / "ionosphere.csv", header, trimmed)
    print(f"wrote {dest / 'ionosphere.csv'} (351 rows, 32 features, 126 anomalies)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--dest",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "data",
        help="output directory (default: the repository's data/)",
    )
    args = parser.parse_args(argv)
    args.dest.mkdir(parents=True, exist_ok=True)
    fetch_pima(args.dest)
    fetch_ionosphere(args.dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
