"""CSV input for real datasets and CSV export of fitted paths."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError
from .lasso_path import LassoPath


@dataclass(frozen=True)
class DatasetFile:
    path: Path
    response_column: str
    feature_columns: tuple[str, ...] | None = None
    delimiter: str = ","
    has_header: bool = True


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    response_name: str


def _number(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric value {cell!r}", row, column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {cell!r}", row, column)
    return value


def read_dataset(spec: DatasetFile) -> Dataset:
    """Load a rectangular numeric CSV.

    Rows are numbered from 1 including the header line, as a text editor
    would show them.  Without a header, columns are named ``x1, x2, ...`` and
    ``response_column`` must be one of those names.
    """
    try:
        handle = open(spec.path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open {spec.path}: {exc.strerror}") from exc
    with handle:
        rows = [r for r in csv.reader(handle, delimiter=spec.delimiter)]
    # tolerate trailing blank lines
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{spec.path} is empty")

    if spec.has_header:
        header = [h.strip() for h in rows[0]]
        body, first_line = rows[1:], 2
        if len(set(header)) != len(header):
            raise ParseError("duplicate column names in header", 1)
    else:
        header = [f"x{j + 1}" for j in range(len(rows[0]))]
        body, first_line = rows, 1
    if spec.response_column not in header:
        raise ConfigError(f"response column {spec.response_column!r} not found")
    features = (
        [h for h in header if h != spec.response_column]
        if spec.feature_columns is None
        else list(spec.feature_columns)
    )
    missing = [f for f in features if f not in header]
    if missing:
        raise ConfigError(f"feature columns not found: {missing}")
    if spec.response_column in features:
        raise ConfigError("response column cannot also be a feature")
    if not features:
        raise ConfigError("no feature columns")

    width = len(header)
    col_idx = [header.index(f) for f in features]
    y_idx = header.index(spec.response_column)
    X = np.empty((len(body), len(features)))
    y = np.empty(len(body))
    for i, row in enumerate(body):
        line = first_line + i
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line)
        y[i] = _number(row[y_idx], line, spec.response_column)
        for a, j in enumerate(col_idx):
            X[i, a] = _number(row[j], line, header[j])
    return Dataset(X, y, tuple(features), spec.response_column)


def write_path_csv(path: LassoPath, target) -> None:
    """One row per visited grid value, then a final ``Z`` row of entry values.

    Columns are ``lambda, beta_1, ..., beta_p`` with ``beta_j`` the j-th
    feature column; coefficients are on the standardized scale the path was
    fitted on.
    """
    p = path.coefs.shape[1]
    header = ["lambda"] + [f"beta_{j + 1}" for j in range(p)]
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    for lam, row in zip(path.lambdas, path.visited_coefs):
        writer.writerow([repr(float(lam))] + [repr(float(b)) for b in row])
    writer.writerow(["Z"] + [repr(float(z)) for z in path.entry_values])
