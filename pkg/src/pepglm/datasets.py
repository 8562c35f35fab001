"""CSV ingestion and the bundled diabetes benchmark data.

Input format: UTF-8, comma-delimited, one header row, decimal points,
no thousands separators.  Rows containing empty cells are dropped with
a warning; any other non-numeric cell is an error.
"""

from __future__ import annotations

import csv
import warnings
from importlib import resources

import numpy as np

from .dataset import Dataset, build_dataset
from .exceptions import DataValidationError

__all__ = ["load_csv", "write_csv", "load_pima", "PIMA_COLUMNS"]

PIMA_COLUMNS = ["npreg", "glu", "bp", "skin", "bmi", "ped", "age"]
PIMA_N = 532


def load_csv(
    path,
    response_column: str,
    trials_column: str | None = None,
) -> Dataset:
    """Parse a CSV file into a centered-design Dataset.

    The response (and optional trials) columns are removed from the
    covariates; the remaining columns are centered and an intercept is
    prepended.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            reader = csv.reader(fh)
            header = next(reader, None)
            raw_rows = list(reader)
        except csv.Error as exc:
            raise DataValidationError(f"malformed CSV: {exc}") from exc
    if not header:
        raise DataValidationError("missing header row")
    header = [h.strip() for h in header]
    if response_column not in header:
        raise DataValidationError(f"missing named column: {response_column!r}")
    if trials_column is not None and trials_column not in header:
        raise DataValidationError(f"missing named column: {trials_column!r}")

    rows, dropped = [], 0
    for lineno, row in enumerate(raw_rows, start=2):
        if len(row) != len(header):
            raise DataValidationError(
                f"malformed CSV: row {lineno} has {len(row)} cells, expected {len(header)}"
            )
        if any(cell.strip() == "" for cell in row):
            dropped += 1
            continue
        parsed = []
        for name, cell in zip(header, row):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise DataValidationError(
                    f"non-numeric cell in column {name!r} at row {lineno}: {cell!r}"
                ) from None
        rows.append(parsed)
    if dropped:
        warnings.warn(f"dropped {dropped} rows with missing values", stacklevel=2)
    if not rows:
        raise DataValidationError("empty dataset: no complete data rows")

    table = np.asarray(rows)
    y_idx = header.index(response_column)
    skip = {y_idx}
    trials = None
    if trials_column is not None:
        t_idx = header.index(trials_column)
        skip.add(t_idx)
        trials = table[:, t_idx]
    keep = [i for i in range(len(header)) if i not in skip]
    names = [header[i] for i in keep]
    return build_dataset(table[:, y_idx], table[:, keep], trials=trials, names=names)


def write_csv(dataset: Dataset, path, response_column: str = "y") -> None:
    """Write the raw (uncentered) covariates and response back to CSV."""
    raw = dataset.X[:, 1:]
    if dataset.centers is not None:
        raw = raw + dataset.centers
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.names) + [response_column])
        for i in range(dataset.n):
            writer.writerow([repr(v) for v in raw[i]] + [repr(dataset.y[i])])


def load_pima() -> Dataset:
    """Bundled diabetes benchmark: verifies n=532 and the seven covariates."""
    with resources.as_file(
        resources.files("pepglm.data").joinpath("pima.csv")
    ) as path:
        ds = load_csv(path, response_column="type")
    if ds.n != PIMA_N or ds.names != PIMA_COLUMNS:
        raise DataValidationError(
            f"unexpected diabetes data: n={ds.n}, columns={ds.names}"
        )
    return ds
