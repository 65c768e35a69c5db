"""Candidate function dictionaries evaluated on the sample.

A dictionary is the n x M matrix of candidate functions h_j evaluated at
the covariate rows; the estimator only ever sees these evaluations, so
the matrix is the whole interface. The default choice is the linear
dictionary h_j(x) = x_j.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError
from .survival import SurvivalDataset


@dataclass
class DictionaryMatrix:
    """Evaluations h_j(X_i), one column per candidate function."""

    values: np.ndarray
    labels: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DataValidationError("dictionary values must be a 2-d array")
        if len(self.labels) != self.values.shape[1]:
            raise DataValidationError("one label per dictionary column required")
        if len(set(self.labels)) != len(self.labels):
            raise DataValidationError("duplicate dictionary labels")
        if not np.all(np.isfinite(self.values)):
            raise DataValidationError("dictionary values must be finite")
        dead = np.flatnonzero(np.all(self.values == 0.0, axis=0))
        if dead.size:
            names = ", ".join(self.labels[j] for j in dead)
            warnings.warn(f"all-zero dictionary column(s): {names}", stacklevel=2)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def M(self) -> int:
        return self.values.shape[1]


def linear_dictionary(dataset: SurvivalDataset) -> DictionaryMatrix:
    """Identity dictionary: one candidate per covariate, h_j(x) = x_j."""
    return DictionaryMatrix(values=dataset.covariates.copy(), labels=list(dataset.labels))


def load_dictionary(path, n_expected: int | None = None) -> DictionaryMatrix:
    """Read a dictionary CSV (header of labels, one row per record)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        if not header or any(not c for c in header):
            raise DataValidationError(f"{path}: header must name every column")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataValidationError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DataValidationError(f"{path}: line {lineno}: bad value") from None
    if not rows:
        raise DataValidationError(f"{path}: no data rows")
    values = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(values)):
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise DataValidationError(f"{path}: line {i + 2}: non-finite value in column {header[j]}")
    if n_expected is not None and values.shape[0] != n_expected:
        raise DataValidationError(
            f"{path}: {values.shape[0]} rows but the dataset has {n_expected} records"
        )
    return DictionaryMatrix(values=values, labels=header)


def sup_norms(dictionary: DictionaryMatrix) -> np.ndarray:
    """Per-column sup norms max_i |h_j(X_i)| over the sample."""
    return np.max(np.abs(dictionary.values), axis=0)
