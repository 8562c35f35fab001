"""Design-matrix container with intercept and centered covariates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataValidationError
from .families import GlmFamily

CENTERING_TOL = 1e-10


@dataclass
class Dataset:
    """Response plus an n x (p+1) design: intercept column, centered covariates.

    ``centers`` holds the column means subtracted from the raw
    covariates, so the same shift can be applied to held-out data.
    """

    y: np.ndarray
    X: np.ndarray
    trials: np.ndarray | None = None
    names: list[str] = field(default_factory=list)
    centers: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] - 1

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1:
            raise DataValidationError("X must be 2-d and y 1-d")
        if self.X.shape[0] != self.y.shape[0]:
            raise DataValidationError("X and y have different numbers of rows")
        if self.X.shape[0] == 0:
            raise DataValidationError("empty dataset")
        if not np.allclose(self.X[:, 0], 1.0):
            raise DataValidationError("first design column must be the intercept")
        if self.p > 0:
            colmeans = self.X[:, 1:].mean(axis=0)
            if np.max(np.abs(colmeans)) > CENTERING_TOL:
                raise DataValidationError("non-intercept columns must be centered")
        if not self.names:
            self.names = [f"X{j}" for j in range(1, self.p + 1)]
        if len(self.names) != self.p:
            raise DataValidationError("names length must equal the number of covariates")
        if self.trials is not None:
            self.trials = np.asarray(self.trials, dtype=float)
            if self.trials.shape != self.y.shape:
                raise DataValidationError("trials must have the same length as y")

    def design_for(self, active: np.ndarray) -> np.ndarray:
        """Columns of X for the model with the given inclusion mask."""
        cols = np.concatenate(([0], 1 + np.flatnonzero(active)))
        return self.X[:, cols]

    def validate_for(self, family: GlmFamily) -> None:
        family.with_trials(self.trials).validate_response(self.y)


def build_dataset(
    y: np.ndarray,
    covariates: np.ndarray,
    trials: np.ndarray | None = None,
    names: list[str] | None = None,
) -> Dataset:
    """Center raw covariate columns, prepend the intercept, and wrap up."""
    covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
    if covariates.shape[0] == 1 and np.asarray(y).shape[0] != 1:
        covariates = covariates.T
    centers = covariates.mean(axis=0)
    X = np.column_stack([np.ones(covariates.shape[0]), covariates - centers])
    return Dataset(y=np.asarray(y, dtype=float), X=X, trials=trials,
                   names=list(names) if names else [], centers=centers)
