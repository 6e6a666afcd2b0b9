"""Shared data types, polynomial featurization, and x-axis scaling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class MbgdtError(Exception):
    """Base class for all package errors."""


class ConfigError(MbgdtError):
    """Invalid configuration value or unknown configuration key."""


class DegenerateDataError(MbgdtError):
    """Dataset cannot be fit (empty, or zero x-range)."""


class DivergenceError(MbgdtError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, iteration: int, what: str):
        self.iteration = iteration
        super().__init__(f"non-finite {what} at iteration {iteration}")


class LossKind(str, Enum):
    SQUARED = "squared"
    HUBER = "huber"


@dataclass(frozen=True)
class Sample:
    """One (x, y) observation."""

    x: float
    y: float


@dataclass
class Dataset:
    """Ordered collection of observations as parallel arrays.

    The positional index is the canonical sample identity; all batching and
    trimming machinery works on indices into these arrays.  ``contaminated``
    is generation metadata (which rows were replaced by an adversary) and is
    never consulted by fitting code.
    """

    x: np.ndarray
    y: np.ndarray
    contaminated: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("x and y must be one-dimensional")
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have equal length")
        if self.contaminated is not None:
            self.contaminated = np.ascontiguousarray(self.contaminated, dtype=bool)
            if self.contaminated.shape != self.x.shape:
                raise ValueError("contaminated mask must match data length")

    def __len__(self) -> int:
        return self.x.shape[0]

    def sample(self, i: int) -> Sample:
        return Sample(float(self.x[i]), float(self.y[i]))

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        xs = np.array([s.x for s in samples], dtype=np.float64)
        ys = np.array([s.y for s in samples], dtype=np.float64)
        return cls(xs, ys)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        mask = None if self.contaminated is None else self.contaminated[idx]
        return Dataset(self.x[idx], self.y[idx], mask)

    def require_finite(self) -> None:
        if not (np.isfinite(self.x).all() and np.isfinite(self.y).all()):
            raise ValueError("dataset contains non-finite values")


@dataclass(frozen=True)
class ModelConfig:
    """All optimizer hyperparameters.

    ``trim_fraction`` is the share of each mini-batch dropped before the
    gradient step (0 gives the plain mini-batch baseline).  ``huber_delta``
    is the quadratic-to-linear crossover of the robust loss and is ignored
    for squared loss.  ``convergence_tol`` of 0 disables the early-stopping
    test, so training always runs the full ``max_iter`` budget; under
    mini-batch noise any small positive tolerance will eventually be met by
    chance, which stops benchmark fits at arbitrary points.
    """

    model_degree: int = 5
    batch_size: int = 32
    learning_rate: float = 0.05
    max_iter: int = 20000
    convergence_tol: float = 0.0
    trim_fraction: float = 0.0
    huber_delta: float = 0.3
    loss_kind: LossKind = LossKind.HUBER
    seed: int = 0
    scale_inputs: bool = True

    def validate(self) -> None:
        if self.model_degree < 0:
            raise ConfigError("model_degree must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be positive")
        if self.convergence_tol < 0:
            raise ConfigError("convergence_tol must be non-negative")
        if not 0.0 <= self.trim_fraction < 1.0:
            raise ConfigError("trim_fraction must be in [0, 1)")
        if self.huber_delta <= 0:
            raise ConfigError("huber_delta must be positive")
        if not isinstance(self.loss_kind, LossKind):
            raise ConfigError(f"unknown loss_kind {self.loss_kind!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @property
    def trim_count(self) -> int:
        """Samples dropped per batch: floor(trim_fraction * batch_size)."""
        return int(np.floor(self.trim_fraction * self.batch_size))


def featurize(x: float, degree: int) -> np.ndarray:
    """Monomial feature vector [1, x, x^2, ..., x^degree].

    Powers are built by cumulative multiplication, so entry k is exactly the
    k-fold product of x.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    return np.vander(np.asarray([x], dtype=np.float64), degree + 1, increasing=True)[0]


def feature_matrix(xs: np.ndarray, degree: int) -> np.ndarray:
    """Row-per-sample monomial design matrix, shape (n, degree + 1)."""
    return np.vander(np.asarray(xs, dtype=np.float64), degree + 1, increasing=True)


def predict(w: np.ndarray, x: float) -> float:
    """Evaluate the polynomial with coefficients ``w`` (ascending degree) at x."""
    w = np.asarray(w, dtype=np.float64)
    return float(np.dot(w, featurize(float(x), w.shape[0] - 1)))


@dataclass(frozen=True)
class ScaleParams:
    """Affine x-map sending the training range [x_lo, x_hi] onto [-1, 1]."""

    x_lo: float
    x_hi: float

    @classmethod
    def identity(cls) -> "ScaleParams":
        return cls(-1.0, 1.0)

    def apply(self, x):
        return 2.0 * (np.asarray(x, dtype=np.float64) - self.x_lo) / (self.x_hi - self.x_lo) - 1.0

    def invert(self, s):
        return self.x_lo + (np.asarray(s, dtype=np.float64) + 1.0) * (self.x_hi - self.x_lo) / 2.0


def scale_x(dataset: Dataset) -> tuple[Dataset, ScaleParams]:
    """Min-max scale x onto [-1, 1]; y is untouched.

    Keeps high-degree features bounded so a single constant learning rate is
    stable.  Returns the parameters so test data can be mapped identically.
    """
    if len(dataset) == 0:
        raise DegenerateDataError("cannot scale an empty dataset")
    lo = float(dataset.x.min())
    hi = float(dataset.x.max())
    if not hi > lo:
        raise DegenerateDataError(f"degenerate x-range [{lo}, {hi}]: all x equal")
    params = ScaleParams(lo, hi)
    return Dataset(params.apply(dataset.x), dataset.y, dataset.contaminated), params
