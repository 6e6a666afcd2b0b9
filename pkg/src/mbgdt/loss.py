"""Squared and Huber losses, their derivatives, and batch loss/gradient.

Residuals follow the convention prediction - target throughout.  The squared
loss carries a 1/2 factor so it coincides with the Huber quadratic branch and
the derivative is the raw residual; the evaluation metric in ``bench.mse`` is
a plain square and is unrelated to these training losses.
"""

from __future__ import annotations

import numpy as np

from .core import Dataset, LossKind, feature_matrix


def squared_loss(a):
    """0.5 * a**2, elementwise."""
    a = np.asarray(a, dtype=np.float64)
    return 0.5 * a * a


def huber_loss(a, delta: float):
    """Quadratic within |a| <= delta, linear with slope delta beyond."""
    a = np.asarray(a, dtype=np.float64)
    aa = np.abs(a)
    return np.where(aa <= delta, 0.5 * a * a, delta * (aa - 0.5 * delta))


def loss_derivative(a, kind: LossKind, delta: float):
    """d(loss)/d(residual): the raw residual, clipped to [-delta, delta] for Huber."""
    a = np.asarray(a, dtype=np.float64)
    if kind is LossKind.SQUARED:
        return a + 0.0
    return np.clip(a, -delta, delta)


def _as_dataset(samples) -> Dataset:
    return samples if isinstance(samples, Dataset) else Dataset.from_samples(samples)


def residuals(w: np.ndarray, dataset: Dataset) -> np.ndarray:
    """prediction - target for every sample, in dataset order."""
    w = np.asarray(w, dtype=np.float64)
    return feature_matrix(dataset.x, w.shape[0] - 1) @ w - dataset.y


def batch_losses(w: np.ndarray, samples, kind: LossKind, delta: float) -> np.ndarray:
    """Per-sample loss of the residual, in input order.

    ``samples`` may be a Dataset or any iterable of Sample.
    """
    dataset = _as_dataset(samples)
    if len(dataset) == 0:
        raise ValueError("batch_losses requires a non-empty batch")
    r = residuals(w, dataset)
    if kind is LossKind.SQUARED:
        return squared_loss(r)
    return huber_loss(r, delta)


def batch_gradient(w: np.ndarray, samples, kind: LossKind, delta: float) -> np.ndarray:
    """Gradient of the mean batch loss with respect to w.

    Equals the mean over samples of loss_derivative(r_i) * features(x_i),
    which is the exact gradient of mean(batch_losses).
    """
    dataset = _as_dataset(samples)
    if len(dataset) == 0:
        raise ValueError("batch_gradient requires a non-empty batch")
    w = np.asarray(w, dtype=np.float64)
    phi = feature_matrix(dataset.x, w.shape[0] - 1)
    psi = loss_derivative(phi @ w - dataset.y, kind, delta)
    return phi.T @ psi / len(dataset)
