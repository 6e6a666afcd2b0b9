"""Mini-batch gradient descent with per-batch loss trimming.

One ``fit`` covers both estimators: with ``trim_fraction = 0`` and squared
loss it is the plain mini-batch baseline, with a positive trim fraction the
``floor(trim_fraction * batch_size)`` highest-loss samples of every batch are
excluded from the gradient before the update.

The iteration loop is compiled with numba; batches are pre-drawn in chunks
from the fit-owned generator using exactly the ``select_batch`` recipe, so an
instrumented run can be replayed index-for-index from the seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .core import (
    Dataset,
    DegenerateDataError,
    DivergenceError,
    LossKind,
    ModelConfig,
    ScaleParams,
    feature_matrix,
    scale_x,
)

# Batches drawn per kernel call; caps the random-key buffer at ~chunk * n floats.
_CHUNK_ITERS = 4096


@dataclass
class TrainTrace:
    """Per-iteration mean post-trim batch loss, plus stopping provenance."""

    iteration_losses: np.ndarray
    iterations_run: int
    converged: bool


@dataclass
class FitResult:
    weights: np.ndarray
    trace: TrainTrace
    scale: ScaleParams


@dataclass
class FitInstrument:
    """Capture of what fit actually did, one entry per completed iteration.

    ``batches`` holds dataset indices (ascending), ``kept`` the surviving
    batch positions (ascending), ``gradients`` the applied gradient, and
    ``weights_before`` the weight vector the gradient was evaluated at.
    """

    batches: list = field(default_factory=list)
    kept: list = field(default_factory=list)
    gradients: list = field(default_factory=list)
    weights_before: list = field(default_factory=list)


def select_batch(rng: np.random.Generator, n: int, batch_size: int) -> np.ndarray:
    """Draw ``batch_size`` distinct indices from [0, n) without replacement.

    Implemented as the positions of the ``batch_size`` smallest of n random
    keys, returned ascending; this is the recipe the fit loop applies row-wise
    to its pre-drawn key blocks, so both paths consume the generator
    identically.
    """
    if batch_size < 1 or batch_size > n:
        raise ValueError(f"batch_size {batch_size} out of range for dataset size {n}")
    keys = rng.random(n)
    return np.sort(np.argpartition(keys, batch_size - 1)[:batch_size])


def trim_indices(losses, trim_count: int) -> np.ndarray:
    """Positions that survive dropping the ``trim_count`` largest losses.

    Ties at the cut are resolved by dropping the lower position first; the
    kept positions come back ascending.
    """
    losses = np.asarray(losses, dtype=np.float64)
    if losses.ndim != 1 or losses.size == 0:
        raise ValueError("losses must be a non-empty vector")
    if not 0 <= trim_count < losses.size:
        raise ValueError(f"trim_count {trim_count} must be < {losses.size}")
    order = np.argsort(-losses, kind="stable")
    return np.sort(order[trim_count:])


@njit(cache=True)
def _run_chunk(phi, y, batches, w, use_huber, delta, trim_count, lr,
               epoch_len, tol, epoch_acc, epoch_pos, prev_mean, have_prev,
               losses_out, record, kept_out, grad_out, wbefore_out):
    """Run up to one chunk of iterations in place; see fit for the contract.

    Returns (iterations completed, status, epoch accumulator state), where
    status is 0 = chunk exhausted, 1 = converged, 2 = non-finite loss,
    3 = non-finite gradient.  On status 2/3 the failing iteration is the one
    at local index `iterations completed`.
    """
    m, bs = batches.shape
    d = phi.shape[1]
    r = np.empty(bs)
    losses = np.empty(bs)
    order = np.empty(bs, np.int64)
    keep = np.empty(bs, np.uint8)
    g = np.empty(d)
    kcount = bs - trim_count
    status = 0
    done = 0
    for t in range(m):
        bad = False
        for j in range(bs):
            i = batches[t, j]
            acc = 0.0
            for k in range(d):
                acc += phi[i, k] * w[k]
            a = acc - y[i]
            r[j] = a
            aa = abs(a)
            if use_huber == 1 and aa > delta:
                losses[j] = delta * (aa - 0.5 * delta)
            else:
                losses[j] = 0.5 * a * a
            if not np.isfinite(losses[j]):
                bad = True
        if bad:
            status = 2
            break
        # Drop the trim_count largest losses.  Stable descending sort keeps
        # ties in ascending position order, so lower positions drop first.
        for j in range(bs):
            keep[j] = 1
        if trim_count > 0:
            for j in range(bs):
                order[j] = j
            for j in range(1, bs):
                oj = order[j]
                key = losses[oj]
                q = j - 1
                while q >= 0 and losses[order[q]] < key:
                    order[q + 1] = order[q]
                    q -= 1
                order[q + 1] = oj
            for j in range(trim_count):
                keep[order[j]] = 0
        # Mean gradient over kept samples, accumulated in ascending batch
        # position so the trim_count = 0 path is bit-identical to a loop
        # with no trimming machinery at all.
        for k in range(d):
            g[k] = 0.0
        kept_loss_sum = 0.0
        for j in range(bs):
            if keep[j] == 0:
                continue
            a = r[j]
            if use_huber == 1:
                if a > delta:
                    psi = delta
                elif a < -delta:
                    psi = -delta
                else:
                    psi = a
            else:
                psi = a
            i = batches[t, j]
            for k in range(d):
                g[k] += psi * phi[i, k]
            kept_loss_sum += losses[j]
        bad = False
        for k in range(d):
            g[k] /= kcount
            if not np.isfinite(g[k]):
                bad = True
        if bad:
            status = 3
            break
        if record == 1:
            for j in range(bs):
                kept_out[t, j] = keep[j]
            for k in range(d):
                grad_out[t, k] = g[k]
                wbefore_out[t, k] = w[k]
        for k in range(d):
            w[k] -= lr * g[k]
        mean_kept = kept_loss_sum / kcount
        losses_out[t] = mean_kept
        done = t + 1
        epoch_acc += mean_kept
        epoch_pos += 1
        if epoch_pos == epoch_len:
            cur = epoch_acc / epoch_len
            if have_prev == 1 and abs(cur - prev_mean) < tol:
                status = 1
            prev_mean = cur
            have_prev = 1
            epoch_acc = 0.0
            epoch_pos = 0
            if status == 1:
                break
    return done, status, epoch_acc, epoch_pos, prev_mean, have_prev


def fit(dataset: Dataset, config: ModelConfig,
        instrument: FitInstrument | None = None) -> FitResult:
    """Fit a polynomial by trimmed mini-batch gradient descent.

    Starting from all-zero weights, each iteration draws a fresh batch
    without replacement, drops the ``floor(trim_fraction * batch_size)``
    highest-loss samples, and steps against the mean gradient of the
    survivors.  Training stops when the mean batch loss, averaged over epoch
    windows of ceil(n / batch_size) consecutive iterations, changes by less
    than ``convergence_tol`` between consecutive windows, or after
    ``max_iter`` iterations.

    Deterministic given (dataset, config): the generator is derived from
    ``config.seed`` and owned by this invocation.  Raises DivergenceError
    naming the iteration if a loss or gradient goes non-finite.
    """
    config.validate()
    dataset.require_finite()
    n = len(dataset)
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds dataset size {n}")
    if config.scale_inputs:
        scaled, scale = scale_x(dataset)
    else:
        if n == 0 or not float(dataset.x.max()) > float(dataset.x.min()):
            raise DegenerateDataError("degenerate x-range: all x equal")
        scaled, scale = dataset, ScaleParams.identity()

    bs = config.batch_size
    trim_count = config.trim_count
    phi = feature_matrix(scaled.x, config.model_degree)
    w = np.zeros(config.model_degree + 1)
    epoch_len = int(np.ceil(n / bs))
    rng = np.random.default_rng(config.seed)

    losses_all = np.empty(config.max_iter)
    dummy_u8 = np.empty((1, 1), dtype=np.uint8)
    dummy_f8 = np.empty((1, 1))
    t = 0
    converged = False
    epoch_acc, epoch_pos, prev_mean, have_prev = 0.0, 0, 0.0, 0
    while t < config.max_iter:
        m = min(_CHUNK_ITERS, config.max_iter - t)
        keys = rng.random((m, n))
        batches = np.sort(
            np.argpartition(keys, bs - 1, axis=1)[:, :bs], axis=1
        ).astype(np.int64)
        if instrument is not None:
            kept_out = np.zeros((m, bs), dtype=np.uint8)
            grad_out = np.empty((m, config.model_degree + 1))
            wbefore_out = np.empty((m, config.model_degree + 1))
            record = 1
        else:
            kept_out, grad_out, wbefore_out, record = dummy_u8, dummy_f8, dummy_f8, 0
        done, status, epoch_acc, epoch_pos, prev_mean, have_prev = _run_chunk(
            phi, scaled.y, batches, w,
            1 if config.loss_kind is LossKind.HUBER else 0,
            config.huber_delta, trim_count, config.learning_rate,
            epoch_len, config.convergence_tol,
            epoch_acc, epoch_pos, prev_mean, have_prev,
            losses_all[t:t + m], record, kept_out, grad_out, wbefore_out,
        )
        if instrument is not None:
            for i in range(done):
                instrument.batches.append(batches[i].copy())
                instrument.kept.append(np.nonzero(kept_out[i])[0])
                instrument.gradients.append(grad_out[i].copy())
                instrument.weights_before.append(wbefore_out[i].copy())
        t += done
        if status == 1:
            converged = True
            break
        if status == 2:
            raise DivergenceError(t, "loss")
        if status == 3:
            raise DivergenceError(t, "gradient")

    trace = TrainTrace(iteration_losses=losses_all[:t].copy(),
                       iterations_run=t, converged=converged)
    return FitResult(weights=w, trace=trace, scale=scale)


def fit_pair(dataset: Dataset, config: ModelConfig) -> tuple[FitResult, FitResult]:
    """Fit the plain baseline and the trimmed model on identical batches.

    The baseline forces trim_fraction = 0 and squared loss; the trimmed model
    uses the configuration as given.  Both runs share ``config.seed``, so
    with trim_fraction = 0 and squared loss the two results coincide.
    """
    naive_cfg = replace(config, trim_fraction=0.0, loss_kind=LossKind.SQUARED)
    return fit(dataset, naive_cfg), fit(dataset, config)
