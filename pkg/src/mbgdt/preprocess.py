"""Dataset preprocessors that shrink or delete dense adversarial subsets.

Two independent strategies: a sliding-kernel scan that collapses
over-populated windows into single mean representatives, and a DBSCAN-based
pass that deletes the densest cluster outright.  Both work on desk-scale
data, so neighbor queries are plain O(n^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, Dataset


@dataclass(frozen=True)
class KernelConfig:
    """Sliding-window parameters, in data units.

    A window is "hot" when it captures strictly more than
    ``threshold_fraction`` of all samples.  ``strict_mode`` returns only the
    combined representatives; the default also passes unassigned samples
    through unchanged.
    """

    kernel_width_x: float
    kernel_width_y: float
    stride_x: float
    stride_y: float
    threshold_fraction: float = 0.1
    strict_mode: bool = False

    def validate(self) -> None:
        for name in ("kernel_width_x", "kernel_width_y", "stride_x", "stride_y"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.stride_x > self.kernel_width_x or self.stride_y > self.kernel_width_y:
            raise ConfigError("strides must not exceed kernel widths")
        if not 0 < self.threshold_fraction <= 1:
            raise ConfigError("threshold_fraction must be in (0, 1]")


@dataclass(frozen=True)
class DbscanConfig:
    """DBSCAN parameters; ``radius`` is in normalized [0, 1]^2 coordinates.

    ``min_clusters_to_act`` guards the known failure mode: with fewer
    clusters there is no second cluster to tell adversaries from data, so the
    dataset is returned untouched.
    """

    radius: float = 0.05
    min_samples: int = 8
    min_clusters_to_act: int = 2

    def validate(self) -> None:
        if self.radius <= 0:
            raise ConfigError("radius must be positive")
        if self.min_samples < 2:
            raise ConfigError("min_samples must be at least 2")


def default_kernel_config(dataset: Dataset, width_fraction: float = 0.1,
                          threshold_fraction: float = 0.1,
                          strict_mode: bool = False) -> KernelConfig:
    """Widths at ``width_fraction`` of each axis range, strides at half width."""
    if len(dataset) == 0:
        raise ValueError("cannot derive kernel widths from an empty dataset")
    range_x = float(dataset.x.max() - dataset.x.min())
    range_y = float(dataset.y.max() - dataset.y.min())
    # Degenerate axes get a unit window so the grid stays well-formed.
    wx = range_x * width_fraction if range_x > 0 else 1.0
    wy = range_y * width_fraction if range_y > 0 else 1.0
    return KernelConfig(kernel_width_x=wx, kernel_width_y=wy,
                        stride_x=wx / 2, stride_y=wy / 2,
                        threshold_fraction=threshold_fraction,
                        strict_mode=strict_mode)


def _origins(lo: float, hi: float, stride: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / stride)) + 1
    return lo + stride * np.arange(count)


def kernel_preprocess(dataset: Dataset, cfg: KernelConfig) -> Dataset:
    """Collapse over-populated windows into single mean samples.

    A grid of (width_x x width_y) windows at stride offsets covers the data
    bounding box and is scanned x-fastest, then y.  Window population counts
    every sample inside it; each sample is assigned to the first hot window
    containing it, and each hot window with assigned members emits one sample
    at their mean.  Output order is pass-throughs (original order, unless
    strict_mode) followed by combined samples in window scan order.
    """
    cfg.validate()
    n = len(dataset)
    if n == 0:
        return Dataset(np.empty(0), np.empty(0))
    x, y = dataset.x, dataset.y
    threshold = cfg.threshold_fraction * n

    hot_masks = []
    for oy in _origins(float(y.min()), float(y.max()), cfg.stride_y):
        in_y = (y >= oy) & (y <= oy + cfg.kernel_width_y)
        for ox in _origins(float(x.min()), float(x.max()), cfg.stride_x):
            mask = in_y & (x >= ox) & (x <= ox + cfg.kernel_width_x)
            if mask.sum() > threshold:
                hot_masks.append(mask)

    assigned = np.full(n, -1, dtype=np.intp)
    for k, mask in enumerate(hot_masks):
        take = mask & (assigned == -1)
        assigned[take] = k

    mask_in = dataset.contaminated
    out_x, out_y, out_c = [], [], []
    if not cfg.strict_mode:
        passthrough = assigned == -1
        out_x.extend(x[passthrough])
        out_y.extend(y[passthrough])
        out_c.extend(mask_in[passthrough] if mask_in is not None else np.zeros(int(passthrough.sum()), bool))
    for k in range(len(hot_masks)):
        members = assigned == k
        if not members.any():
            # every sample in this window was claimed by an earlier one
            continue
        out_x.append(float(x[members].mean()))
        out_y.append(float(y[members].mean()))
        out_c.append(bool(mask_in[members].any()) if mask_in is not None else False)

    contaminated = np.asarray(out_c, dtype=bool) if mask_in is not None else None
    return Dataset(np.asarray(out_x, dtype=np.float64),
                   np.asarray(out_y, dtype=np.float64), contaminated)


def _normalized_points(dataset: Dataset) -> np.ndarray:
    """x and y independently min-max scaled to [0, 1]; constant axes map to 0."""
    pts = np.empty((len(dataset), 2))
    for col, v in enumerate((dataset.x, dataset.y)):
        lo, hi = float(v.min()), float(v.max())
        pts[:, col] = (v - lo) / (hi - lo) if hi > lo else 0.0
    return pts


def region_query(dataset: Dataset, index: int, radius: float) -> np.ndarray:
    """Indices within Euclidean distance ``radius`` of sample ``index``.

    Distances are measured in normalized coordinates; the query point itself
    is always included, and indices come back ascending.
    """
    n = len(dataset)
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for dataset size {n}")
    pts = _normalized_points(dataset)
    d2 = ((pts - pts[index]) ** 2).sum(axis=1)
    return np.nonzero(d2 <= radius * radius)[0]


def _dbscan_labels(pts: np.ndarray, radius: float, min_samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Textbook DBSCAN on normalized points.

    Returns (labels, neighbor_counts); label -1 is noise.  Points are scanned
    in index order and each new cluster is grown to completion, so a border
    point reachable from several clusters joins the one discovered first.
    """
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    adjacency = (diff ** 2).sum(axis=2) <= radius * radius
    counts = adjacency.sum(axis=1)
    core = counts >= min_samples

    labels = np.full(n, -1, dtype=np.intp)
    cluster_id = 0
    for start in range(n):
        if labels[start] != -1 or not core[start]:
            continue
        labels[start] = cluster_id
        queue = [start]
        while queue:
            p = queue.pop()
            if not core[p]:
                continue
            for q in np.nonzero(adjacency[p])[0]:
                if labels[q] == -1:
                    labels[q] = cluster_id
                    queue.append(q)
        cluster_id += 1
    return labels, counts


def dbscan_trim(dataset: Dataset, cfg: DbscanConfig) -> Dataset:
    """Delete every member of the densest cluster, in place of the adversary.

    Clusters come from DBSCAN on normalized coordinates.  The removed cluster
    maximizes the mean neighbor count over its core points, with ties broken
    by larger cluster size and then by lower smallest-member index.  If fewer
    than ``min_clusters_to_act`` clusters are found the dataset is returned
    unchanged; survivors keep their original order.
    """
    cfg.validate()
    n = len(dataset)
    if n == 0:
        raise ValueError("dbscan_trim requires a non-empty dataset")
    labels, counts = _dbscan_labels(_normalized_points(dataset), cfg.radius, cfg.min_samples)
    n_clusters = int(labels.max()) + 1
    if n_clusters < cfg.min_clusters_to_act:
        return dataset

    core = counts >= cfg.min_samples
    best_id, best_key = -1, None
    for cid in range(n_clusters):
        members = labels == cid
        density = float(counts[members & core].mean())
        key = (density, int(members.sum()), -int(np.nonzero(members)[0][0]))
        if best_key is None or key > best_key:
            best_id, best_key = cid, key
    keep = labels != best_id
    return Dataset(dataset.x[keep], dataset.y[keep],
                   None if dataset.contaminated is None else dataset.contaminated[keep])
