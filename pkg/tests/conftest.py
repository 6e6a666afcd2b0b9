"""Shared test helpers: independent oracle implementations.

Everything here deliberately re-derives results through a different route
than the production code (plain loops, dict accumulation, union-find), so
agreement is evidence rather than tautology.
"""

from __future__ import annotations

import numpy as np

from mbgdt.core import Dataset, LossKind
from mbgdt.loss import batch_losses


def fd_gradient(w, dataset, kind: LossKind, delta: float, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of the mean batch loss."""
    w = np.asarray(w, dtype=np.float64)
    grad = np.empty_like(w)
    for k in range(w.size):
        up, down = w.copy(), w.copy()
        up[k] += step
        down[k] -= step
        f_up = float(np.mean(batch_losses(up, dataset, kind, delta)))
        f_down = float(np.mean(batch_losses(down, dataset, kind, delta)))
        grad[k] = (f_up - f_down) / (2 * step)
    return grad


def near_huber_kink(w, dataset, delta: float, margin: float = 1e-4) -> bool:
    """True when any residual sits within ``margin`` of the +-delta kink."""
    phi = np.vander(dataset.x, len(w), increasing=True)
    r = phi @ np.asarray(w) - dataset.y
    return bool(np.any(np.abs(np.abs(r) - delta) < margin))


def reference_naive_fit(dataset, config):
    """Plain mini-batch gradient descent, written as a direct Python loop.

    Mirrors the documented arithmetic order (feature-ascending dot products,
    batch-position-ascending gradient accumulation) with no trimming
    machinery at all, so a trim_fraction = 0 squared-loss fit must reproduce
    it bit for bit.
    """
    from mbgdt.core import feature_matrix, scale_x
    from mbgdt.optimizer import select_batch

    scaled, scale = scale_x(dataset)
    n = len(scaled)
    d = config.model_degree + 1
    phi = feature_matrix(scaled.x, config.model_degree)
    w = np.zeros(d)
    rng = np.random.default_rng(config.seed)
    trajectory = [w.copy()]
    for _ in range(config.max_iter):
        idx = select_batch(rng, n, config.batch_size)
        g = np.zeros(d)
        for j in idx:
            acc = 0.0
            for k in range(d):
                acc += phi[j, k] * w[k]
            r = acc - scaled.y[j]
            for k in range(d):
                g[k] += r * phi[j, k]
        for k in range(d):
            g[k] /= config.batch_size
            w[k] -= config.learning_rate * g[k]
        trajectory.append(w.copy())
    return w, trajectory, scale


# --- brute-force DBSCAN reference -------------------------------------------

class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def reference_dbscan_labels(pts: np.ndarray, radius: float, min_samples: int) -> np.ndarray:
    """Quadratic DBSCAN via union-find over core pairs.

    Clusters are numbered by ascending smallest core index; a border point
    joins the earliest-numbered cluster that reaches it, which is exactly the
    assignment a scan-order implementation produces (the cluster discovered
    first claims every unclaimed point it can reach before the next cluster
    starts growing).
    """
    n = pts.shape[0]
    within = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            within[i, j] = dx * dx + dy * dy <= radius * radius
    counts = within.sum(axis=1)
    core = counts >= min_samples

    dsu = _DisjointSet(n)
    for i in range(n):
        if not core[i]:
            continue
        for j in range(i + 1, n):
            if core[j] and within[i, j]:
                dsu.union(i, j)

    # order components by their smallest core index
    roots = sorted({dsu.find(i) for i in range(n) if core[i]})
    cluster_of_root = {root: cid for cid, root in enumerate(roots)}
    labels = np.full(n, -1, dtype=np.intp)
    for i in range(n):
        if core[i]:
            labels[i] = cluster_of_root[dsu.find(i)]
    for i in range(n):
        if core[i]:
            continue
        reaching = [labels[j] for j in range(n) if core[j] and within[i, j]]
        if reaching:
            labels[i] = min(reaching)
    return labels


def reference_dbscan_removed(dataset: Dataset, cfg) -> np.ndarray:
    """Indices dbscan_trim should remove, re-derived from the reference labels."""
    pts = np.empty((len(dataset), 2))
    for col, v in enumerate((dataset.x, dataset.y)):
        lo, hi = float(v.min()), float(v.max())
        pts[:, col] = (v - lo) / (hi - lo) if hi > lo else 0.0
    labels = reference_dbscan_labels(pts, cfg.radius, cfg.min_samples)
    n_clusters = int(labels.max()) + 1
    if n_clusters < cfg.min_clusters_to_act:
        return np.empty(0, dtype=np.intp)
    within_counts = np.zeros(len(dataset))
    for i in range(len(dataset)):
        d2 = ((pts - pts[i]) ** 2).sum(axis=1)
        within_counts[i] = int((d2 <= cfg.radius * cfg.radius).sum())
    core = within_counts >= cfg.min_samples
    best, best_key = None, None
    for cid in range(n_clusters):
        members = np.nonzero(labels == cid)[0]
        core_members = [i for i in members if core[i]]
        density = float(np.mean([within_counts[i] for i in core_members]))
        key = (density, len(members), -int(members[0]))
        if best_key is None or key > best_key:
            best, best_key = cid, key
    return np.nonzero(labels == best)[0]


# --- brute-force kernel-combine reference ------------------------------------

def reference_kernel_preprocess(dataset: Dataset, cfg):
    """Direct re-derivation of the kernel combiner as (x, y) value lists."""
    n = len(dataset)
    if n == 0:
        return [], []
    xs = [float(v) for v in dataset.x]
    ys = [float(v) for v in dataset.y]

    def origins(lo, hi, stride):
        out = []
        k = 0
        while lo + k * stride <= hi or k == 0:
            out.append(lo + k * stride)
            k += 1
        return out

    kernels = []
    for oy in origins(min(ys), max(ys), cfg.stride_y):
        for ox in origins(min(xs), max(xs), cfg.stride_x):
            kernels.append((ox, oy))

    def contains(kernel, i):
        ox, oy = kernel
        return (ox <= xs[i] <= ox + cfg.kernel_width_x
                and oy <= ys[i] <= oy + cfg.kernel_width_y)

    hot = [k for k in kernels
           if sum(contains(k, i) for i in range(n)) > cfg.threshold_fraction * n]

    assignment = {}
    for i in range(n):
        for pos, kernel in enumerate(hot):
            if contains(kernel, i):
                assignment[i] = pos
                break

    out_x, out_y = [], []
    if not cfg.strict_mode:
        for i in range(n):
            if i not in assignment:
                out_x.append(xs[i])
                out_y.append(ys[i])
    for pos in range(len(hot)):
        members = [i for i in range(n) if assignment.get(i) == pos]
        if members:
            out_x.append(float(np.mean([xs[i] for i in members])))
            out_y.append(float(np.mean([ys[i] for i in members])))
    return out_x, out_y
