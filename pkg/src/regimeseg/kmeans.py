"""Lloyd's algorithm with optional per-feature weights.

Distances are weighted squared Euclidean, d(y, c) = sum_v w_v (y_v - c_v)^2,
while centroid updates stay plain per-cluster means, so a weight vector only
reshapes the metric. Uniform weights therefore reproduce ordinary K-Means
exactly, including the seeding draws.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeError, ValidationError


def _pairwise_sq(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d2 = (x * x).sum(axis=1)[:, None] - 2.0 * (x @ c.T) + (c * c).sum(axis=1)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _plusplus_init(xs: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread starting centroids by squared distance."""
    n = xs.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = _pairwise_sq(xs, xs[chosen[0] : chosen[0] + 1])[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            chosen[j] = rng.choice(n, p=d2 / total)
        else:
            chosen[j] = rng.integers(n)
        d2 = np.minimum(d2, _pairwise_sq(xs, xs[chosen[j] : chosen[j] + 1])[:, 0])
    return chosen


def _assign(xs: np.ndarray, centroids_scaled: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    d2 = _pairwise_sq(xs, centroids_scaled)
    labels = d2.argmin(axis=1)
    dmin = d2[np.arange(labels.shape[0]), labels]
    # Reseed any emptied cluster to the point farthest from its own centroid.
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        far = int(dmin.argmax())
        labels[far] = j
        dmin[far] = 0.0
    return labels, dmin


def _lloyd(
    x: np.ndarray,
    xs: np.ndarray,
    scale: np.ndarray,
    k: int,
    centroids: np.ndarray,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, float]:
    labels = None
    dmin = None
    for _ in range(max_iter):
        new_labels, dmin = _assign(xs, centroids * scale, k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros((k, x.shape[1]))
        np.add.at(sums, labels, x)
        centroids = sums / np.bincount(labels, minlength=k)[:, None]
    else:
        labels, dmin = _assign(xs, centroids * scale, k)
    return labels, centroids, float(dmin.sum())


def kmeans_fit(
    x: np.ndarray,
    k: int,
    weights: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    n_restarts: int = 1,
    init_centroids: np.ndarray | None = None,
    max_iter: int = 100,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Cluster rows of x; returns (labels, centroids, weighted inertia).

    With `init_centroids` the run warm-starts from them (single run, no
    seeding). Otherwise the best of `n_restarts` k-means++ runs by weighted
    within-cluster sum of squares wins; results are deterministic given `rng`.
    """
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 2:
        raise ValidationError("data must be a 2-d array")
    n, d = x.shape
    if not 1 <= k <= n:
        raise SizeError(f"cluster count must be in [1, {n}], got {k}")
    if weights is None:
        scale = np.ones(d)
        w_max = 1.0
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (d,) or np.any(weights < 0):
            raise ValidationError("weights must be a nonnegative vector matching the feature count")
        w_max = float(weights.max())
        if w_max == 0.0:
            raise ValidationError("weights must not all be zero")
        # Rescale so uniform weights reduce bit-for-bit to the unweighted run.
        scale = np.sqrt(weights / w_max)
    xs = x * scale

    if init_centroids is not None:
        init = np.asarray(init_centroids, dtype=np.float64)
        if init.shape != (k, d):
            raise ValidationError(f"init_centroids must have shape ({k}, {d})")
        labels, centroids, inertia = _lloyd(x, xs, scale, k, init.copy(), max_iter)
        return labels, centroids, inertia * w_max

    if rng is None:
        rng = np.random.default_rng()
    best = None
    for _ in range(max(1, n_restarts)):
        seeds = _plusplus_init(xs, k, rng)
        labels, centroids, inertia = _lloyd(x, xs, scale, k, x[seeds].copy(), max_iter)
        if best is None or inertia < best[2]:
            best = (labels, centroids, inertia)
    return best[0], best[1], best[2] * w_max
