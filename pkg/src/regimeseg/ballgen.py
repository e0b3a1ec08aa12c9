"""Spatial event definition: fixed-size neighbor balls around K-Means centroids.

Each ball marks the time points whose observation lands inside it, giving one
excursion sequence per ball. Region-wise event rates fitted to each sequence
are stacked column-by-column into the N x V feature matrix consumed by the
final clustering step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SizeError, ValidationError
from .excursion import ball_encode
from .hfs import hfs_search
from .kmeans import kmeans_fit
from .seeding import stage_rng
from .timeseries import _readonly


@dataclass(frozen=True)
class BallSet:
    """V same-size index sets with the centroids that seeded them."""

    members: np.ndarray  # (V, M) row indices, each row ascending
    centroids: np.ndarray  # (V, p)

    def __post_init__(self):
        members = np.asarray(self.members, dtype=np.int64)
        centroids = np.asarray(self.centroids, dtype=np.float64)
        if members.ndim != 2 or centroids.ndim != 2 or members.shape[0] != centroids.shape[0]:
            raise ValidationError("members and centroids must agree on the number of balls")
        object.__setattr__(self, "members", _readonly(members))
        object.__setattr__(self, "centroids", _readonly(centroids))

    @property
    def n_balls(self) -> int:
        return self.members.shape[0]

    @property
    def ball_size(self) -> int:
        return self.members.shape[1]


@dataclass(frozen=True)
class FeatureMatrix:
    """N x V matrix of per-time event-rate estimates, one column per ball."""

    values: np.ndarray
    ball_ref: BallSet

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("feature values must be 2-d")
        if values.shape[1] != self.ball_ref.n_balls:
            raise ValidationError("column count does not match the ball set")
        if values.size and (values.min() <= 0.0 or values.max() >= 1.0):
            raise ValidationError("feature entries must lie strictly inside (0,1)")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def kmeans(
    x: np.ndarray, n_clusters: int, seed: int = 0, n_restarts: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Plain K-Means on the rows of x; returns (centroids, assignments)."""
    labels, centroids, _ = kmeans_fit(
        x, n_clusters, rng=stage_rng(seed, "balls"), n_restarts=n_restarts
    )
    return centroids, labels


def generate_balls(x: np.ndarray, centroids: np.ndarray, ratio: float = 0.1) -> BallSet:
    """For each centroid, collect its ceil(ratio * N) nearest rows of x.

    Distance ties resolve to the lower row index; balls may overlap.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 < ratio < 1.0:
        raise ParameterError(f"ratio must lie in (0,1), got {ratio}")
    n = x.shape[0]
    m = math.ceil(ratio * n)
    if m > n:
        raise SizeError(f"ball size {m} exceeds the number of points {n}")
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    members = np.empty((centroids.shape[0], m), dtype=np.int64)
    for v, c in enumerate(centroids):
        d2 = ((x - c) ** 2).sum(axis=1)
        members[v] = np.sort(np.argsort(d2, kind="stable")[:m])
    return BallSet(members, centroids)


def extract_features(
    x: np.ndarray,
    n_balls: int = 100,
    ratio: float = 0.1,
    criterion: str = "aic",
    seed: int = 0,
    n_restarts: int = 1,
    gap_floor_q: float = 0.0,
    penalty: str = "boundaries",
) -> tuple[FeatureMatrix, BallSet]:
    """Build the N x V event-rate feature matrix for the rows of x.

    Pipeline per ball: membership marks -> threshold search -> expand each
    region's fitted rate over its time points. Balls whose search settles on
    a single region produce constant (uninformative) columns, which is fine;
    the downstream weighting discounts them.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("data must be an N x p matrix")
    n = x.shape[0]
    if n_balls > n:
        raise SizeError(f"cannot place {n_balls} balls on {n} points")
    centroids, _ = kmeans(x, n_balls, seed=seed, n_restarts=n_restarts)
    balls = generate_balls(x, centroids, ratio)
    feats = np.empty((n, balls.n_balls), dtype=np.float64)
    for v in range(balls.n_balls):
        seg = hfs_search(
            ball_encode(n, balls.members[v]),
            criterion=criterion,
            penalty=penalty,
            gap_floor_q=gap_floor_q,
        ).segmentation
        rates = np.empty(seg.k, dtype=np.float64)
        for j, rate in seg.region_rates.items():
            rates[j] = rate
        feats[:, v] = rates[seg.labels]
    return FeatureMatrix(feats, balls), balls
