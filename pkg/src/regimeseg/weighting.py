"""Final decoding: feature-weighted K-Means over the event-rate matrix.

Cluster labels and feature weights are refined alternately: cluster under the
current weights, score each feature's relevance to the clustering, then move
the weights a step toward the normalized scores. Four scoring rules are
provided: between/within separation ratio (fwsa), normalized mutual
information (nmi), per-ball rate difference between the two clusters (delta),
and negative-exponential ball label entropy (entropy).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ballgen import BallSet, FeatureMatrix
from .errors import ParameterError, ValidationError
from .hfs import Segmentation
from .kmeans import kmeans_fit
from .seeding import stage_rng

METHODS = ("fwsa", "nmi", "delta", "entropy")
NMI_NORMS = ("sym", "min", "max", "geom")


@dataclass(frozen=True)
class DecodeConfig:
    method: str
    k: int = 2
    eta: float = 0.5
    max_iter: int = 50
    tol: float = 1e-6
    seed: int = 0
    n_restarts: int = 5
    nmi_norm: str = "sym"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"learning rate must lie in (0,1], got {self.eta}")
        if self.k < 2:
            raise ParameterError(f"need at least 2 clusters, got {self.k}")
        if self.method == "delta" and self.k != 2:
            raise ParameterError("the delta rule is defined for k=2 only")
        if self.nmi_norm not in NMI_NORMS:
            raise ParameterError(f"nmi_norm must be one of {NMI_NORMS}, got {self.nmi_norm!r}")


@dataclass
class DecodeResult:
    segmentation: Segmentation
    weights: np.ndarray
    trace: list[dict] = field(repr=False)
    converged: bool = True
    n_iterations: int = 0


def uniform_weights(n_features: int) -> np.ndarray:
    return np.full(n_features, 1.0 / n_features)


def _as_matrix(features) -> np.ndarray:
    return features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)


def weighted_kmeans(
    features,
    k: int,
    weights: np.ndarray,
    seed: int = 0,
    init_centroids: np.ndarray | None = None,
    n_restarts: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """K-Means under the weighted squared Euclidean metric; returns (labels, centroids)."""
    labels, centroids, _ = kmeans_fit(
        _as_matrix(features),
        k,
        weights=np.asarray(weights, dtype=np.float64),
        rng=stage_rng(seed, "decode"),
        n_restarts=n_restarts,
        init_centroids=init_centroids,
    )
    return labels, centroids


def _normalize_scores(raw: np.ndarray) -> np.ndarray:
    total = raw.sum()
    if total <= 0.0:
        return uniform_weights(raw.shape[0])
    return raw / total


def fwsa_target(features, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Per-feature between-cluster vs within-cluster separation, normalized to sum 1.

    Features with no between-cluster spread score 0; with no spread anywhere
    the scores fall back to uniform.
    """
    y = _as_matrix(features)
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=centroids.shape[0])
    within = ((y - centroids[labels]) ** 2).sum(axis=0)
    between = (counts[:, None] * (centroids - y.mean(axis=0)) ** 2).sum(axis=0)
    if not np.any(between > 0.0):
        return uniform_weights(y.shape[1])
    return _normalize_scores(between / (within + 1e-12))


def _entropy(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    nz = counts[counts > 0]
    return float(np.log(n) - (nz * np.log(nz)).sum() / n)


def column_codes(matrix: np.ndarray) -> list[tuple[np.ndarray, int]]:
    """Integer category codes per column; feature values are already discrete."""
    out = []
    for v in range(matrix.shape[1]):
        cats, codes = np.unique(matrix[:, v], return_inverse=True)
        out.append((codes, cats.shape[0]))
    return out


def _nmi(labels: np.ndarray, codes: np.ndarray, n_cats: int, k: int, norm: str) -> float:
    joint = np.bincount(labels * n_cats + codes, minlength=k * n_cats).astype(np.float64)
    n = labels.shape[0]
    h_l = _entropy(np.bincount(labels, minlength=k).astype(np.float64))
    h_y = _entropy(joint.reshape(k, n_cats).sum(axis=0))
    if h_l == 0.0 or h_y == 0.0:
        return 0.0
    mi = max(h_l + h_y - _entropy(joint), 0.0)
    if norm == "sym":
        return 2.0 * mi / (h_l + h_y)
    if norm == "min":
        return mi / min(h_l, h_y)
    if norm == "max":
        return mi / max(h_l, h_y)
    return mi / np.sqrt(h_l * h_y)


def nmi_target(
    features,
    labels: np.ndarray,
    norm: str = "sym",
    codes: list[tuple[np.ndarray, int]] | None = None,
) -> np.ndarray:
    """Normalized mutual information between each feature and the cluster labels.

    Each column's distinct values act as categories directly. All-zero NMI
    (e.g. a degenerate clustering) falls back to uniform scores.
    """
    if norm not in NMI_NORMS:
        raise ParameterError(f"nmi_norm must be one of {NMI_NORMS}, got {norm!r}")
    y = _as_matrix(features)
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1
    if codes is None:
        codes = column_codes(y)
    raw = np.array([_nmi(labels, c, ncat, k, norm) for c, ncat in codes])
    return _normalize_scores(raw)


def delta_target(balls: BallSet, labels: np.ndarray) -> np.ndarray:
    """Absolute difference of each ball's occupancy rate between the two clusters.

    The occupancy rate of ball v in cluster j is the fraction of cluster-j
    time points that fall inside the ball.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.max() > 1:
        raise ParameterError("the delta rule is defined for k=2 only")
    n1 = int(labels.sum())
    n0 = labels.shape[0] - n1
    if n0 == 0 or n1 == 0:
        raise ValidationError("both clusters must be nonempty for the delta rule")
    member_labels = labels[balls.members]
    c1 = member_labels.sum(axis=1)
    c0 = balls.ball_size - c1
    return _normalize_scores(np.abs(c1 / n1 - c0 / n0))


def entropy_target(balls: BallSet, labels: np.ndarray, k: int = 2) -> np.ndarray:
    """exp(-entropy) of cluster labels inside each ball, normalized to sum 1.

    Pure balls (a single cluster inside) get the maximal raw score 1; a ball
    spread uniformly over k clusters gets 1/k.
    """
    labels = np.asarray(labels, dtype=np.int64)
    member_labels = labels[balls.members]
    counts = np.stack([(member_labels == j).sum(axis=1) for j in range(k)], axis=1)
    props = counts / balls.ball_size
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(props > 0.0, props * np.log(props), 0.0)
    return _normalize_scores(np.exp(plogp.sum(axis=1)))


def update_weights(w: np.ndarray, target: np.ndarray, eta: float = 0.5) -> np.ndarray:
    """Convex step from the current weights toward the target scores.

    Stays on the simplex; a target equal to the weights is an exact fixpoint.
    """
    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"learning rate must lie in (0,1], got {eta}")
    w = np.asarray(w, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if abs(target.sum() - 1.0) > 1e-6 or np.any(target < 0.0):
        raise ValidationError("target scores must be nonnegative and sum to 1")
    out = w + eta * (target - w)
    np.maximum(out, 0.0, out=out)
    total = out.sum()
    if abs(total - 1.0) > 1e-12:
        out = out / total
    return out


def decode(features, balls: BallSet, config: DecodeConfig) -> DecodeResult:
    """Alternate weighted clustering and weight refinement until the weights settle.

    Starts from uniform weights; each pass reclusters (warm-started after the
    first), scores features with the configured rule, and steps the weights.
    Stops when the largest weight change drops below `tol` or after
    `max_iter` passes (flagged as not converged).
    """
    y = _as_matrix(features)
    n, n_features = y.shape
    if balls.n_balls != n_features:
        raise ValidationError("ball set does not match the feature matrix")
    rng = stage_rng(config.seed, "decode")
    codes = column_codes(y) if config.method == "nmi" else None
    w = uniform_weights(n_features)
    centroids = None
    labels = None
    trace: list[dict] = []
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        labels, centroids, _ = kmeans_fit(
            y,
            config.k,
            weights=w,
            rng=rng,
            n_restarts=config.n_restarts if centroids is None else 1,
            init_centroids=centroids,
        )
        if config.method == "fwsa":
            target = fwsa_target(y, labels, centroids)
        elif config.method == "nmi":
            target = nmi_target(y, labels, norm=config.nmi_norm, codes=codes)
        elif config.method == "delta":
            target = delta_target(balls, labels)
        else:
            target = entropy_target(balls, labels, config.k)
        new_w = update_weights(w, target, config.eta)
        max_delta = float(np.abs(new_w - w).max())
        trace.append(
            {
                "iteration": iteration,
                "max_delta": max_delta,
                "weights": new_w.tolist(),
                "target": target.tolist(),
            }
        )
        w = new_w
        if max_delta < config.tol:
            converged = True
            break
    seg = Segmentation(labels, config.k, None)
    return DecodeResult(seg, w, trace, converged, iteration)
