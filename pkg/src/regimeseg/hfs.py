"""Two-level recurrence coding that splits a 0/1 sequence into alternating regions.

The decoder marks long gaps between events (first level), then long runs of
short gaps (second level): a run of at least `run_threshold` consecutive short
gaps is a dense-event episode and its spanned time interval gets label 0; all
remaining time points get label 1. Candidate threshold pairs are scored by a
penalized Bernoulli log-likelihood with one geometric rate per hidden state
and a complexity charge per alternating segment, and the best pair is found
by exhaustive search over data-driven threshold grids.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError, SizeError, ValidationError
from .excursion import ExcursionSequence, RecurrenceTimes, recurrence_times
from .timeseries import _readonly

CRITERIA = ("aic", "bic")
PENALTIES = ("segments", "states", "boundaries")
DEFAULT_MAX_LEVELS = 50


@dataclass(frozen=True)
class HfsParams:
    """Threshold pair: minimum long-gap length and minimum short-gap run length."""

    gap_threshold: int
    run_threshold: int

    def __post_init__(self):
        if self.gap_threshold < 1 or self.run_threshold < 1:
            raise ParameterError("both thresholds must be >= 1")


@dataclass(frozen=True)
class Segmentation:
    """Per-time hidden-state labels with optional per-state event rates."""

    labels: np.ndarray
    k: int
    region_rates: Optional[dict[int, float]] = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValidationError(f"labels must lie in [0, {self.k})")
        if self.region_rates is not None:
            for j, rate in self.region_rates.items():
                if not 0.0 < rate < 1.0:
                    raise ValidationError(f"rate for state {j} outside (0,1): {rate}")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def n_points(self) -> int:
        return self.labels.shape[0]

    @property
    def n_switches(self) -> int:
        return int(np.count_nonzero(np.diff(self.labels)))

    @property
    def n_segments(self) -> int:
        return self.n_switches + 1


@dataclass(frozen=True)
class FitReport:
    """Penalized-likelihood score broken into its reproducible parts."""

    loss: float
    criterion: str
    n_params: int
    per_region_loglik: tuple[float, ...]
    n_points: int

    @property
    def penalty_weight(self) -> float:
        return 2.0 if self.criterion == "aic" else math.log(self.n_points)


class HfsResult(NamedTuple):
    segmentation: Segmentation
    report: FitReport
    params: Optional[HfsParams]


def _clamped_rate(n_events: float, n_points: float) -> float:
    # Half-count correction keeps log-likelihoods finite on event-free regions.
    eps = 0.5 / n_points
    return float(min(max(n_events / n_points, eps), 1.0 - eps))


def _zero_runs(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start/end (inclusive) indices of maximal runs of False in `mask`."""
    padded = np.concatenate(([1], mask.astype(np.int8), [1]))
    delta = np.diff(padded)
    return np.flatnonzero(delta == -1), np.flatnonzero(delta == 1) - 1


def _dense_intervals(
    times: np.ndarray, positions: np.ndarray, gap_threshold: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per short-gap run: run length and the spanned time interval.

    A run of short gaps at gap indices i..j connects events i-1 through j
    (clamped to the real event range), so its time interval runs from the
    position of its first event to the position of its last.
    """
    m = positions.shape[0]
    starts, ends = _zero_runs(times >= gap_threshold)
    e_start = np.maximum(starts - 1, 0)
    e_end = np.minimum(ends, m - 1)
    run_len = ends - starts + 1
    t_start = positions[e_start]
    t_end = positions[e_end]
    n_events = e_end - e_start + 1
    return run_len, t_start, t_end, n_events


def _rates_from_labels(labels: np.ndarray, positions: np.ndarray, k: int) -> dict[int, float]:
    n_j = np.bincount(labels, minlength=k)
    m_j = np.bincount(labels[positions], minlength=k) if positions.size else np.zeros(k, dtype=np.int64)
    return {j: _clamped_rate(m_j[j], n_j[j]) for j in range(k) if n_j[j] > 0}


def hfs_decode(rec: RecurrenceTimes, params: HfsParams, event_positions: np.ndarray) -> Segmentation:
    """Apply the two-level coding for one threshold pair.

    Dense-event episodes (runs of at least `run_threshold` short gaps) become
    label 0 over their spanned time intervals; everything else is label 1.
    With no events at all the whole axis is a single label-0 region.
    """
    n = rec.total_length
    positions = np.asarray(event_positions, dtype=np.int64)
    if rec.n_events != positions.shape[0]:
        raise ValidationError("event positions inconsistent with recurrence times")
    if rec.n_events == 0:
        labels = np.zeros(n, dtype=np.int64)
        return Segmentation(labels, 2, {0: _clamped_rate(0, n)})
    run_len, t_start, t_end, _ = _dense_intervals(rec.times, positions, params.gap_threshold)
    labels = np.ones(n, dtype=np.int64)
    for a, b in zip(t_start[run_len >= params.run_threshold], t_end[run_len >= params.run_threshold]):
        labels[a : b + 1] = 0
    return Segmentation(labels, 2, _rates_from_labels(labels, positions, 2))


def geometric_mle(e: ExcursionSequence, seg: Segmentation) -> dict[int, float]:
    """Per-state event-rate estimates, clamped away from 0 and 1.

    The rate of state j is (events in j) / (length of j) with a half-count
    correction. States with no time points are dropped with a warning.
    """
    if seg.n_points != e.n_points:
        raise ValidationError("segmentation length does not match sequence length")
    rates = _rates_from_labels(seg.labels, e.event_positions(), seg.k)
    if len(rates) < seg.k:
        missing = sorted(set(range(seg.k)) - set(rates))
        warnings.warn(f"states {missing} have no time points; excluded from rate estimates")
    return rates


def segmentation_loss(
    e: ExcursionSequence,
    seg: Segmentation,
    criterion: str = "aic",
    penalty: str = "segments",
) -> FitReport:
    """Penalized minus-two log-likelihood of a segmentation.

    The likelihood treats each state's marks as Bernoulli with that state's
    clamped rate. The complexity charge counts one parameter per alternating
    temporal segment by default ('segments'), or one per distinct occupied
    state ('states'), weighted by 2 (aic) or log N (bic).
    """
    if criterion not in CRITERIA:
        raise ParameterError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if penalty not in PENALTIES:
        raise ParameterError(f"penalty must be one of {PENALTIES}, got {penalty!r}")
    if seg.n_points != e.n_points:
        raise ValidationError("segmentation does not cover the sequence")
    n = e.n_points
    labels = seg.labels
    n_j = np.bincount(labels, minlength=seg.k)
    m_j = np.bincount(labels, weights=e.bits, minlength=seg.k)
    logliks = []
    for j in range(seg.k):
        if n_j[j] == 0:
            continue
        p = _clamped_rate(m_j[j], n_j[j])
        if not 0.0 < p < 1.0:
            raise RuntimeError(f"internal error: clamped rate {p} outside (0,1)")
        logliks.append(float(m_j[j] * np.log(p) + (n_j[j] - m_j[j]) * np.log(1.0 - p)))
    if penalty == "segments":
        q = seg.n_segments
    elif penalty == "boundaries":
        # One rate per segment plus one location per switch.
        q = 2 * seg.n_segments - 1
    else:
        q = int(np.count_nonzero(n_j))
    phi = 2.0 if criterion == "aic" else math.log(n)
    loss = -2.0 * sum(logliks) + phi * q
    return FitReport(loss, criterion, q, tuple(logliks), n)


def _cap_levels(values: np.ndarray, max_levels: int) -> np.ndarray:
    """Distinct values thinned to at most `max_levels` evenly spaced quantiles."""
    values = np.unique(values)
    if values.shape[0] <= max_levels:
        return values
    idx = np.unique(np.round(np.linspace(0, values.shape[0] - 1, max_levels)).astype(np.int64))
    return values[idx]


def hfs_search(
    e: ExcursionSequence,
    criterion: str = "aic",
    penalty: str = "segments",
    max_levels: int = DEFAULT_MAX_LEVELS,
    gap_floor_q: float = 0.0,
) -> HfsResult:
    """Exhaustive threshold search minimizing the penalized loss.

    Gap thresholds range over the distinct observed gap lengths and, per gap
    threshold, run thresholds over the distinct short-gap run lengths (each
    grid thinned to at most `max_levels` quantile levels). With
    `gap_floor_q` > 0 the gap grid keeps only values above that quantile of
    the gap distribution, so marked long gaps stay the rare class. The
    single-region fit always competes. Ties break toward fewer switches,
    then the smaller threshold pair, so the result is deterministic.
    """
    if criterion not in CRITERIA:
        raise ParameterError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if penalty not in PENALTIES:
        raise ParameterError(f"penalty must be one of {PENALTIES}, got {penalty!r}")
    if not 0.0 <= gap_floor_q < 1.0:
        raise ParameterError(f"gap_floor_q must lie in [0,1), got {gap_floor_q}")
    n = e.n_points
    if n < 20:
        raise SizeError(f"need at least 20 points to search, got {n}")
    positions = e.event_positions()
    m = positions.shape[0]

    single = Segmentation(np.zeros(n, dtype=np.int64), 2, {0: _clamped_rate(m, n)})
    single_report = segmentation_loss(e, single, criterion, penalty)
    if m == 0:
        return HfsResult(single, single_report, None)

    rec = recurrence_times(e)
    times = rec.times
    phi = 2.0 if criterion == "aic" else math.log(n)
    gap_values = times[times >= 1]
    if gap_floor_q > 0.0:
        gap_values = gap_values[gap_values > np.quantile(times, gap_floor_q)]
    # Best-so-far key: (loss, n_switches, gap_threshold, run_threshold).
    best_key = (single_report.loss, 0, math.inf, math.inf)
    best_params = None

    for gap_t in _cap_levels(gap_values, max_levels):
        run_len, t_start, t_end, n_events = _dense_intervals(times, positions, int(gap_t))
        if run_len.shape[0] == 0:
            continue
        order = np.argsort(-run_len, kind="stable")
        len_sorted = run_len[order]
        cum_n0 = np.cumsum((t_end - t_start + 1)[order])
        cum_m0 = np.cumsum(n_events[order])
        cum_first = np.minimum.accumulate(t_start[order])
        cum_last = np.maximum.accumulate(t_end[order])

        thresholds = _cap_levels(len_sorted, max_levels)
        counts = np.searchsorted(-len_sorted, -thresholds, side="right")
        idx = counts - 1
        n0 = cum_n0[idx].astype(np.float64)
        m0 = cum_m0[idx].astype(np.float64)
        n1 = float(n) - n0
        m1 = float(m) - m0
        p0 = np.clip(m0 / n0, 0.5 / n0, 1.0 - 0.5 / n0)
        ll = m0 * np.log(p0) + (n0 - m0) * np.log(1.0 - p0)
        occupied = n1 > 0
        if occupied.any():
            n1s = np.where(occupied, n1, 1.0)
            p1 = np.clip(m1 / n1s, 0.5 / n1s, 1.0 - 0.5 / n1s)
            ll = ll + np.where(occupied, m1 * np.log(p1) + (n1s - m1) * np.log(1.0 - p1), 0.0)
        segments = 2 * counts - 1 + (cum_first[idx] > 0) + (cum_last[idx] < n - 1)
        if penalty == "segments":
            q = segments
        elif penalty == "boundaries":
            q = 2 * segments - 1
        else:
            q = 1 + occupied.astype(np.int64)
        losses = -2.0 * ll + phi * q

        for i in range(thresholds.shape[0]):
            key = (float(losses[i]), int(segments[i]) - 1, int(gap_t), int(thresholds[i]))
            if key < best_key:
                best_key = key
                best_params = HfsParams(int(gap_t), int(thresholds[i]))

    if best_params is None:
        return HfsResult(single, single_report, None)
    seg = hfs_decode(rec, best_params, positions)
    return HfsResult(seg, segmentation_loss(e, seg, criterion, penalty), best_params)


def pp_plot_data(rec: RecurrenceTimes, p: float) -> np.ndarray:
    """Empirical-vs-geometric CDF pairs for the observed gap lengths.

    Returns one row (empirical CDF, 1 - (1-p)^(r+1)) per distinct gap value r,
    ascending in r. Points hug the diagonal when the gaps are geometric(p).
    """
    if not 0.0 < p < 1.0:
        raise ParameterError(f"rate must lie in (0,1), got {p}")
    values, counts = np.unique(rec.times, return_counts=True)
    empirical = np.cumsum(counts) / rec.times.shape[0]
    theoretical = 1.0 - (1.0 - p) ** (values + 1.0)
    return np.column_stack([empirical, theoretical])
