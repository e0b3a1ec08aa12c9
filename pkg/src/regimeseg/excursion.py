"""0/1 event encoding of series and the gap structure between events.

An excursion sequence marks each time point as an event of interest (tail
exceedance or membership of a spatial ball). The gaps between successive
events carry the distributional signal: under exchangeable data they behave
like draws from a geometric law on {0, 1, 2, ...} with success rate M/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .timeseries import _readonly


@dataclass(frozen=True)
class ExcursionSequence:
    """Length-N 0/1 marks; a 1 at position t flags an event at time t."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1:
            raise ValidationError("bits must be one-dimensional")
        if not np.isin(bits, (0, 1)).all():
            raise ValidationError("bits must be 0/1 valued")
        object.__setattr__(self, "bits", _readonly(bits.astype(np.uint8)))

    @property
    def n_points(self) -> int:
        return self.bits.shape[0]

    @property
    def n_events(self) -> int:
        return int(self.bits.sum())

    def event_positions(self) -> np.ndarray:
        """0-based indices of the 1s, ascending."""
        return np.flatnonzero(self.bits)


@dataclass(frozen=True)
class RecurrenceTimes:
    """The M+1 zero-gap lengths tiling a 0/1 sequence of length N.

    Entry 0 counts zeros before the first event, entry i the zeros between
    events i and i+1, and the last entry the zeros after the final event.
    Two adjacent events yield a gap of 0; sum(times) + M == N always.
    """

    times: np.ndarray
    total_length: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        if times.ndim != 1 or times.shape[0] < 1:
            raise ValidationError("times must be a non-empty 1-d array")
        if np.any(times < 0):
            raise ValidationError("recurrence times must be nonnegative")
        n = int(self.total_length)
        if int(times.sum()) + (times.shape[0] - 1) != n:
            raise ValidationError("recurrence times do not tile the sequence length")
        object.__setattr__(self, "times", _readonly(times))
        object.__setattr__(self, "total_length", n)

    @property
    def n_events(self) -> int:
        return self.times.shape[0] - 1

    def interior(self) -> np.ndarray:
        """Gaps strictly between events (drops the censored end gaps)."""
        return self.times[1:-1]


def threshold_encode(x: np.ndarray, lower: float, upper: float) -> ExcursionSequence:
    """Mark x_t as an event when x_t <= lower or x_t >= upper."""
    x = np.asarray(x, dtype=np.float64)
    return ExcursionSequence(((x <= lower) | (x >= upper)).astype(np.uint8))


def empirical_quantile(x: np.ndarray, q: float) -> float:
    """Order statistic at rank ceil(q * N), 1-based."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    rank = int(np.ceil(q * n))
    rank = min(max(rank, 1), n)
    return float(x[rank - 1])


def tail_encode(x: np.ndarray, alpha: float = 0.05, beta: float = 0.95) -> ExcursionSequence:
    """Mark both tails of a univariate sample as events.

    `alpha` is the lower tail probability, `beta` the upper quantile level;
    roughly a fraction alpha + (1 - beta) of points get marked. Requires
    0 < alpha < 0.5 < beta < 1.
    """
    if not (0.0 < alpha < 0.5 < beta < 1.0):
        raise ParameterError(f"need 0 < alpha < 0.5 < beta < 1, got alpha={alpha}, beta={beta}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("tail encoding requires a 1-d sample")
    return threshold_encode(x, empirical_quantile(x, alpha), empirical_quantile(x, beta))


def ball_encode(n_points: int, members: np.ndarray) -> ExcursionSequence:
    """Mark the time points whose observation falls in a given index set."""
    members = np.asarray(members, dtype=np.int64)
    if members.size and (members.min() < 0 or members.max() >= n_points):
        raise ValidationError("ball member index out of range")
    bits = np.zeros(n_points, dtype=np.uint8)
    bits[members] = 1
    return ExcursionSequence(bits)


def recurrence_times(e: ExcursionSequence) -> RecurrenceTimes:
    """Zero-gap lengths before, between, and after the events of `e`."""
    n = e.n_points
    pos = e.event_positions()
    m = pos.shape[0]
    if m == 0:
        return RecurrenceTimes(np.array([n], dtype=np.int64), n)
    times = np.empty(m + 1, dtype=np.int64)
    times[0] = pos[0]
    times[1:m] = np.diff(pos) - 1
    times[m] = n - 1 - pos[-1]
    return RecurrenceTimes(times, n)
