"""Seeded generators for the synthetic benchmark scenarios.

Covers alternating-covariance bivariate Gaussian processes (cases 1-5),
regime-switching AR(1)/AR(2) processes with standard normal innovations, and
the variance-switching univariate toy. State sequences always start at state
0 and alternate; period lengths are drawn uniformly from an integer range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .seeding import stage_rng
from .timeseries import MultiSeries, _readonly

GAUSSIAN_CASES = (1, 2, 3, 4, 5)
AR_DEFAULTS = {
    1: ((0.3,), (0.7,)),
    2: ((0.3, 0.2), (0.5, 0.3)),
}


def case_covariances(case: int) -> tuple[np.ndarray, np.ndarray]:
    """State-0 and state-1 covariance matrices for benchmark case 1..5."""
    if case not in GAUSSIAN_CASES:
        raise ParameterError(f"case must be in {GAUSSIAN_CASES}, got {case}")
    eq = np.array([[1.0, 0.3], [0.3, 1.0]])
    if case == 1:
        return eq, np.array([[1.0, 0.7], [0.7, 1.0]])
    if case == 2:
        return eq, np.array([[1.0, -0.7], [-0.7, 1.0]])
    if case == 5:
        return eq, np.array([[1.0, -0.3], [-0.3, 1.0]])
    s1, s2 = 1.0, 1.5
    r = 0.6 if case == 3 else 0.2
    off = r * s1 * s2
    cov0 = np.array([[s1 * s1, off], [off, s2 * s2]])
    cov1 = np.array([[s2 * s2, off], [off, s1 * s1]])
    return cov0, cov1


def _check_stationary(phi: tuple[float, ...]) -> None:
    # Roots of 1 - phi_1 z - ... - phi_q z^q must lie outside the unit circle.
    poly = np.polynomial.Polynomial([1.0] + [-p for p in phi])
    roots = poly.roots()
    if roots.size and np.abs(roots).min() <= 1.0 + 1e-12:
        raise ValidationError(f"AR coefficients {phi} are not stationary")


@dataclass(frozen=True)
class ScenarioSpec:
    """One benchmark configuration: which generator and its switching pattern."""

    kind: str  # "gaussian" | "ar"
    case: int | None = None
    ar_order: int | None = None
    ar_params: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    n_periods: int = 10
    period_range: tuple[int, int] = (200, 400)

    def __post_init__(self):
        if self.kind not in ("gaussian", "ar"):
            raise ParameterError(f"kind must be 'gaussian' or 'ar', got {self.kind!r}")
        if self.n_periods < 2:
            raise ParameterError("need at least 2 alternating periods")
        lo, hi = self.period_range
        if not (1 <= lo <= hi):
            raise ParameterError(f"invalid period range {self.period_range}")
        if self.kind == "gaussian":
            if self.case not in GAUSSIAN_CASES:
                raise ParameterError(f"gaussian case must be in {GAUSSIAN_CASES}, got {self.case}")
        else:
            if self.ar_order not in (1, 2):
                raise ParameterError(f"AR order must be 1 or 2, got {self.ar_order}")
            params = self.ar_params if self.ar_params is not None else AR_DEFAULTS[self.ar_order]
            for phi in params:
                _check_stationary(tuple(phi))
            object.__setattr__(self, "ar_params", (tuple(params[0]), tuple(params[1])))

    def label(self) -> str:
        if self.kind == "gaussian":
            return f"Case{self.case}"
        return f"AR{self.ar_order}"


@dataclass(frozen=True)
class LabeledSeries:
    """A generated series with its true state labels and period boundaries."""

    series: MultiSeries
    truth: np.ndarray
    change_points: np.ndarray

    def __post_init__(self):
        truth = np.asarray(self.truth, dtype=np.int64)
        if truth.shape[0] != self.series.n_points:
            raise ValidationError("truth length does not match the series")
        change_points = np.asarray(self.change_points, dtype=np.int64)
        switches = np.flatnonzero(np.diff(truth)) + 1
        if not np.array_equal(switches, change_points):
            raise ValidationError("change points inconsistent with labels")
        object.__setattr__(self, "truth", _readonly(truth))
        object.__setattr__(self, "change_points", _readonly(change_points))


def _switching_periods(
    rng: np.random.Generator, n_periods: int, period_range: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = period_range
    lengths = rng.integers(lo, hi + 1, size=n_periods)
    truth = np.repeat(np.arange(n_periods) % 2, lengths)
    return truth, np.cumsum(lengths)[:-1]


def gen_switching_periods(
    n_periods: int, period_range: tuple[int, int], seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Alternating 0/1 labels over `n_periods` periods of uniform random length.

    Returns (labels, change_points) where change_points holds the 0-based
    start index of every period after the first.
    """
    if n_periods < 2:
        raise ParameterError("need at least 2 alternating periods")
    lo, hi = period_range
    if not (1 <= lo <= hi):
        raise ParameterError(f"invalid period range {period_range}")
    return _switching_periods(stage_rng(seed, "simulate"), n_periods, period_range)


def gen_bivariate_gaussian(
    case: int,
    n_periods: int = 10,
    period_range: tuple[int, int] = (200, 400),
    seed: int = 0,
) -> LabeledSeries:
    """Mean-zero bivariate normal draws whose covariance alternates with the state."""
    cov0, cov1 = case_covariances(case)
    rng = stage_rng(seed, "simulate")
    truth, change_points = _switching_periods(rng, n_periods, period_range)
    z = rng.standard_normal((truth.shape[0], 2))
    chol0 = np.linalg.cholesky(cov0)
    chol1 = np.linalg.cholesky(cov1)
    values = np.where((truth == 0)[:, None], z @ chol0.T, z @ chol1.T)
    series = MultiSeries(values, np.arange(1, truth.shape[0] + 1), ("x1", "x2"))
    return LabeledSeries(series, truth, change_points)


def gen_ar(
    order: int,
    n_periods: int = 10,
    period_range: tuple[int, int] = (200, 400),
    seed: int = 0,
    params_state0: tuple[float, ...] | None = None,
    params_state1: tuple[float, ...] | None = None,
    burn_in: int = 100,
) -> LabeledSeries:
    """Univariate AR process whose coefficients switch at period boundaries.

    The recursion starts from zeros, runs `burn_in` discarded steps under the
    state-0 coefficients, and carries its level across switches (a switch
    changes the dynamics, not the state of the recursion).
    """
    if order not in (1, 2):
        raise ParameterError(f"AR order must be 1 or 2, got {order}")
    phi0 = tuple(params_state0) if params_state0 is not None else AR_DEFAULTS[order][0]
    phi1 = tuple(params_state1) if params_state1 is not None else AR_DEFAULTS[order][1]
    if len(phi0) != order or len(phi1) != order:
        raise ParameterError(f"coefficient tuples must have length {order}")
    _check_stationary(phi0)
    _check_stationary(phi1)
    rng = stage_rng(seed, "simulate")
    truth, change_points = _switching_periods(rng, n_periods, period_range)
    n = truth.shape[0]
    phis = (phi0, phi1)
    eps = rng.standard_normal(burn_in + n)
    buf = np.zeros(burn_in + n)
    for t in range(burn_in + n):
        phi = phi0 if t < burn_in else phis[truth[t - burn_in]]
        acc = eps[t]
        for i, c in enumerate(phi, start=1):
            if t - i >= 0:
                acc += c * buf[t - i]
        buf[t] = acc
    series = MultiSeries(buf[burn_in:, None], np.arange(1, n + 1), ("x",))
    return LabeledSeries(series, truth, change_points)


def gen_sigma_switch(
    sigmas: tuple[float, float] = (1.0, 1.5),
    n_periods: int = 5,
    period_range: tuple[int, int] = (200, 200),
    seed: int = 0,
) -> LabeledSeries:
    """Independent normal draws whose standard deviation alternates with the state."""
    if min(sigmas) <= 0:
        raise ParameterError("standard deviations must be positive")
    rng = stage_rng(seed, "toy")
    truth, change_points = _switching_periods(rng, n_periods, period_range)
    values = rng.standard_normal(truth.shape[0]) * np.asarray(sigmas)[truth]
    series = MultiSeries(values[:, None], np.arange(1, truth.shape[0] + 1), ("x",))
    return LabeledSeries(series, truth, change_points)


def simulate(spec: ScenarioSpec, seed: int = 0) -> LabeledSeries:
    """Draw one replication of a benchmark scenario."""
    if spec.kind == "gaussian":
        return gen_bivariate_gaussian(spec.case, spec.n_periods, spec.period_range, seed)
    return gen_ar(
        spec.ar_order,
        spec.n_periods,
        spec.period_range,
        seed,
        params_state0=spec.ar_params[0],
        params_state1=spec.ar_params[1],
    )
