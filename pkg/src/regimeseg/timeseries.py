"""Multivariate series container, CSV round-trip, and dependence-breaking transforms.

The on-disk format is plain UTF-8 CSV: column 1 is the time index, columns
2..p+1 are values. Series derived by lag embedding or block permutation carry
the integer position sequence 1..N' as their time index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ParameterError, ParseError, SizeError, ValidationError
from .seeding import stage_rng

FLOAT_FMT = "%.12g"


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class MultiSeries:
    """N observations of a p-dimensional series with a strictly increasing time index."""

    values: np.ndarray
    time_index: np.ndarray
    dim_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-d array (rows = time points)")
        n, p = values.shape
        if n < 2:
            raise ValidationError(f"need at least 2 time points, got {n}")
        if p < 1:
            raise ValidationError("need at least 1 dimension")
        if not np.all(np.isfinite(values)):
            raise ValidationError("values contain non-finite entries")
        time_index = np.asarray(self.time_index)
        if time_index.shape != (n,):
            raise ValidationError("time_index length does not match row count")
        if not np.all(time_index[1:] > time_index[:-1]):
            raise ValidationError("time_index must be strictly increasing")
        names = tuple(str(d) for d in self.dim_names)
        if len(names) != p:
            raise ValidationError("dim_names length does not match column count")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "time_index", _readonly(time_index))
        object.__setattr__(self, "dim_names", names)

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    def column(self, name_or_idx) -> np.ndarray:
        if isinstance(name_or_idx, str):
            try:
                idx = self.dim_names.index(name_or_idx)
            except ValueError:
                raise ValidationError(f"no column named {name_or_idx!r}") from None
        else:
            idx = int(name_or_idx)
        return self.values[:, idx]


def from_array(values: np.ndarray, dim_names=None) -> MultiSeries:
    """Wrap a plain array with the 1..N position index."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] == 1 and values.shape[1] > 1:
        values = values.T
    n, p = values.shape
    if dim_names is None:
        dim_names = tuple(f"x{i + 1}" for i in range(p))
    return MultiSeries(values, np.arange(1, n + 1, dtype=np.int64), tuple(dim_names))


def _parse_time_column(raw: list[str]) -> np.ndarray:
    for cast, dtype in ((int, np.int64), (float, np.float64)):
        try:
            return np.array([cast(v) for v in raw], dtype=dtype)
        except ValueError:
            continue
    try:
        return np.array(raw, dtype="datetime64[s]")
    except ValueError:
        raise ParseError("time index column is neither numeric nor ISO timestamps") from None


def load_csv(path, has_header: bool = True) -> MultiSeries:
    """Read a series CSV; column 1 is the time index, the rest are values.

    Raises ParseError with the 1-based line number on a malformed row and
    ValidationError when the index is not strictly increasing or N < 2.
    """
    times_raw: list[str] = []
    rows: list[list[float]] = []
    names: tuple[str, ...] | None = None
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and has_header:
                names = tuple(c.strip() for c in row[1:])
                width = len(row)
                continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise ParseError(f"line {lineno}: expected {width} fields, got {len(row)}")
            if width < 2:
                raise ParseError(f"line {lineno}: need a time column plus at least one value column")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            times_raw.append(row[0].strip())
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(rows)}")
    time_index = _parse_time_column(times_raw)
    if not np.all(time_index[1:] > time_index[:-1]):
        raise ValidationError(f"{path}: time index not strictly increasing (duplicate or out of order)")
    p = len(rows[0])
    if names is None or len(names) != p:
        names = tuple(f"x{i + 1}" for i in range(p))
    return MultiSeries(np.asarray(rows, dtype=np.float64), time_index, names)


def save_csv(series: MultiSeries, path, header: bool = True) -> None:
    """Write a series in the same layout load_csv expects (12 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(("time",) + series.dim_names)
        time_index = series.time_index
        int_time = np.issubdtype(time_index.dtype, np.integer)
        for i in range(series.n_points):
            t = int(time_index[i]) if int_time else str(time_index[i])
            writer.writerow([t] + [FLOAT_FMT % v for v in series.values[i]])


def standardize(series: MultiSeries) -> MultiSeries:
    """Center each column to mean 0 and scale to sample standard deviation 1."""
    mean = series.values.mean(axis=0)
    sd = series.values.std(axis=0, ddof=1)
    for j, s in enumerate(sd):
        if s == 0.0 or not np.isfinite(s):
            raise DegenerateInputError(f"column {series.dim_names[j]!r} has zero variance")
    out = (series.values - mean) / sd
    return MultiSeries(out, series.time_index, series.dim_names)


def embed_lags(series: MultiSeries, lags: int) -> MultiSeries:
    """Couple each point of a univariate series with its next `lags` values.

    Row t of the output is (X_t, X_{t+1}, ..., X_{t+lags}); the output has
    N - lags rows indexed by the position of the leading coordinate.
    """
    if series.n_dims != 1:
        raise ValidationError("lag embedding requires a univariate series")
    if lags < 1:
        raise ParameterError(f"lag count must be >= 1, got {lags}")
    n = series.n_points
    if lags >= n:
        raise SizeError(f"lag count {lags} must be smaller than the series length {n}")
    x = series.values[:, 0]
    emb = np.lib.stride_tricks.sliding_window_view(x, lags + 1)
    base = series.dim_names[0]
    names = (base,) + tuple(f"{base}+{i}" for i in range(1, lags + 1))
    return MultiSeries(emb.copy(), np.arange(1, n - lags + 1, dtype=np.int64), names)


@dataclass(frozen=True)
class Permutation:
    """Row shuffle restricted to consecutive windows of fixed length.

    ``mapping[i]`` is the source row now at position i, so applying the
    permutation computes ``values[mapping]``.
    """

    mapping: np.ndarray
    window_length: int

    def __post_init__(self):
        mapping = np.asarray(self.mapping, dtype=np.int64)
        n = mapping.shape[0]
        if sorted(mapping.tolist()) != list(range(n)):
            raise ValidationError("mapping is not a permutation of 0..N-1")
        l = int(self.window_length)
        if not 1 <= l <= n:
            raise ParameterError(f"window length must be in [1, {n}], got {l}")
        # No assignment may cross a window boundary.
        if np.any(mapping // l != np.arange(n) // l):
            raise ValidationError("mapping crosses a window boundary")
        object.__setattr__(self, "mapping", _readonly(mapping))
        object.__setattr__(self, "window_length", l)

    def apply(self, series: MultiSeries) -> MultiSeries:
        return MultiSeries(
            series.values[self.mapping],
            np.arange(1, series.n_points + 1, dtype=np.int64),
            series.dim_names,
        )

    def apply_to_array(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr)[self.mapping]

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.mapping.shape[0])
        return Permutation(inv, self.window_length)


def block_permute(series: MultiSeries, window_length: int, seed: int) -> tuple[MultiSeries, Permutation]:
    """Shuffle rows uniformly inside consecutive windows of `window_length`.

    The trailing window, when shorter, is permuted on its own. Returns the
    shuffled series together with the applied Permutation; composing with its
    inverse restores the input bit-exactly.
    """
    n = series.n_points
    if not 1 <= window_length <= n:
        raise ParameterError(f"window length must be in [1, {n}], got {window_length}")
    rng = stage_rng(seed, "permute")
    mapping = np.arange(n, dtype=np.int64)
    for start in range(0, n, window_length):
        stop = min(start + window_length, n)
        mapping[start:stop] = start + rng.permutation(stop - start)
    perm = Permutation(mapping, window_length)
    return perm.apply(series), perm
