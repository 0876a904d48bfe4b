"""Uniform time-series container and preparation utilities.

Scaling, chronological splitting, sliding windows for sequence models, and
seasonality / stationarity diagnostics.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import (
    AllMissing,
    DegenerateSplit,
    MissingValuesPresent,
    SeriesTooShort,
)

# Autocorrelation at the dominant candidate period must reach this for the
# series to be called seasonal.
SEASONALITY_ACF_THRESHOLD = 0.3
# Max pairwise segment-statistic difference (in units of the global std)
# tolerated before the series is called non-stationary.
STATIONARITY_DRIFT_THRESHOLD = 0.5
STATIONARITY_SEGMENTS = 4

# Window length used for full-scale LSTM runs; desk-scale tests use 48.
DEFAULT_NUM_TIMESTEPS = 1008


def _utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly spaced numeric series with an explicit missing-value mask."""

    start: datetime
    interval_seconds: float
    values: np.ndarray          # float array, NaN where missing
    missing: np.ndarray         # bool array, same length

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        missing = np.asarray(self.missing, dtype=bool)
        if len(values) != len(missing) or len(values) == 0:
            raise ValueError("values and missing mask must be nonempty and equal length")
        if self.interval_seconds <= 0:
            raise ValueError("interval must be positive")
        if not np.all(np.isfinite(values[~missing])):
            raise ValueError("non-missing values must be finite")
        object.__setattr__(self, "start", _utc(self.start))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)

    @classmethod
    def from_values(cls, values, start: datetime | None = None,
                    interval_seconds: float = 1.0) -> "TimeSeries":
        """Build a series from a plain list; None/NaN entries become missing."""
        arr = np.array([math.nan if v is None else float(v) for v in values], dtype=float)
        missing = np.isnan(arr)
        start = start or datetime(2000, 1, 1, tzinfo=timezone.utc)
        return cls(start=start, interval_seconds=interval_seconds,
                   values=arr, missing=missing)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> datetime:
        return self.start + timedelta(seconds=self.interval_seconds * (len(self) - 1))

    def timestamp_at(self, index: int) -> datetime:
        return self.start + timedelta(seconds=self.interval_seconds * index)

    def clean_values(self) -> np.ndarray:
        return self.values[~self.missing]

    def has_missing(self) -> bool:
        return bool(self.missing.any())

    def to_json_obj(self) -> dict:
        return {
            "start": self.start.isoformat(),
            "interval_seconds": self.interval_seconds,
            "values": [None if m else float(v)
                       for v, m in zip(self.values, self.missing)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TimeSeries":
        return cls.from_values(obj["values"],
                               start=datetime.fromisoformat(obj["start"]),
                               interval_seconds=float(obj["interval_seconds"]))

    @classmethod
    def from_json(cls, text: str) -> "TimeSeries":
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class Scaler:
    """Min-max scaler onto [0, 1]; constant input maps to all zeros."""

    min: float
    max: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        span = self.max - self.min
        if span == 0:
            return np.zeros_like(values)
        return (values - self.min) / span

    def invert(self, scaled: np.ndarray) -> np.ndarray:
        scaled = np.asarray(scaled, dtype=float)
        span = self.max - self.min
        if span == 0:
            return np.full_like(scaled, self.min)
        return scaled * span + self.min


@dataclass(frozen=True)
class DiagnosticsReport:
    seasonal: bool
    dominant_period: int | None
    acf_at_period: float
    stationary: bool
    segment_mean_drift: float
    segment_var_drift: float

    def to_json_obj(self) -> dict:
        return {
            "seasonal": self.seasonal,
            "dominant_period": self.dominant_period,
            "acf_at_period": self.acf_at_period,
            "stationary": self.stationary,
            "segment_mean_drift": self.segment_mean_drift,
            "segment_var_drift": self.segment_var_drift,
        }


def split(series: TimeSeries, train_fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological split; train receives ceil(fraction * len) points."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(series)
    if n < 2:
        raise SeriesTooShort(f"cannot split a series of length {n}")
    n_train = math.ceil(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"fraction {train_fraction} leaves one side empty for length {n}")
    train = TimeSeries(start=series.start, interval_seconds=series.interval_seconds,
                       values=series.values[:n_train], missing=series.missing[:n_train])
    test = TimeSeries(start=series.timestamp_at(n_train),
                      interval_seconds=series.interval_seconds,
                      values=series.values[n_train:], missing=series.missing[n_train:])
    return train, test


def sliding_windows(series: TimeSeries, num_timesteps: int) -> tuple[np.ndarray, np.ndarray]:
    """All (window, next-value target) pairs; returns (X of shape (N, T), y of shape (N,))."""
    if num_timesteps < 1:
        raise ValueError("num_timesteps must be >= 1")
    n = len(series)
    if n <= num_timesteps:
        raise SeriesTooShort(f"series length {n} yields no targets for {num_timesteps} timesteps")
    if series.has_missing():
        raise MissingValuesPresent("impute or trim missing values before windowing")
    v = series.values
    count = n - num_timesteps
    idx = np.arange(num_timesteps)[None, :] + np.arange(count)[:, None]
    return v[idx], v[num_timesteps:]


def fit_scaler(series: TimeSeries) -> Scaler:
    clean = series.clean_values()
    if len(clean) == 0:
        raise AllMissing("no non-missing values to fit a scaler")
    return Scaler(min=float(clean.min()), max=float(clean.max()))


def impute_short_gaps(series: TimeSeries, max_run: int = 2) -> TimeSeries:
    """Linearly interpolate missing runs of length <= max_run.

    Longer runs stay missing: those are for dropout detection, not hiding.
    Leading/trailing runs are never imputed (no anchor on one side).
    """
    values = series.values.copy()
    missing = series.missing.copy()
    n = len(values)
    i = 0
    while i < n:
        if not missing[i]:
            i += 1
            continue
        j = i
        while j < n and missing[j]:
            j += 1
        run = j - i
        if run <= max_run and i > 0 and j < n:
            left, right = values[i - 1], values[j]
            for k in range(run):
                values[i + k] = left + (right - left) * (k + 1) / (run + 1)
                missing[i + k] = False
        i = j
    return TimeSeries(start=series.start, interval_seconds=series.interval_seconds,
                      values=values, missing=missing)


def _acf_at_lag(values: np.ndarray, missing: np.ndarray, lag: int) -> float:
    """Pearson correlation of the series with itself at the given lag,
    pairs with either side missing excluded."""
    a = values[:-lag]
    b = values[lag:]
    ok = ~missing[:-lag] & ~missing[lag:]
    if ok.sum() < 3:
        return 0.0
    a, b = a[ok], b[ok]
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def diagnose(series: TimeSeries, candidate_periods: list[int]) -> DiagnosticsReport:
    """Seasonality via ACF at candidate periods; stationarity via segment drift."""
    if not candidate_periods:
        raise ValueError("at least one candidate period required")
    if any(p < 2 for p in candidate_periods):
        raise ValueError("candidate periods must be >= 2")
    n = len(series)
    if n < 3 * max(candidate_periods):
        raise SeriesTooShort(
            f"length {n} < 3 x max candidate period {max(candidate_periods)}")

    acfs = {p: _acf_at_lag(series.values, series.missing, p) for p in candidate_periods}
    dominant = max(candidate_periods, key=lambda p: acfs[p])
    acf_at = acfs[dominant]
    seasonal = acf_at >= SEASONALITY_ACF_THRESHOLD

    clean_all = series.clean_values()
    global_std = float(clean_all.std())
    seg_len = n // STATIONARITY_SEGMENTS
    means, stds = [], []
    for s in range(STATIONARITY_SEGMENTS):
        lo = s * seg_len
        hi = n if s == STATIONARITY_SEGMENTS - 1 else lo + seg_len
        seg = series.values[lo:hi][~series.missing[lo:hi]]
        if len(seg) == 0:
            continue
        means.append(float(seg.mean()))
        stds.append(float(seg.std()))
    if global_std == 0 or len(means) < 2:
        mean_drift = var_drift = 0.0
    else:
        mean_drift = (max(means) - min(means)) / global_std
        var_drift = (max(stds) - min(stds)) / global_std
    stationary = (mean_drift < STATIONARITY_DRIFT_THRESHOLD
                  and var_drift < STATIONARITY_DRIFT_THRESHOLD)

    return DiagnosticsReport(
        seasonal=bool(seasonal),
        dominant_period=int(dominant) if seasonal else None,
        acf_at_period=acf_at,
        stationary=bool(stationary),
        segment_mean_drift=mean_drift,
        segment_var_drift=var_drift,
    )
