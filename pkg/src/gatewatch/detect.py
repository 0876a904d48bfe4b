"""Confidence-interval machinery and the detectors built on it.

The Z table is closed: seven tabulated confidence levels, no interpolation.
Surge detection has two modes; mean_shift (the default) scores window means
against the X +/- z*s/sqrt(n) band built from training-period point
statistics, residual mode scores pointwise forecast errors against z * sigma_r.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import UnsupportedConfidence
from .forecast import FittedForecaster
from .series import TimeSeries

Z_TABLE = {
    0.80: 1.282,
    0.85: 1.440,
    0.90: 1.645,
    0.95: 1.960,
    0.99: 2.576,
    0.995: 2.807,
    0.999: 3.291,
}

KINDS = ("Surge", "Dropout", "IdentityFlood", "Intrusion")
SEVERITIES = ("Warning", "Critical")

DEFAULT_WINDOW = 24


def z_score(confidence: float) -> float:
    try:
        return Z_TABLE[confidence]
    except KeyError:
        raise UnsupportedConfidence(
            f"{confidence} not tabulated; supported: {sorted(Z_TABLE)}") from None


@dataclass(frozen=True)
class ConfidenceBand:
    """X +/- z * s / sqrt(n) around a window mean."""

    X: float
    s: float
    n: int
    z: float

    @property
    def lower(self) -> float:
        return self.X - self.z * self.s / math.sqrt(self.n)

    @property
    def upper(self) -> float:
        return self.X + self.z * self.s / math.sqrt(self.n)

    @property
    def half_width(self) -> float:
        return self.z * self.s / math.sqrt(self.n)


def confidence_interval(window, confidence: float) -> ConfidenceBand:
    """Band for the window mean; s is the sample std (n=1 gives s=0)."""
    values = np.asarray(window, dtype=float)
    if len(values) == 0:
        raise ValueError("window must be nonempty")
    if not np.all(np.isfinite(values)):
        raise ValueError("window values must be finite")
    z = z_score(confidence)
    n = len(values)
    s = float(values.std(ddof=1)) if n > 1 else 0.0
    return ConfidenceBand(X=float(values.mean()), s=s, n=n, z=z)


@dataclass(frozen=True)
class AnomalyAlert:
    timestamp: datetime
    kind: str
    observed: float
    expected: float
    band: ConfidenceBand | None
    severity: str
    source: str
    packet_class: str | None = None
    ambiguous: bool | None = None

    def to_json_obj(self) -> dict:
        # Field order is fixed so alert streams are byte-stable.
        obj = {
            "ts": self.timestamp.isoformat(),
            "kind": self.kind,
            "observed": self.observed,
            "expected": self.expected,
            "lower": None if self.band is None else self.band.lower,
            "upper": None if self.band is None else self.band.upper,
            "severity": self.severity,
            "source": self.source,
        }
        if self.kind == "Intrusion":
            obj["class"] = self.packet_class
            obj["ambiguous"] = self.ambiguous
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def write_alerts_jsonl(alerts: list[AnomalyAlert], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for alert in alerts:
            fh.write(alert.to_json() + "\n")


def _severity(excess: float, threshold: float) -> str:
    # Critical when the exceedance is more than twice the threshold half-width.
    return "Critical" if excess > 2.0 * threshold else "Warning"


def _window_means(values: np.ndarray, width: int) -> np.ndarray:
    n_windows = len(values) // width
    if n_windows == 0:
        return np.empty(0)
    return values[:n_windows * width].reshape(n_windows, width).mean(axis=1)


def detect_surges(series: TimeSeries, model: FittedForecaster, confidence: float,
                  mode: str = "mean_shift", window: int = DEFAULT_WINDOW,
                  source: str = "") -> list[AnomalyAlert]:
    """Flag surges in a scored series against a model fitted on a disjoint
    training prefix.

    mean_shift: cut the scored series into consecutive windows of n points;
    the band is X +/- z * s / sqrt(n) with X and s taken over the training
    period, so it brackets where an n-point window mean should land. A window
    whose mean falls outside is flagged.

    residual: point t is flagged when |observed - forecast| > z * sigma_r,
    with teacher-forced one-step forecasts.
    """
    if mode not in ("mean_shift", "residual"):
        raise ValueError(f"unknown mode {mode!r}")
    z = z_score(confidence)
    alerts: list[AnomalyAlert] = []

    if mode == "mean_shift":
        train = model.train_values
        s = float(train.std(ddof=1)) if len(train) > 1 else 0.0
        band = ConfidenceBand(X=float(train.mean()), s=s, n=window, z=z)
        threshold = band.half_width
        values = np.where(series.missing, np.nan, series.values)
        n_windows = len(values) // window
        for w in range(n_windows):
            chunk = values[w * window:(w + 1) * window]
            chunk = chunk[~np.isnan(chunk)]
            if len(chunk) == 0:
                continue
            mean = float(chunk.mean())
            excess = abs(mean - band.X) - threshold
            if excess > 0:
                alerts.append(AnomalyAlert(
                    timestamp=series.timestamp_at(w * window),
                    kind="Surge", observed=mean, expected=band.X, band=band,
                    severity=_severity(excess, threshold), source=source))
        return alerts

    # residual mode
    sigma = model.residual_std
    threshold = z * sigma
    preds = model.one_step_on(np.where(series.missing, np.nan, series.values))
    for t in range(len(series)):
        if series.missing[t]:
            continue
        observed = float(series.values[t])
        forecast = float(preds[t])
        if not math.isfinite(forecast):
            continue
        excess = abs(observed - forecast) - threshold
        if excess > 0:
            band = ConfidenceBand(X=forecast, s=sigma, n=1, z=z)
            alerts.append(AnomalyAlert(
                timestamp=series.timestamp_at(t),
                kind="Surge", observed=observed, expected=forecast, band=band,
                severity=_severity(excess, threshold), source=source))
    return alerts


def detect_dropout(series: TimeSeries, gap_threshold: int,
                   zero_is_silence: bool = False,
                   source: str = "") -> list[AnomalyAlert]:
    """One Dropout alert per maximal silent run of length >= gap_threshold,
    timestamped at the run start. observed = run length."""
    if gap_threshold < 1:
        raise ValueError("gap_threshold must be >= 1")
    silent = series.missing.copy()
    if zero_is_silence:
        silent |= (~series.missing) & (series.values == 0)
    alerts: list[AnomalyAlert] = []
    n = len(series)
    i = 0
    while i < n:
        if not silent[i]:
            i += 1
            continue
        j = i
        while j < n and silent[j]:
            j += 1
        run = j - i
        if run >= gap_threshold:
            excess = run - gap_threshold
            alerts.append(AnomalyAlert(
                timestamp=series.timestamp_at(i),
                kind="Dropout", observed=float(run), expected=float(gap_threshold),
                band=None,
                severity=_severity(float(excess), float(gap_threshold)),
                source=source))
        i = j
    return alerts


def detect_identity_flood(per_interval_new_ids: TimeSeries, confidence: float,
                          train_fraction: float = 0.5, window: int = 1,
                          source: str = "") -> list[AnomalyAlert]:
    """Mean-shift surge logic applied to the count of never-before-seen
    source ids per interval; alerts carry kind=IdentityFlood."""
    z = z_score(confidence)
    n = len(per_interval_new_ids)
    n_train = max(1, math.ceil(train_fraction * n))
    values = np.where(per_interval_new_ids.missing, np.nan,
                      per_interval_new_ids.values)
    train = values[:n_train]
    train = train[~np.isnan(train)]
    if len(train) == 0:
        return []
    s = float(train.std(ddof=1)) if len(train) > 1 else 0.0
    band = ConfidenceBand(X=float(train.mean()), s=s, n=window, z=z)
    threshold = band.half_width
    alerts: list[AnomalyAlert] = []
    scored = values[n_train:]
    n_windows = len(scored) // window
    for w in range(n_windows):
        chunk = scored[w * window:(w + 1) * window]
        chunk = chunk[~np.isnan(chunk)]
        if len(chunk) == 0:
            continue
        mean = float(chunk.mean())
        excess = abs(mean - band.X) - threshold
        if excess > 0:
            alerts.append(AnomalyAlert(
                timestamp=per_interval_new_ids.timestamp_at(n_train + w * window),
                kind="IdentityFlood", observed=mean, expected=band.X, band=band,
                severity=_severity(excess, threshold), source=source))
    return alerts


def merge_alerts(*alert_lists: list[AnomalyAlert]) -> list[AnomalyAlert]:
    """Deterministic timestamp-ordered merge."""
    merged = [a for alerts in alert_lists for a in alerts]
    merged.sort(key=lambda a: (a.timestamp, KINDS.index(a.kind), a.source, a.observed))
    return merged
