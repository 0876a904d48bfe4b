"""Forecaster families behind one contract: fit on a training series, then
produce one-step and multi-horizon forecasts.

Variants: moving average, additive Holt-Winters, linear trend (optional
seasonal dummies), and the numpy LSTM. Fits are deterministic functions of
(config, series, seed).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from . import lstm
from .errors import MissingValuesPresent, SeriesTooShort
from .series import Scaler, TimeSeries, fit_scaler, sliding_windows

VARIANTS = ("moving_average", "holt_winters", "linear_trend", "lstm")

HW_GRID = [round(0.1 * k, 1) for k in range(1, 10)]


@dataclass
class ForecasterConfig:
    variant: str = "holt_winters"
    ma_window: int = 3
    hw_alpha: float | None = None
    hw_beta: float | None = None
    hw_gamma: float | None = None
    hw_period: int = 24
    lt_seasonal_dummies: bool = False
    lstm_units: int = 10
    lstm_dropout: float = 0.2
    lstm_learning_rate: float = 0.01
    lstm_batch_size: int = 128
    lstm_epochs: int = 1
    lstm_num_timesteps: int = 1008
    lstm_num_chunks: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    def label(self) -> str:
        if self.variant == "moving_average":
            return f"moving_average(w={self.ma_window})"
        if self.variant == "holt_winters":
            return f"holt_winters(m={self.hw_period})"
        if self.variant == "linear_trend":
            return "linear_trend+dummies" if self.lt_seasonal_dummies else "linear_trend"
        return "lstm"


@dataclass
class ForecastResult:
    fitted: list[float]       # one-step-ahead predictions for series[warmup:]
    warmup: int
    forecasts: list[float]
    residuals: list[float]
    residual_std: float       # population std of residuals

    def to_json_obj(self) -> dict:
        return {
            "fitted": self.fitted,
            "warmup": self.warmup,
            "forecasts": self.forecasts,
            "residuals": self.residuals,
            "residual_std": self.residual_std,
        }


def _hw_initial_state(y: np.ndarray, m: int):
    level = float(y[:m].mean())
    trend = float(np.mean((y[m:2 * m] - y[:m]) / m))
    seasonals = y[:m] - y[:m].mean()  # additive seasonals sum to 0
    return level, trend, seasonals


def _hw_run(y: np.ndarray, alpha, beta, gamma, m: int):
    """Additive Holt-Winters recurrences; alpha/beta/gamma may be arrays of
    equal shape K to evaluate a whole parameter grid in one pass.

    Returns (one-step preds for t >= m, final level, final trend, seasonal array).
    """
    alpha = np.asarray(alpha, dtype=float)
    scalar = alpha.ndim == 0
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    level0, trend0, seas0 = _hw_initial_state(y, m)
    if scalar:
        level = np.array([level0])
        trend = np.array([trend0])
        S = seas0[None, :].copy()
        alpha, beta, gamma = alpha[None], beta[None], gamma[None]
    else:
        K = len(alpha)
        level = np.full(K, level0)
        trend = np.full(K, trend0)
        S = np.tile(seas0, (K, 1))
    n = len(y)
    preds = np.empty((len(level), n - m))
    for t in range(m, n):
        phase = t % m
        yhat = level + trend + S[:, phase]
        preds[:, t - m] = yhat
        prev_level = level
        level = alpha * (y[t] - S[:, phase]) + (1.0 - alpha) * (level + trend)
        trend = beta * (level - prev_level) + (1.0 - beta) * trend
        S[:, phase] = gamma * (y[t] - level) + (1.0 - gamma) * S[:, phase]
    if scalar:
        return preds[0], float(level[0]), float(trend[0]), S[0]
    return preds, level, trend, S


def _hw_select_constants(y: np.ndarray, m: int) -> tuple[float, float, float]:
    """Grid search over {0.1..0.9}^3 minimizing one-step training MSE."""
    combos = list(product(HW_GRID, HW_GRID, HW_GRID))
    a = np.array([c[0] for c in combos])
    b = np.array([c[1] for c in combos])
    g = np.array([c[2] for c in combos])
    preds, _, _, _ = _hw_run(y, a, b, g, m)
    mses = np.mean((preds - y[m:]) ** 2, axis=1)
    best = int(np.argmin(mses))  # argmin is first-hit, so ties are stable
    return combos[best]


def _lt_design(t: np.ndarray, m: int, dummies: bool) -> np.ndarray:
    cols = [np.ones_like(t, dtype=float), t.astype(float)]
    if dummies:
        for j in range(1, m):
            cols.append((t % m == j).astype(float))
    return np.stack(cols, axis=1)


@dataclass
class FittedForecaster:
    config: ForecasterConfig
    train_values: np.ndarray
    result: ForecastResult
    # variant state
    hw_constants: tuple[float, float, float] | None = None
    hw_state: tuple[float, float, np.ndarray] | None = None  # level, trend, seasonals
    lt_coefs: np.ndarray | None = None
    lstm_params: lstm.LstmParams | None = None
    scaler: Scaler | None = None
    train_trace: lstm.TrainTrace | None = None

    @property
    def variant(self) -> str:
        return self.config.variant

    @property
    def residual_std(self) -> float:
        return self.result.residual_std

    # -- forecasting --------------------------------------------------------

    def forecast(self, horizon: int) -> list[float]:
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        v = self.config.variant
        y = self.train_values
        n = len(y)
        if v == "moving_average":
            w = self.config.ma_window
            return [float(y[-w:].mean())] * horizon
        if v == "holt_winters":
            level, trend, S = self.hw_state
            m = self.config.hw_period
            return [float(level + h * trend + S[(n - 1 + h) % m])
                    for h in range(1, horizon + 1)]
        if v == "linear_trend":
            t = np.arange(n, n + horizon)
            X = _lt_design(t, self.config.hw_period, self.config.lt_seasonal_dummies)
            return (X @ self.lt_coefs).tolist()
        # lstm: roll forward recursively on its own predictions
        T = self.config.lstm_num_timesteps
        window = list(self.scaler.apply(y[-T:]))
        out = []
        for _ in range(horizon):
            pred = float(lstm.predict(self.lstm_params, np.array([window]))[0])
            out.append(float(self.scaler.invert(np.array([pred]))[0]))
            window = window[1:] + [pred]
        return out

    def one_step_on(self, new_values: np.ndarray) -> np.ndarray:
        """Teacher-forced one-step-ahead predictions for points following the
        training range: prediction i uses training data plus new_values[:i]."""
        new_values = np.asarray(new_values, dtype=float)
        v = self.config.variant
        y = self.train_values
        n = len(y)
        k = len(new_values)
        if v == "moving_average":
            w = self.config.ma_window
            hist = np.concatenate([y[-w:], new_values])
            return np.array([hist[i:i + w].mean() for i in range(k)])
        if v == "holt_winters":
            m = self.config.hw_period
            alpha, beta, gamma = self.hw_constants
            level, trend, S = self.hw_state
            S = S.copy()
            preds = np.empty(k)
            for i in range(k):
                t = n + i
                phase = t % m
                preds[i] = level + trend + S[phase]
                prev_level = level
                level = alpha * (new_values[i] - S[phase]) + (1 - alpha) * (level + trend)
                trend = beta * (level - prev_level) + (1 - beta) * trend
                S[phase] = gamma * (new_values[i] - level) + (1 - gamma) * S[phase]
            return preds
        if v == "linear_trend":
            t = np.arange(n, n + k)
            X = _lt_design(t, self.config.hw_period, self.config.lt_seasonal_dummies)
            return X @ self.lt_coefs
        T = self.config.lstm_num_timesteps
        hist = self.scaler.apply(np.concatenate([y[-T:], new_values]))
        idx = np.arange(T)[None, :] + np.arange(k)[:, None]
        preds = lstm.predict(self.lstm_params, hist[idx])
        return self.scaler.invert(preds)

    # -- serialization -------------------------------------------------------

    def to_json_obj(self) -> dict:
        params: dict = {"train_values": self.train_values.tolist()}
        if self.hw_constants is not None:
            level, trend, S = self.hw_state
            params.update(hw_constants=list(self.hw_constants),
                          hw_level=level, hw_trend=trend, hw_seasonals=S.tolist())
        if self.lt_coefs is not None:
            params["lt_coefs"] = self.lt_coefs.tolist()
        if self.lstm_params is not None:
            params["lstm"] = self.lstm_params.to_json_obj()
        return {
            "variant": self.config.variant,
            "config": asdict(self.config),
            "parameters": params,
            "scaler": None if self.scaler is None
            else {"min": self.scaler.min, "max": self.scaler.max},
            "result": self.result.to_json_obj(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FittedForecaster":
        config = ForecasterConfig(**obj["config"])
        params = obj["parameters"]
        res = obj["result"]
        result = ForecastResult(fitted=res["fitted"], warmup=res["warmup"],
                                forecasts=res["forecasts"], residuals=res["residuals"],
                                residual_std=res["residual_std"])
        model = cls(config=config,
                    train_values=np.array(params["train_values"], dtype=float),
                    result=result)
        if "hw_constants" in params:
            model.hw_constants = tuple(params["hw_constants"])
            model.hw_state = (params["hw_level"], params["hw_trend"],
                              np.array(params["hw_seasonals"]))
        if "lt_coefs" in params:
            model.lt_coefs = np.array(params["lt_coefs"])
        if "lstm" in params:
            model.lstm_params = lstm.LstmParams.from_json_obj(params["lstm"])
        if obj["scaler"] is not None:
            model.scaler = Scaler(min=obj["scaler"]["min"], max=obj["scaler"]["max"])
        return model

    @classmethod
    def from_json(cls, text: str) -> "FittedForecaster":
        return cls.from_json_obj(json.loads(text))


def _result_from_fitted(values: np.ndarray, fitted: np.ndarray, warmup: int) -> ForecastResult:
    residuals = values[warmup:] - fitted
    std = float(np.sqrt(np.mean(residuals ** 2) - np.mean(residuals) ** 2)) \
        if len(residuals) else 0.0
    return ForecastResult(fitted=fitted.tolist(), warmup=warmup, forecasts=[],
                          residuals=residuals.tolist(), residual_std=max(std, 0.0))


def fit(config: ForecasterConfig, train: TimeSeries) -> FittedForecaster:
    """Fit one forecaster variant; deterministic given (config, train)."""
    if train.has_missing():
        raise MissingValuesPresent("training series must not contain missing values")
    y = train.values
    n = len(y)
    v = config.variant

    if v == "moving_average":
        w = config.ma_window
        if w < 1:
            raise ValueError("ma_window must be >= 1")
        if n < w + 1:
            raise SeriesTooShort(f"length {n} too short for window {w}")
        csum = np.concatenate([[0.0], np.cumsum(y)])
        fitted = (csum[w:n] - csum[:n - w]) / w
        model = FittedForecaster(config=config, train_values=y,
                                 result=_result_from_fitted(y, fitted, w))
        return model

    if v == "holt_winters":
        m = config.hw_period
        if m < 2:
            raise ValueError("hw_period must be >= 2")
        if n < 2 * m:
            raise SeriesTooShort(f"length {n} < 2 x period {m}")
        given = (config.hw_alpha, config.hw_beta, config.hw_gamma)
        if all(c is not None for c in given):
            alpha, beta, gamma = given
        else:
            alpha, beta, gamma = _hw_select_constants(y, m)
        preds, level, trend, S = _hw_run(y, alpha, beta, gamma, m)
        model = FittedForecaster(config=config, train_values=y,
                                 result=_result_from_fitted(y, preds, m),
                                 hw_constants=(alpha, beta, gamma),
                                 hw_state=(level, trend, S))
        return model

    if v == "linear_trend":
        if n < 2:
            raise SeriesTooShort("linear trend needs at least 2 points")
        t = np.arange(n)
        X = _lt_design(t, config.hw_period, config.lt_seasonal_dummies)
        coefs, *_ = np.linalg.lstsq(X, y, rcond=None)
        fitted = X @ coefs
        model = FittedForecaster(config=config, train_values=y,
                                 result=_result_from_fitted(y, fitted, 0),
                                 lt_coefs=coefs)
        return model

    # lstm
    T = config.lstm_num_timesteps
    if n <= T:
        raise SeriesTooShort(f"length {n} <= num_timesteps {T}")
    scaler = fit_scaler(train)
    scaled = TimeSeries(start=train.start, interval_seconds=train.interval_seconds,
                        values=scaler.apply(y), missing=train.missing)
    X, targets = sliding_windows(scaled, T)
    params, trace = lstm.train_chunked(
        X, targets, config.lstm_units,
        num_chunks=config.lstm_num_chunks, batch_size=config.lstm_batch_size,
        epochs=config.lstm_epochs, learning_rate=config.lstm_learning_rate,
        dropout=config.lstm_dropout, seed=config.rng_seed)
    fitted = scaler.invert(lstm.predict(params, X))
    model = FittedForecaster(config=config, train_values=y,
                             result=_result_from_fitted(y, fitted, T),
                             lstm_params=params, scaler=scaler, train_trace=trace)
    return model
