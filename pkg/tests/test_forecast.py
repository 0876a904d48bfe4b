import numpy as np
import pytest

from gatewatch import forecast as fc
from gatewatch.errors import MissingValuesPresent, SeriesTooShort
from gatewatch.series import TimeSeries


def make(values, interval=3600.0):
    return TimeSeries.from_values(values, interval_seconds=interval)


def sine(cycles=10, period=24, amp=1.0, noise=0.0, seed=0):
    t = np.arange(cycles * period)
    y = amp * np.sin(2 * np.pi * t / period)
    if noise:
        y = y + np.random.default_rng(seed).normal(0, noise, len(t))
    return make(y)


CONSTANT_CONFIGS = [
    fc.ForecasterConfig(variant="moving_average", ma_window=3),
    fc.ForecasterConfig(variant="holt_winters", hw_period=4,
                        hw_alpha=0.5, hw_beta=0.2, hw_gamma=0.3),
    fc.ForecasterConfig(variant="linear_trend"),
    fc.ForecasterConfig(variant="lstm", lstm_num_timesteps=4, lstm_dropout=0.0),
]


@pytest.mark.parametrize("config", CONSTANT_CONFIGS,
                         ids=[c.variant for c in CONSTANT_CONFIGS])
def test_constant_series_is_a_fixed_point(config):
    model = fc.fit(config, make([7.0] * 20))
    assert np.allclose(model.result.fitted, 7.0)
    assert model.result.residual_std == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(model.forecast(5), 7.0)


def test_holt_winters_nails_exact_periodicity():
    series = sine(cycles=10, period=24)
    model = fc.fit(fc.ForecasterConfig(variant="holt_winters", hw_period=24), series)
    post_warmup_mse = float(np.mean(np.array(model.result.residuals) ** 2))
    assert post_warmup_mse < 1e-6 * series.values.var()


def test_holt_winters_seasonals_sum_to_zero_at_init():
    y = sine(cycles=4, period=12).values
    _, _, seasonals = fc._hw_initial_state(y, 12)
    assert abs(seasonals.sum()) < 1e-9


def test_moving_average_flat_forecast():
    model = fc.fit(fc.ForecasterConfig(variant="moving_average", ma_window=3),
                   make([1.0, 2.0, 4.0, 6.0]))
    assert model.forecast(2) == [4.0, 4.0]


def test_moving_average_persistence():
    model = fc.fit(fc.ForecasterConfig(variant="moving_average", ma_window=1),
                   make([1.0, 2.0, 9.0]))
    assert model.forecast(3) == [9.0, 9.0, 9.0]


def test_linear_trend_exact_on_line():
    t = np.arange(50)
    model = fc.fit(fc.ForecasterConfig(variant="linear_trend"), make(2.0 * t + 1.0))
    preds = np.array(model.forecast(5))
    truth = 2.0 * np.arange(50, 55) + 1.0
    assert np.max(np.abs(preds - truth)) < 1e-9


def test_lstm_parameter_count_matches_accounting():
    config = fc.ForecasterConfig(variant="lstm", lstm_num_timesteps=6,
                                 lstm_units=10)
    model = fc.fit(config, sine(cycles=2, period=12))
    assert model.lstm_params.count() == 491


def test_fit_rejects_missing_values():
    with pytest.raises(MissingValuesPresent):
        fc.fit(fc.ForecasterConfig(variant="moving_average"),
               make([1.0, None, 3.0]))


def test_length_requirements():
    with pytest.raises(SeriesTooShort):
        fc.fit(fc.ForecasterConfig(variant="holt_winters", hw_period=24),
               make(list(range(30))))
    with pytest.raises(SeriesTooShort):
        fc.fit(fc.ForecasterConfig(variant="lstm", lstm_num_timesteps=48),
               make(list(range(40))))


def test_fit_is_deterministic():
    series = sine(cycles=3, period=24, noise=0.1)
    config = fc.ForecasterConfig(variant="lstm", lstm_num_timesteps=8, rng_seed=5)
    m1 = fc.fit(config, series)
    m2 = fc.fit(config, series)
    assert np.array_equal(m1.lstm_params.W, m2.lstm_params.W)
    assert m1.forecast(4) == m2.forecast(4)


@pytest.mark.parametrize("config", CONSTANT_CONFIGS,
                         ids=[c.variant for c in CONSTANT_CONFIGS])
def test_serialization_round_trip_is_bit_identical(config):
    series = sine(cycles=3, period=8, noise=0.05)
    model = fc.fit(config, series)
    loaded = fc.FittedForecaster.from_json(model.to_json())
    assert loaded.forecast(6) == model.forecast(6)
    assert loaded.to_json() == model.to_json()


def test_one_step_on_continues_the_recurrence():
    series = sine(cycles=10, period=24)
    train_vals = series.values[:192]
    test_vals = series.values[192:]
    model = fc.fit(fc.ForecasterConfig(variant="holt_winters", hw_period=24),
                   make(train_vals))
    preds = model.one_step_on(test_vals)
    assert np.max(np.abs(preds - test_vals)) < 1e-9
