import numpy as np
import pytest

from app.domain.errors import InsufficientDataError
from app.domain.mannkendall import gauge_trend, historical_trends, mk_score, mk_trend, tie_variance
from app.domain.models import month_index
from tests.conftest import make_gauge


def test_strictly_increasing_series():
    result = mk_trend(np.arange(1.0, 11.0))
    assert result.s == 45
    assert result.var_s == pytest.approx(125.0)
    assert result.correction_factor == 1.0
    assert result.z == pytest.approx(44 / np.sqrt(125), rel=1e-9)
    assert result.z == pytest.approx(3.936, abs=1e-3)
    assert result.p < 1e-3
    assert result.direction == "up"
    assert result.significant


def test_decreasing_series_points_down():
    result = mk_trend(np.arange(10.0, 0.0, -1.0))
    assert result.s == -45
    assert result.direction == "down"
    assert result.z < 0


def test_constant_series_has_no_trend():
    result = mk_trend([4.0] * 12)
    assert result.s == 0
    assert result.z == 0.0
    assert result.direction == "none"
    assert not result.significant


def test_tie_correction():
    x = np.array([1.0, 1.0, 2.0, 2.0, 3.0])
    assert tie_variance(x) == pytest.approx((300 - 36) / 18)
    assert mk_score(x) == 8


def test_too_short_series():
    with pytest.raises(InsufficientDataError):
        mk_trend([1.0, 2.0])


def test_white_noise_rejection_rate_matches_alpha():
    rng = np.random.default_rng(2024)
    reps = 2000
    plain = sum(
        mk_trend(rng.normal(size=120), alpha=0.10, correct_autocorrelation=False).significant for _ in range(reps)
    )
    assert 0.07 <= plain / reps <= 0.13


def test_corrected_test_keeps_false_positives_near_alpha():
    rng = np.random.default_rng(2025)
    reps = 2000
    rejected = sum(mk_trend(rng.normal(size=120)).significant for _ in range(reps))
    assert rejected / reps <= 0.12


def test_autocorrelation_correction_is_conservative():
    rng = np.random.default_rng(11)
    n, phi = 120, 0.6
    corrected = uncorrected = 0
    for _ in range(300):
        e = rng.normal(size=n)
        x = np.empty(n)
        x[0] = e[0]
        for t in range(1, n):
            x[t] = phi * x[t - 1] + e[t]
        result = mk_trend(x)
        assert result.correction_factor >= 1.0
        assert result.p >= result.p_uncorrected
        corrected += result.significant
        uncorrected += result.p_uncorrected < result.alpha
    assert corrected < uncorrected


def test_gauge_trend_over_observed_span():
    times = [month_index(y, m) for y in range(2000, 2010) for m in range(1, 13)]
    noise = np.random.default_rng(4).normal(scale=0.2, size=len(times))
    temps = [float(10.0 + 0.05 * i + noise[i]) for i in range(len(times))]
    temps[5] = None
    gauge = make_gauge(times=times, temps=temps)
    trend = gauge_trend(gauge)
    assert (trend.start_year, trend.end_year, trend.n_years) == (2000, 2009, 10)
    assert trend.trend.direction == "up"
    assert trend.trend.significant


def test_short_records_are_skipped():
    times = [month_index(2005, m) for m in range(1, 13)]
    short = make_gauge(gauge_id="G2", times=times, temps=[12.0 + m for m in range(12)])
    with pytest.raises(InsufficientDataError):
        gauge_trend(short)
    assert historical_trends([short]) == []
