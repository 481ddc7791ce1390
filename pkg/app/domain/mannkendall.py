r"""
Mann-Kendall trend test with tie and autocorrelation corrections.

S is the sum of sign(x_j - x_i) over all pairs i < j. Its variance under
the no-trend hypothesis is

    Var(S) = [n(n-1)(2n+5) - sum_k t_k(t_k-1)(2t_k+5)] / 18

with t_k the size of the k-th tie group. Serial correlation is handled with
the effective sample size correction of Hamed and Rao (1998): the series is
detrended with the median pairwise slope, ranked, and the ranked
autocorrelations that fall outside the 5% significance band (lags up to n/4)
inflate the variance by

    n/n* = 1 + 2 / (n(n-1)(n-2)) * sum_k (n-k)(n-k-1)(n-k-2) rho_k

The factor is never allowed below 1, so the correction only ever makes the
test more conservative. Z uses the usual +/-1 continuity correction and the
p-value is two-sided.
"""

from __future__ import annotations

import logging
from typing import Iterable, List, Sequence

import numpy as np
from scipy import stats

from app.domain.errors import InsufficientDataError
from app.domain.models import GaugeSeries, GaugeTrend, TrendResult, index_year
from app.domain.streamtemp import acf, acf_band, impute, observed_span

logger = logging.getLogger(__name__)


def mk_score(x: np.ndarray) -> int:
    """S = sum over i < j of sign(x_j - x_i)."""
    diff = np.sign(x[None, :] - x[:, None])
    return int(np.triu(diff, k=1).sum())


def tie_variance(x: np.ndarray) -> float:
    n = x.size
    _, counts = np.unique(x, return_counts=True)
    ties = counts[counts > 1].astype(float)
    return (n * (n - 1) * (2 * n + 5) - np.sum(ties * (ties - 1) * (2 * ties + 5))) / 18.0


def median_slope_residuals(x: np.ndarray) -> np.ndarray:
    """Residuals after removing the median pairwise slope (used only for detrending)."""
    n = x.size
    t = np.arange(n, dtype=float)
    i, j = np.triu_indices(n, k=1)
    slope = np.median((x[j] - x[i]) / (t[j] - t[i]))
    detrended = x - slope * t
    return detrended - np.median(detrended)


def hamed_rao_factor(x: np.ndarray) -> float:
    """Variance inflation n/n* from significant ranked autocorrelations (>= 1)."""
    n = x.size
    resid = median_slope_residuals(x)
    if np.ptp(resid) <= 1e-9 * max(1.0, float(np.ptp(x))):
        return 1.0
    ranks = stats.rankdata(resid)
    max_lag = n // 4
    if max_lag < 1 or n <= max_lag + 1:
        return 1.0
    rho, _ = acf(ranks, max_lag)
    band = acf_band(n)
    k = np.arange(1, max_lag + 1)
    r = rho[1:]
    significant = np.abs(r) > band
    if not significant.any():
        return 1.0
    weights = (n - k) * (n - k - 1) * (n - k - 2)
    factor = 1.0 + 2.0 / (n * (n - 1) * (n - 2)) * float(np.sum(weights[significant] * r[significant]))
    return max(factor, 1.0)


def _z_score(s: int, variance: float) -> float:
    if variance <= 0 or s == 0:
        return 0.0
    if s > 0:
        return (s - 1) / np.sqrt(variance)
    return (s + 1) / np.sqrt(variance)


def mk_trend(series: Sequence[float], alpha: float = 0.10, correct_autocorrelation: bool = True) -> TrendResult:
    """
    Two-sided Mann-Kendall test on a complete series (run :func:`impute` first).

    A constant series is not an error: S = 0, no direction, not significant.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        raise InsufficientDataError(f"trend test needs at least 3 values, got {x.size}")
    if not np.isfinite(x).all():
        raise InsufficientDataError("trend test needs a gap-free series; impute first")

    s = mk_score(x)
    var_s = tie_variance(x)
    factor = hamed_rao_factor(x) if (correct_autocorrelation and var_s > 0) else 1.0
    var_corrected = var_s * factor

    z = _z_score(s, var_corrected)
    z_plain = _z_score(s, var_s)
    p = float(2.0 * stats.norm.sf(abs(z)))
    p_plain = float(2.0 * stats.norm.sf(abs(z_plain)))
    direction = "up" if s > 0 else "down" if s < 0 else "none"

    return TrendResult(
        n=int(x.size),
        s=s,
        var_s=float(var_s),
        var_s_corrected=float(var_corrected),
        correction_factor=float(factor),
        z=float(z),
        p=p,
        p_uncorrected=p_plain,
        alpha=alpha,
        direction=direction,
        significant=p < alpha,
    )


def gauge_trend(gauge: GaugeSeries, alpha: float = 0.10, min_record_years: int = 7) -> GaugeTrend:
    """
    Trend of one gauge over its observed span, gaps imputed first.

    Raises:
        InsufficientDataError: when the record covers fewer than ``min_record_years`` years.
    """
    if gauge.record_years < min_record_years:
        raise InsufficientDataError(
            f"gauge {gauge.gauge_id} has {gauge.record_years} years of record, {min_record_years} required"
        )
    months, values = observed_span(gauge)
    filled = impute(values)
    result = mk_trend(filled, alpha=alpha)
    start, end = index_year(months[0]), index_year(months[-1])
    return GaugeTrend(
        gauge_id=gauge.gauge_id,
        state=gauge.state,
        fips=gauge.fips,
        huc=gauge.huc,
        start_year=start,
        end_year=end,
        n_years=end - start + 1,
        trend=result,
    )


def historical_trends(
    gauges: Iterable[GaugeSeries], alpha: float = 0.10, min_record_years: int = 7
) -> List[GaugeTrend]:
    """Trend of every gauge with a long enough record, ordered by gauge id."""
    results: List[GaugeTrend] = []
    skipped = 0
    for gauge in sorted(gauges, key=lambda g: g.gauge_id):
        try:
            results.append(gauge_trend(gauge, alpha=alpha, min_record_years=min_record_years))
        except InsufficientDataError as e:
            skipped += 1
            logger.warning(f"Skipping trend for gauge {gauge.gauge_id}: {e}")
    logger.info(f"Tested {len(results)} gauges for trend ({skipped} skipped)")
    return results
