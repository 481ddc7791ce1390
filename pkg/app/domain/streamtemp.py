"""
Stream temperature: gap imputation, autocorrelation, standardization, the
lagged regression design, calibration/validation of the per-gauge LS-SVM
model, bias correction and projected window maxima.

Monthly series are ``pandas.Series`` indexed by month ordinal
(:func:`app.domain.models.month_index`).
"""

from __future__ import annotations

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy import sparse
from scipy.sparse.linalg import spsolve

from app.domain.errors import AlignmentError, CoverageError, InsufficientDataError, ZeroVarianceError
from app.domain.lssvm import lssvm_fit, lssvm_predict, tune_hyperparams
from app.domain.metrics import mean_bias, nse, pearson_r
from app.domain.models import (
    ClimatologyWindow,
    GaugeSeries,
    GaugeValidation,
    LssvmModel,
    PredictorSpec,
    index_year,
)

logger = logging.getLogger(__name__)

ACF_Z = 1.959964  # two-sided 5% normal quantile

PREDICTOR_SETS: Dict[str, PredictorSpec] = {
    "model1": PredictorSpec.of(
        "t_air(t)", "t_air(t-1)", "t_air(t-2)", "rldscs(t)", "rldscs(t-1)", "rsdscs(t)", "rsdscs(t-1)"
    ),
    "model2": PredictorSpec.of("t_air(t)", "rldscs(t)", "rsdscs(t)"),
    "model3": PredictorSpec.of("t_air(t)", "t_air(t-1)", "rldscs(t)"),
    "model4": PredictorSpec.of("t_air(t)", "t_air(t-1)", "t_air(t-2)"),
}


# ---------------------------------------------------------------------------
# Gap filling and diagnostics
# ---------------------------------------------------------------------------


def impute(series: Sequence[Optional[float]]) -> np.ndarray:
    """
    Fill gaps so that second differences vanish wherever a value is unknown
    (1-D discrete Laplacian, knowns fixed). Inside gaps this is linear
    interpolation; before the first and after the last known value it is
    linear extension.

    Raises:
        InsufficientDataError: with fewer than two known values.
    """
    x = np.array([np.nan if v is None else v for v in series], dtype=float)
    known = np.isfinite(x)
    if known.sum() < 2:
        raise InsufficientDataError(f"imputation needs at least 2 known values, got {int(known.sum())}")
    if known.all():
        return x

    n = x.size
    unknown = np.flatnonzero(~known)
    # Second-difference operator: row i is x[i] - 2 x[i+1] + x[i+2]
    d = sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(n - 2, n), format="csc")
    d_unknown = d[:, unknown]
    d_known = d[:, np.flatnonzero(known)]
    lhs = (d_unknown.T @ d_unknown).tocsc()
    rhs = -(d_unknown.T @ (d_known @ x[known]))
    filled = x.copy()
    filled[unknown] = np.atleast_1d(spsolve(lhs, rhs))
    return filled


def acf_band(n: int) -> float:
    """Half-width of the 5% significance band for sample autocorrelations."""
    return ACF_Z / np.sqrt(n)


def acf(series: Sequence[float], max_lag: int) -> Tuple[np.ndarray, float]:
    """
    Sample autocorrelations r(0..max_lag) with the mean-centred, biased
    (divide by n) estimator, plus the +/- band half-width.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= max_lag + 1:
        raise InsufficientDataError(f"series of length {n} too short for {max_lag} lags")
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0:
        raise ZeroVarianceError("autocorrelation undefined for a constant series")
    r = np.array([1.0] + [float(np.dot(d[:-k], d[k:])) / denom for k in range(1, max_lag + 1)])
    return r, acf_band(n)


class Standardizer(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    scale: float

    def transform(self, values: Sequence[float]) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.scale

    def inverse(self, z: Sequence[float]) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.scale + self.mean


def standardize(series: Sequence[float]) -> Tuple[np.ndarray, Standardizer]:
    """z-scores of a series together with the mean/scale used."""
    x = np.asarray(series, dtype=float)
    scale = float(x.std())
    if scale == 0:
        raise ZeroVarianceError("cannot standardize a constant series")
    fitted = Standardizer(mean=float(x.mean()), scale=scale)
    return fitted.transform(x), fitted


def observed_span(gauge: GaugeSeries) -> Tuple[List[int], List[Optional[float]]]:
    """Months from the first to the last observation, with None in the gaps."""
    observed = gauge.observed
    if not observed:
        raise InsufficientDataError(f"gauge {gauge.gauge_id} has no observations")
    first, last = observed[0][0], observed[-1][0]
    lookup = dict(observed)
    months = list(range(first, last + 1))
    return months, [lookup.get(m) for m in months]


def gauge_series(gauge: GaugeSeries) -> pd.Series:
    """Observed temperatures as a month-indexed series (gaps omitted)."""
    observed = gauge.observed
    return pd.Series([t for _, t in observed], index=[m for m, _ in observed], dtype=float)


# ---------------------------------------------------------------------------
# Regression design
# ---------------------------------------------------------------------------


class DesignMatrix(BaseModel):
    """Predictor rows aligned to target months."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    names: List[str]
    months: np.ndarray
    x: np.ndarray
    y: Optional[np.ndarray] = None
    dropped: int = 0

    def subset(self, mask: np.ndarray) -> "DesignMatrix":
        return DesignMatrix(
            names=self.names,
            months=self.months[mask],
            x=self.x[mask],
            y=None if self.y is None else self.y[mask],
            dropped=self.dropped,
        )


def build_design(
    drivers: Mapping[str, pd.Series],
    spec: PredictorSpec,
    target: Optional[pd.Series] = None,
    months: Optional[Sequence[int]] = None,
) -> DesignMatrix:
    """
    Align lagged predictors to target months: the row for month m holds each
    term's variable at m - lead - lag. Rows with a missing predictor (or
    missing target) are dropped and counted.

    Raises:
        AlignmentError: if a driver is missing or no row survives alignment.
    """
    if months is None:
        if target is None:
            raise AlignmentError("either target or months is required", module="streamtemp")
        months = target.index
    months = np.asarray(sorted(int(m) for m in months), dtype=int)

    columns = []
    for term in spec.terms:
        series = drivers.get(term.variable)
        if series is None:
            raise AlignmentError(f"driver '{term.variable}' not available for {term.name}", module="streamtemp")
        columns.append(series.reindex(months - spec.lead - term.lag).to_numpy(dtype=float))
    x = np.column_stack(columns)
    keep = np.isfinite(x).all(axis=1)
    y = None
    if target is not None:
        y = target.reindex(months).to_numpy(dtype=float)
        keep &= np.isfinite(y)

    if not keep.any():
        raise AlignmentError("no rows left after aligning predictors to the target", module="streamtemp")
    dropped = int((~keep).sum())
    if dropped:
        logger.debug(f"Dropped {dropped} rows with missing predictors or targets")
    return DesignMatrix(
        names=spec.names,
        months=months[keep],
        x=x[keep],
        y=None if y is None else y[keep],
        dropped=dropped,
    )


def validation_split(
    design: DesignMatrix,
    train_years: Tuple[int, int] = (1998, 2007),
    test_years: Tuple[int, int] = (2008, 2012),
) -> Tuple[DesignMatrix, DesignMatrix]:
    """Partition rows by calendar year into training and validation periods."""
    years = np.array([index_year(m) for m in design.months])
    train = (years >= train_years[0]) & (years <= train_years[1])
    test = (years >= test_years[0]) & (years <= test_years[1])
    if not train.any() or not test.any():
        raise CoverageError(
            f"empty partition: {int(train.sum())} training rows {train_years}, "
            f"{int(test.sum())} validation rows {test_years}",
            module="streamtemp",
        )
    return design.subset(train), design.subset(test)


def bias_correct(projection: Sequence[float], bias: float) -> np.ndarray:
    """Remove the validation bias (mean predicted - observed) from a projection."""
    return np.asarray(projection, dtype=float) - bias


def max_monthly(series: pd.Series, window: ClimatologyWindow) -> float:
    """Maximum of the 60 monthly values of a window."""
    values = series.reindex(window.months).to_numpy(dtype=float)
    missing = int((~np.isfinite(values)).sum())
    if missing:
        raise CoverageError(f"window {window.label} is missing {missing} of 60 months", module="streamtemp")
    return float(values.max())


# ---------------------------------------------------------------------------
# Per-gauge calibration and projection
# ---------------------------------------------------------------------------


class GaugeModel(BaseModel):
    """Calibrated regression of one gauge."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    gauge_id: str
    spec: PredictorSpec
    model: LssvmModel
    validation: GaugeValidation


def fit_gauge_model(
    gauge: GaugeSeries,
    drivers: Mapping[str, pd.Series],
    spec: PredictorSpec = PREDICTOR_SETS["model4"],
    train_years: Tuple[int, int] = (1998, 2007),
    test_years: Tuple[int, int] = (2008, 2012),
) -> GaugeModel:
    """
    Train on ``train_years``, tune by cross-validation inside the training
    period, and score on ``test_years``. Scaling statistics come from the
    training rows only.
    """
    design = build_design(drivers, spec, target=gauge_series(gauge))
    train, test = validation_split(design, train_years, test_years)
    sigma, gamma = tune_hyperparams(train.x, train.y)
    model = lssvm_fit(train.x, train.y, sigma, gamma)

    pred_train = lssvm_predict(model, train.x)
    pred_test = lssvm_predict(model, test.x)
    validation = GaugeValidation(
        gauge_id=gauge.gauge_id,
        predictors=spec.names,
        sigma=sigma,
        gamma=gamma,
        nse_train=nse(train.y, pred_train),
        r_train=pearson_r(train.y, pred_train),
        nse_test=nse(test.y, pred_test),
        r_test=pearson_r(test.y, pred_test),
        bias_c=mean_bias(test.y, pred_test),
    )
    logger.debug(
        f"Gauge {gauge.gauge_id}: NSE train {validation.nse_train:.3f}, test {validation.nse_test:.3f}, "
        f"bias {validation.bias_c:+.2f} degC"
    )
    return GaugeModel(gauge_id=gauge.gauge_id, spec=spec, model=model, validation=validation)


def project_series(fitted: GaugeModel, drivers: Mapping[str, pd.Series], months: Sequence[int]) -> pd.Series:
    """Bias-corrected projected monthly stream temperature for the given months."""
    design = build_design(drivers, fitted.spec, months=months)
    raw = lssvm_predict(fitted.model, design.x)
    corrected = bias_correct(raw, fitted.validation.bias_c)
    return pd.Series(corrected, index=design.months)


def project_gauge(
    fitted: GaugeModel, drivers: Mapping[str, pd.Series], window: ClimatologyWindow
) -> Tuple[pd.Series, float]:
    """Bias-corrected monthly projection over a window and its maximum."""
    series = project_series(fitted, drivers, window.months)
    return series, max_monthly(series, window)


def compare_predictor_sets(
    gauge: GaugeSeries,
    drivers: Mapping[str, pd.Series],
    sets: Mapping[str, PredictorSpec] = PREDICTOR_SETS,
    train_years: Tuple[int, int] = (1998, 2007),
    test_years: Tuple[int, int] = (2008, 2012),
) -> List[Tuple[str, GaugeValidation]]:
    """Training/validation skill of each predictor set whose drivers are available."""
    results = []
    for label, spec in sets.items():
        if any(v not in drivers for v in spec.variables):
            logger.debug(f"Skipping {label} for gauge {gauge.gauge_id}: drivers {spec.variables} unavailable")
            continue
        fitted = fit_gauge_model(gauge, drivers, spec, train_years, test_years)
        results.append((label, fitted.validation))
    return results
