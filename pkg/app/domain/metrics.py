"""
Goodness-of-fit metrics for simulated versus observed series.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from app.domain.errors import ShapeError, ZeroVarianceError


def _pair(obs: Sequence[float], pred: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    o = np.asarray(obs, dtype=float).ravel()
    p = np.asarray(pred, dtype=float).ravel()
    if o.size != p.size:
        raise ShapeError(f"observed ({o.size}) and predicted ({p.size}) lengths differ")
    if o.size < 2:
        raise ShapeError("at least two paired values are required")
    return o, p


def nse(obs: Sequence[float], pred: Sequence[float]) -> float:
    """Nash-Sutcliffe efficiency 1 - sum((O-P)^2) / sum((O-mean(O))^2), in (-inf, 1]."""
    o, p = _pair(obs, pred)
    denominator = np.sum((o - o.mean()) ** 2)
    if denominator == 0:
        raise ZeroVarianceError("NSE undefined for constant observations")
    return float(1.0 - np.sum((o - p) ** 2) / denominator)


def pearson_r(obs: Sequence[float], pred: Sequence[float]) -> float:
    """Sample Pearson correlation, clipped to [-1, 1]."""
    o, p = _pair(obs, pred)
    do = o - o.mean()
    dp = p - p.mean()
    so = np.sqrt(np.sum(do ** 2))
    sp = np.sqrt(np.sum(dp ** 2))
    if so == 0 or sp == 0:
        raise ZeroVarianceError("correlation undefined for a constant series")
    return float(np.clip(np.sum(do * dp) / (so * sp), -1.0, 1.0))


def mean_bias(obs: Sequence[float], pred: Sequence[float]) -> float:
    """Mean of (predicted - observed)."""
    o, p = _pair(obs, pred)
    return float(np.mean(p - o))
