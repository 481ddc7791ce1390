"""
Cross-member statistics of a multimodel ensemble.

Percentiles use the nearest-rank definition, so with six members the 80th
percentile is exactly the second largest member.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from app.domain.errors import EmptyEnsembleError, InvalidInputError, RankError

STATISTICS = ("median", "min2", "p80", "max2")


def _as_values(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyEnsembleError("ensemble statistic over zero members")
    if not np.isfinite(arr).all():
        raise InvalidInputError("ensemble values must be finite", module="ensemble")
    return arr


def mme_median(values: Sequence[float]) -> float:
    return float(np.median(_as_values(values)))


def mme_kth_min(values: Sequence[float], k: int) -> float:
    """k-th smallest member (k = 1 is the minimum)."""
    arr = _as_values(values)
    if not 1 <= k <= arr.size:
        raise RankError(f"rank {k} outside 1..{arr.size}")
    return float(np.sort(arr)[k - 1])


def mme_kth_max(values: Sequence[float], k: int) -> float:
    """k-th largest member (k = 1 is the maximum)."""
    arr = _as_values(values)
    if not 1 <= k <= arr.size:
        raise RankError(f"rank {k} outside 1..{arr.size}")
    return float(np.sort(arr)[arr.size - k])


def nearest_rank(p: float, count: int) -> int:
    # round() guards against p*count/100 landing a hair above an integer
    return max(1, math.ceil(round(p * count / 100.0, 9)))


def mme_percentile(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * count)-th smallest member."""
    arr = _as_values(values)
    if not 0 < p <= 100:
        raise InvalidInputError(f"percentile must be in (0, 100], got {p}", module="ensemble")
    return float(np.sort(arr)[nearest_rank(p, arr.size) - 1])


def apply_statistic(values: Sequence[float], statistic: str) -> float:
    """Evaluate a statistic selector (median | min2 | p80 | max2)."""
    if statistic == "median":
        return mme_median(values)
    if statistic == "min2":
        return mme_kth_min(values, 2)
    if statistic == "p80":
        return mme_percentile(values, 80)
    if statistic == "max2":
        return mme_kth_max(values, 2)
    raise InvalidInputError(f"unknown ensemble statistic '{statistic}'", module="ensemble")


def member_statistic_series(members: np.ndarray, statistic: str) -> np.ndarray:
    """
    Statistic across members for every time step of stacked series
    (members x time).
    """
    stack = np.asarray(members, dtype=float)
    if stack.ndim != 2 or stack.shape[0] == 0:
        raise EmptyEnsembleError("member series must be a non-empty members x time array")
    count = stack.shape[0]
    if statistic == "median":
        return np.median(stack, axis=0)
    ordered = np.sort(stack, axis=0)
    if statistic == "min2":
        if count < 2:
            raise RankError(f"rank 2 outside 1..{count}")
        return ordered[1]
    if statistic == "p80":
        return ordered[nearest_rank(80, count) - 1]
    if statistic == "max2":
        if count < 2:
            raise RankError(f"rank 2 outside 1..{count}")
        return ordered[count - 2]
    raise InvalidInputError(f"unknown ensemble statistic '{statistic}'", module="ensemble")
