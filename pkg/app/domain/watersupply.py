"""
Freshwater supply (P - E), five-year climatologies, volume conversion,
municipal demand and the WAACI water budget.
"""

from __future__ import annotations

import logging
from typing import Iterable, Mapping, Sequence, Tuple

import numpy as np

from app.domain.errors import AlignmentError, CoverageError, InvalidInputError
from app.domain.models import ClimatologyWindow, GriddedField, WaaciRecord

logger = logging.getLogger(__name__)

# 1 mm over 1 km2 = 1000 m3 = 0.264172 million US gallons
MGAL_PER_MM_KM2 = 0.264172
GAL_PER_M3 = 264.172
DEFAULT_PER_CAPITA_M3 = 1700.0
SIGNIFICANT_DRY_MGAL_YR = -3_000_000.0


def freshwater(precipitation: GriddedField, evapotranspiration: GriddedField) -> GriddedField:
    """Elementwise P - E on identical grids, time axes and provenance."""
    if precipitation.variable != "precipitation" or evapotranspiration.variable != "evapotranspiration":
        raise AlignmentError(
            f"freshwater needs precipitation and evapotranspiration, got "
            f"{precipitation.variable} and {evapotranspiration.variable}",
            module="watersupply",
        )
    if precipitation.spec != evapotranspiration.spec:
        raise AlignmentError("P and E are on different grids", module="watersupply")
    if precipitation.times != evapotranspiration.times:
        raise AlignmentError("P and E have different time axes", module="watersupply")
    if precipitation.provenance != evapotranspiration.provenance:
        raise AlignmentError(
            f"P ({precipitation.provenance.tag}) and E ({evapotranspiration.provenance.tag}) "
            f"come from different members",
            module="watersupply",
        )
    return GriddedField(
        spec=precipitation.spec,
        variable="freshwater",
        units="mm/month",
        times=precipitation.times,
        values=precipitation.values - evapotranspiration.values,
        provenance=precipitation.provenance,
    )


def climatology(times: Sequence[int], values: Sequence[float], window: ClimatologyWindow) -> float:
    """
    Mean annual depth (mm/year) over a window: the sum of its 60 monthly
    values divided by five.
    """
    lookup = dict(zip((int(t) for t in times), values))
    selected = []
    missing = []
    for m in window.months:
        v = lookup.get(m)
        if v is None or not np.isfinite(v):
            missing.append(m)
        else:
            selected.append(v)
    if missing:
        raise CoverageError(
            f"window {window.label} is missing {len(missing)} of 60 months", module="watersupply"
        )
    return float(np.sum(selected)) / 5.0


def to_volume(depth_mm_yr: float, area_km2: float) -> float:
    """Depth (mm/year) over an area (km2) as a volume in Mgal/year."""
    if area_km2 < 0:
        raise InvalidInputError(f"area must be non-negative, got {area_km2}", module="watersupply")
    return depth_mm_yr * area_km2 * MGAL_PER_MM_KM2


def municipal_demand(population: float, per_capita_m3: float = DEFAULT_PER_CAPITA_M3) -> float:
    """Municipal and domestic demand (Mgal/year) of a population."""
    if population < 0:
        raise InvalidInputError(f"population must be non-negative, got {population}", module="watersupply")
    return population * per_capita_m3 * GAL_PER_M3 * 1e-6


def waaci(supply: float, demand: float) -> float:
    """Water Availability Absolute Change Index; negative means water-stressed."""
    return supply - demand


def waaci_change(window_record: WaaciRecord, baseline: WaaciRecord) -> float:
    """WAACI change of a window relative to the 2010s baseline of the same county and member/statistic."""
    if (window_record.fips, window_record.scenario, window_record.statistic) != (
        baseline.fips, baseline.scenario, baseline.statistic,
    ):
        raise AlignmentError(
            f"cannot compare {window_record.fips}/{window_record.statistic} with "
            f"{baseline.fips}/{baseline.statistic}",
            module="watersupply",
        )
    return window_record.waaci_mgal_yr - baseline.waaci_mgal_yr


def classify_dryness(value: float) -> Tuple[bool, bool]:
    """(stressed, significant_dry) for a WAACI value."""
    return value < 0, value <= SIGNIFICANT_DRY_MGAL_YR


def county_supply(times: Sequence[int], series: Sequence[float], window: ClimatologyWindow, area_km2: float) -> float:
    """County supply volume: P - E climatology at the centroid times county area."""
    return to_volume(climatology(times, series, window), area_km2)


def exposure_change(base: Iterable[WaaciRecord], later: Iterable[WaaciRecord]) -> float:
    """
    Change (percentage points) in the share of water-scarce counties between
    two sets of records covering the same counties.
    """
    base = list(base)
    later = list(later)
    if not base or not later:
        return 0.0
    if {r.fips for r in base} != {r.fips for r in later}:
        raise AlignmentError("exposure change needs the same counties in both windows", module="watersupply")
    share_base = sum(r.stressed for r in base) / len(base)
    share_later = sum(r.stressed for r in later) / len(later)
    return 100.0 * (share_later - share_base)


def waaci_changes(
    records: Iterable[WaaciRecord], baseline_window: str = "2010s"
) -> list[Tuple[WaaciRecord, WaaciRecord, float]]:
    """Pair every record with its county's baseline record and compute the change."""
    records = list(records)
    baselines: Mapping[Tuple[str, str, str], WaaciRecord] = {
        (r.fips, r.scenario, r.statistic): r for r in records if r.window == baseline_window
    }
    pairs = []
    for record in records:
        base = baselines.get((record.fips, record.scenario, record.statistic))
        if base is None:
            continue
        pairs.append((record, base, waaci_change(record, base)))
    return pairs
