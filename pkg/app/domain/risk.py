"""
County risk classification and aggregation of wet-cooled generation at risk.

A county is water-scarce when its WAACI is negative and temperature-stressed
when any linked gauge exceeds its state's limit. Capacity at risk sums the
annual generation (quad/year) of wet-cooled plants in counties that are
stressed under the chosen aggregation mode: ``conjunctive`` (scarce AND hot)
or ``disjunctive`` (scarce OR hot).
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from app.domain.errors import InvalidInputError
from app.domain.geo_utils import haversine_km
from app.domain.models import (
    CountyClassification,
    CountyRecord,
    CountyRiskRow,
    ExceedanceEntry,
    GaugeProjection,
    GaugeSeries,
    PlantRecord,
    ReportMetadata,
    RiskReport,
    RiskTotals,
    RiskTrendPoint,
    StateThresholds,
)
from app.domain.thermal import wtsi

logger = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
BTU_PER_MWH = 3.6e9 / 1055.0
BTU_PER_QUAD = 1e15


# ---------------------------------------------------------------------------
# Joins and classification
# ---------------------------------------------------------------------------


def nearest_gauge(plant: PlantRecord, gauges: Iterable[GaugeSeries], radius_km: float) -> Optional[str]:
    """Closest gauge within ``radius_km`` (ties go to the smaller gauge id), or None."""
    if radius_km <= 0:
        raise InvalidInputError(f"gauge radius must be positive, got {radius_km}", module="risk")
    best: Optional[Tuple[float, str]] = None
    for gauge in gauges:
        d = haversine_km(plant.lat, plant.lon, gauge.lat, gauge.lon)
        if d > radius_km:
            continue
        key = (d, gauge.gauge_id)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def link_gauges(
    counties: Iterable[CountyRecord],
    gauges: Sequence[GaugeSeries],
    plants: Iterable[PlantRecord],
    radius_km: float,
) -> Dict[str, List[str]]:
    """
    Gauges whose readings count for each county: gauges located in it plus
    the nearest gauge of each of its plants.
    """
    linked: Dict[str, Set[str]] = {c.fips: set() for c in counties}
    for gauge in gauges:
        if gauge.fips in linked:
            linked[gauge.fips].add(gauge.gauge_id)
    for plant in plants:
        if plant.fips not in linked:
            continue
        gauge_id = nearest_gauge(plant, gauges, radius_km)
        if gauge_id is not None:
            linked[plant.fips].add(gauge_id)
    return {fips: sorted(ids) for fips, ids in linked.items()}


def classify_county(waaci: float, gauge_flags: Iterable[int]) -> CountyClassification:
    flags = list(gauge_flags)
    return CountyClassification(
        water_scarce=waaci < 0,
        temp_stressed=any(f == 1 for f in flags),
        no_gauge=not flags,
    )


def is_stressed(water_scarce: bool, temp_stressed: bool, mode: str) -> bool:
    if mode == "conjunctive":
        return water_scarce and temp_stressed
    if mode == "disjunctive":
        return water_scarce or temp_stressed
    raise InvalidInputError(f"unknown aggregation mode '{mode}'", module="risk")


# ---------------------------------------------------------------------------
# Capacity
# ---------------------------------------------------------------------------


def mw_to_quads(nameplate_mw: float, capacity_factor: float) -> float:
    """Annual generation (quad/year) of a plant running at ``capacity_factor``."""
    if not 0 < capacity_factor <= 1:
        raise InvalidInputError(f"capacity factor must be in (0, 1], got {capacity_factor}", module="risk")
    return nameplate_mw * HOURS_PER_YEAR * capacity_factor * BTU_PER_MWH / BTU_PER_QUAD


def plant_annual_quads(plant: PlantRecord, default_capacity_factor: float = 0.6) -> Tuple[float, bool]:
    """
    Reported annual generation, else nameplate at the plant's (or the
    default) capacity factor. The flag is True when the default was used.
    """
    if plant.annual_gen_quad is not None:
        return plant.annual_gen_quad, False
    if plant.capacity_factor is not None:
        return mw_to_quads(plant.nameplate_mw, plant.capacity_factor), False
    return mw_to_quads(plant.nameplate_mw, default_capacity_factor), True


def wet_quads_by_county(plants: Iterable[PlantRecord], default_capacity_factor: float = 0.6) -> Dict[str, List[float]]:
    per_county: Dict[str, List[float]] = defaultdict(list)
    for plant in plants:
        if plant.wet_cooled:
            per_county[plant.fips].append(plant_annual_quads(plant, default_capacity_factor)[0])
    return per_county


def capacity_at_risk(
    rows: Iterable[CountyRiskRow],
    plants: Iterable[PlantRecord],
    mode: str = "disjunctive",
    default_capacity_factor: float = 0.6,
) -> float:
    """Total annual generation (quad/year) of wet-cooled plants in stressed counties."""
    per_county = wet_quads_by_county(plants, default_capacity_factor)
    stressed = [r.fips for r in rows if is_stressed(r.water_scarce, r.temp_stressed, mode)]
    return math.fsum(q for fips in stressed for q in per_county.get(fips, ()))


def risk_trend(
    member_yearly_waaci: Mapping[str, Mapping[int, Mapping[str, float]]],
    plants: Iterable[PlantRecord],
    default_capacity_factor: float = 0.6,
) -> List[RiskTrendPoint]:
    """
    Yearly at-risk generation across ensemble members.

    ``member_yearly_waaci`` maps member tag -> year -> fips -> WAACI. For each
    year the at-risk total (WAACI < 0) is computed per member and summarized
    by the member mean and population standard deviation.
    """
    per_county = wet_quads_by_county(plants, default_capacity_factor)
    by_year: Dict[int, List[float]] = defaultdict(list)
    for member in sorted(member_yearly_waaci):
        for year, county_values in member_yearly_waaci[member].items():
            total = math.fsum(
                q for fips, value in county_values.items() if value < 0 for q in per_county.get(fips, ())
            )
            by_year[int(year)].append(total)

    points = []
    for year in sorted(by_year):
        values = np.array(sorted(by_year[year]))
        points.append(
            RiskTrendPoint(
                year=year,
                mean_quads=math.fsum(values) / values.size,
                sigma_quads=float(values.std()),
                members=int(values.size),
                single_member=values.size == 1,
            )
        )
    if points and points[0].single_member:
        logger.warning("Risk trend computed from a single member; dispersion band is zero")
    return points


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def exceedance_list(
    projections: Iterable[GaugeProjection],
    thresholds: StateThresholds,
    window: str,
    county_names: Optional[Mapping[str, str]] = None,
    unknown_states: Optional[Set[str]] = None,
) -> List[ExceedanceEntry]:
    """Distinct counties with at least one gauge over its state limit in ``window``."""
    county_names = county_names or {}
    hits = {
        (p.state, county_names.get(p.fips) or p.fips, p.fips)
        for p in projections
        if p.window == window and wtsi(p.max_temp_c, p.state, thresholds, unknown_states) == 1
    }
    return [ExceedanceEntry(state=s, county=c, fips=f) for s, c, f in sorted(hits)]


def build_report(
    *,
    window: str,
    scenario: str,
    statistic: str,
    counties: Iterable[CountyRecord],
    waaci_by_fips: Mapping[str, float],
    gauge_wtsi: Mapping[str, int],
    county_gauges: Mapping[str, Sequence[str]],
    plants: Sequence[PlantRecord],
    exceedances: Sequence[ExceedanceEntry] = (),
    mode: str = "disjunctive",
    default_capacity_factor: float = 0.6,
    counties_outside_grid: Sequence[str] = (),
    unknown_threshold_states: Iterable[str] = (),
) -> RiskReport:
    """
    Classify every county that has a WAACI value and aggregate wet-cooled
    generation at risk. Rows are ordered by (state, fips); totals are
    recomputed from the rows.
    """
    per_county = wet_quads_by_county(plants, default_capacity_factor)
    rows: List[CountyRiskRow] = []
    for county in sorted(counties, key=lambda c: (c.state, c.fips)):
        if county.fips not in waaci_by_fips:
            continue
        flags = [gauge_wtsi[g] for g in county_gauges.get(county.fips, ()) if g in gauge_wtsi]
        cls = classify_county(waaci_by_fips[county.fips], flags)
        at_risk = (
            math.fsum(per_county.get(county.fips, ()))
            if is_stressed(cls.water_scarce, cls.temp_stressed, mode)
            else 0.0
        )
        rows.append(
            CountyRiskRow(
                fips=county.fips,
                state=county.state,
                name=county.name,
                lat=county.lat,
                lon=county.lon,
                waaci=waaci_by_fips[county.fips],
                water_scarce=cls.water_scarce,
                temp_stressed=cls.temp_stressed,
                no_gauge=cls.no_gauge,
                capacity_at_risk=at_risk,
            )
        )

    totals = RiskTotals(
        scarce_county_count=sum(r.water_scarce for r in rows),
        temp_stressed_county_count=sum(r.temp_stressed for r in rows),
        exceed_county_list=list(exceedances),
        total_quads_at_risk=math.fsum(r.capacity_at_risk for r in rows),
        total_quads_conjunctive=capacity_at_risk(rows, plants, "conjunctive", default_capacity_factor),
        total_quads_disjunctive=capacity_at_risk(rows, plants, "disjunctive", default_capacity_factor),
    )
    metadata = ReportMetadata(
        aggregation_mode=mode,
        default_capacity_factor=default_capacity_factor,
        plants_using_default_capacity_factor=sum(plant_annual_quads(p, default_capacity_factor)[1] for p in plants),
        counties_outside_grid=sorted(counties_outside_grid),
        counties_without_gauge=sum(r.no_gauge for r in rows),
        unknown_threshold_states=sorted(set(unknown_threshold_states)),
    )
    logger.info(
        f"Risk report {scenario} {window} {statistic}: {totals.scarce_county_count} scarce, "
        f"{totals.temp_stressed_county_count} hot, {totals.total_quads_at_risk:.4f} quad/yr at risk ({mode})"
    )
    return RiskReport(
        window=window, scenario=scenario, statistic=statistic, rows=rows, totals=totals, metadata=metadata
    )
