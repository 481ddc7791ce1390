"""
County population growth and compound projection.

The annual growth rate is the geometric (compound) rate over 2000-2010, so
projecting the 2000 population forward ten years reproduces 2010.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, List, Sequence

from app.domain.errors import InvalidInputError, InvalidRateError, InvalidReferenceError, UndefinedRateError
from app.domain.models import ClimatologyWindow, CountyRecord

logger = logging.getLogger(__name__)

BASE_YEAR = 2010
CENSUS_YEARS = (2000, 2010)
PROJECTION_YEARS = (2020, 2030, 2040)


def growth_rate(pop2000: float, pop2010: float) -> float:
    """Geometric annual growth rate r = (pop2010/pop2000)^(1/10) - 1."""
    if pop2000 is None or pop2000 <= 0:
        raise UndefinedRateError(f"growth rate undefined for base population {pop2000}")
    if pop2010 < 0:
        raise InvalidInputError(f"negative population {pop2010}", module="demography")
    return (pop2010 / pop2000) ** 0.1 - 1.0


def project_population(pop2010: float, rate: float, years: int) -> float:
    """Compound projection pop2010 * (1 + rate)^years (unrounded)."""
    if 1.0 + rate < 0:
        raise InvalidRateError(f"growth rate {rate} implies a negative growth factor")
    if years < 0:
        raise InvalidInputError(f"projection horizon must be non-negative, got {years}", module="demography")
    return pop2010 * (1.0 + rate) ** years


def national_check(county_projections: Iterable[float], national_reference: float) -> float:
    """Percent difference between summed county projections and a national total."""
    if national_reference is None or national_reference <= 0:
        raise InvalidReferenceError(f"national reference must be positive, got {national_reference}")
    total = math.fsum(county_projections)
    return 100.0 * abs(total - national_reference) / national_reference


def county_rate(county: CountyRecord) -> float:
    """Growth rate of a county, or 0 for counties without a 2000 population."""
    try:
        return growth_rate(county.pop2000, county.pop2010)
    except UndefinedRateError:
        return 0.0


def project_counties(
    counties: Sequence[CountyRecord],
    target_years: Iterable[int] = PROJECTION_YEARS,
) -> List[CountyRecord]:
    """
    Fill growth rate and projections for every county.

    Counties created after 2000 (no base population) use a zero rate and
    keep their 2010 population; they are flagged.
    """
    target_years = tuple(target_years)
    projected: List[CountyRecord] = []
    flagged = 0
    for county in counties:
        try:
            rate = growth_rate(county.pop2000, county.pop2010)
            is_flagged = False
        except UndefinedRateError:
            rate = 0.0
            is_flagged = True
            flagged += 1
            logger.warning(f"County {county.fips} has no 2000 population; holding 2010 population constant")
        projections = {
            year: project_population(county.pop2010, rate, year - BASE_YEAR) for year in target_years
        }
        projected.append(
            county.model_copy(update={"growth_rate": rate, "rate_flagged": is_flagged, "projections": projections})
        )
    logger.info(f"Projected {len(projected)} counties to {list(target_years)} ({flagged} flagged)")
    return projected


def population_in_year(county: CountyRecord, year: int) -> float:
    """
    Population in any year: compound from 2010 for later years, from 2000
    (when known) for years between the censuses.
    """
    rate = county.growth_rate if county.growth_rate is not None else county_rate(county)
    if year >= BASE_YEAR:
        return project_population(county.pop2010, rate, year - BASE_YEAR)
    if county.pop2000 and year >= CENSUS_YEARS[0] and not county.rate_flagged:
        return project_population(county.pop2000, rate, year - CENSUS_YEARS[0])
    return county.pop2010


def demand_population(county: CountyRecord, year: int, mode: str = "absolute") -> float:
    """Population driving demand in a year; ``change`` mode counts only growth since 2010."""
    level = population_in_year(county, year)
    if mode == "change":
        return max(level - county.pop2010, 0.0)
    return level


def population_for_window(county: CountyRecord, window: ClimatologyWindow, mode: str = "absolute") -> float:
    """
    Population used for a window's demand, taken at the window's reference
    year (2010, 2020, 2030, 2040).
    """
    return demand_population(county, window.center_year, mode)
