import pytest

from app.domain.demography import (
    county_rate,
    demand_population,
    growth_rate,
    national_check,
    population_for_window,
    population_in_year,
    project_counties,
    project_population,
)
from app.domain.errors import InvalidRateError, InvalidReferenceError, UndefinedRateError
from app.domain.models import WINDOWS
from tests.conftest import make_county


def test_projection_reproduces_census():
    rate = growth_rate(80_000, 100_000)
    assert rate == pytest.approx(1.25 ** 0.1 - 1, rel=1e-12)
    assert project_population(80_000, rate, 10) == pytest.approx(100_000, rel=1e-12)


def test_declining_county_has_negative_rate():
    rate = growth_rate(50_000, 40_000)
    assert rate < 0
    assert project_population(40_000, rate, 30) < 40_000


def test_rate_errors():
    with pytest.raises(UndefinedRateError):
        growth_rate(0, 100)
    with pytest.raises(UndefinedRateError):
        growth_rate(None, 100)
    with pytest.raises(InvalidRateError):
        project_population(100, -1.5, 1)


def test_national_check_percent_difference():
    assert national_check([100.0, 200.0, 300.0], 600.0) == pytest.approx(0.0)
    assert national_check([100.0, 200.0, 300.0], 500.0) == pytest.approx(20.0)
    with pytest.raises(InvalidReferenceError):
        national_check([1.0], 0.0)


def test_counties_without_base_population_are_flagged():
    counties = [
        make_county(fips="48001", pop2000=90_000, pop2010=100_000),
        make_county(fips="48003", pop2000=None, pop2010=5_000),
    ]
    grown, new = project_counties(counties)
    assert not grown.rate_flagged
    assert grown.projections[2020] == pytest.approx(100_000 * (100_000 / 90_000))
    assert new.rate_flagged
    assert new.growth_rate == 0.0
    assert new.projections == {2020: 5_000, 2030: 5_000, 2040: 5_000}
    assert county_rate(counties[1]) == 0.0


def test_population_between_censuses_interpolates_geometrically():
    county = make_county(pop2000=100_000, pop2010=121_000)
    assert population_in_year(county, 2000) == pytest.approx(100_000)
    assert population_in_year(county, 2005) == pytest.approx(110_000)
    assert population_in_year(county, 2010) == pytest.approx(121_000)


def test_demand_population_modes():
    growing = make_county(pop2000=100_000, pop2010=110_000)
    shrinking = make_county(pop2000=120_000, pop2010=110_000)
    absolute = demand_population(growing, 2040)
    assert absolute > 110_000
    assert demand_population(growing, 2040, "change") == pytest.approx(absolute - 110_000)
    assert demand_population(shrinking, 2040, "change") == 0.0


def test_window_population_uses_reference_year():
    county = make_county(pop2000=100_000, pop2010=110_000)
    rate = growth_rate(100_000, 110_000)
    assert population_for_window(county, WINDOWS["2010s"]) == pytest.approx(110_000)
    assert population_for_window(county, WINDOWS["2030s"]) == pytest.approx(110_000 * (1 + rate) ** 20)
