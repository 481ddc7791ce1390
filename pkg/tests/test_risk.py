import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.domain.errors import InvalidInputError
from app.domain.geo_utils import haversine_km
from app.domain.models import GaugeProjection
from app.domain.risk import (
    build_report,
    capacity_at_risk,
    classify_county,
    exceedance_list,
    is_stressed,
    link_gauges,
    mw_to_quads,
    nearest_gauge,
    plant_annual_quads,
    risk_trend,
)
from app.domain.thermal import load_thresholds
from tests.conftest import make_county, make_gauge, make_plant


def test_quads_of_a_gigawatt_plant():
    assert mw_to_quads(1000.0, 1.0) == pytest.approx(0.02989, abs=1e-5)
    with pytest.raises(InvalidInputError):
        mw_to_quads(1000.0, 0.0)


def test_annual_generation_sources():
    assert plant_annual_quads(make_plant(annual_gen_quad=0.05)) == (0.05, False)
    assert plant_annual_quads(make_plant(capacity_factor=0.5))[0] == pytest.approx(mw_to_quads(1000.0, 0.5))
    quads, defaulted = plant_annual_quads(make_plant(), default_capacity_factor=0.6)
    assert defaulted
    assert quads == pytest.approx(mw_to_quads(1000.0, 0.6))


def test_classification():
    assert classify_county(-1.0, [0, 1]) == classify_county(-5.0, [1])
    hot = classify_county(10.0, [0, 1])
    assert not hot.water_scarce and hot.temp_stressed and not hot.no_gauge
    alone = classify_county(0.0, [])
    assert not alone.water_scarce and alone.no_gauge
    with pytest.raises(InvalidInputError):
        is_stressed(True, False, "either")


def test_haversine():
    assert haversine_km(0.0, 0.0, 0.0, 1.0) == pytest.approx(111.195, abs=1e-3)


@given(
    plant_lat=st.floats(30.0, 36.0),
    plant_lon=st.floats(-100.0, -92.0),
    coords=st.lists(st.tuples(st.floats(29.0, 37.0), st.floats(-101.0, -91.0)), min_size=1, max_size=8),
    radius=st.floats(10.0, 600.0),
)
@settings(max_examples=100, deadline=None)
def test_nearest_gauge_matches_brute_force(plant_lat, plant_lon, coords, radius):
    plant = make_plant(lat=plant_lat, lon=plant_lon)
    gauges = [make_gauge(gauge_id=f"G{i}", lat=lat, lon=lon) for i, (lat, lon) in enumerate(coords)]
    within = sorted(
        (haversine_km(plant_lat, plant_lon, g.lat, g.lon), g.gauge_id)
        for g in gauges
        if haversine_km(plant_lat, plant_lon, g.lat, g.lon) <= radius
    )
    expected = within[0][1] if within else None
    assert nearest_gauge(plant, gauges, radius) == expected


def test_link_gauges_combines_in_county_and_nearest():
    counties = [make_county(fips="48001"), make_county(fips="48003", lat=35.0)]
    gauges = [
        make_gauge(gauge_id="A", fips="48003", lat=35.0, lon=-96.0),
        make_gauge(gauge_id="B", fips="48005", lat=33.1, lon=-96.0),
    ]
    plants = [make_plant(fips="48001", lat=33.0, lon=-96.0)]
    assert link_gauges(counties, gauges, plants, 100.0) == {"48001": ["B"], "48003": ["A"]}


def _rows(mode="disjunctive"):
    counties = [
        make_county(fips="48001"),
        make_county(fips="48003"),
        make_county(fips="48005"),
        make_county(fips="48007"),
    ]
    plants = [
        make_plant(plant_id="P1", fips="48001", annual_gen_quad=0.1),
        make_plant(plant_id="P2", fips="48003", cooling="recirculating", annual_gen_quad=0.2),
        make_plant(plant_id="P3", fips="48005", annual_gen_quad=0.4),
        make_plant(plant_id="P4", fips="48005", cooling="dry", annual_gen_quad=5.0),
        make_plant(plant_id="P5", fips="48007", annual_gen_quad=0.8),
    ]
    report = build_report(
        window="2030s",
        scenario="RCP8.5",
        statistic="median",
        counties=counties,
        waaci_by_fips={"48001": -1.0, "48003": -1.0, "48005": 5.0, "48007": 5.0},
        gauge_wtsi={"G1": 1, "G2": 0, "G3": 1},
        county_gauges={"48001": ["G1"], "48003": ["G2"], "48005": ["G3"], "48007": []},
        plants=plants,
        mode=mode,
    )
    return report, plants


def test_report_aggregation_modes():
    disjunctive, plants = _rows("disjunctive")
    conjunctive, _ = _rows("conjunctive")
    assert disjunctive.totals.total_quads_at_risk == pytest.approx(0.7)
    assert conjunctive.totals.total_quads_at_risk == pytest.approx(0.1)
    assert disjunctive.totals.total_quads_conjunctive == pytest.approx(0.1)
    assert disjunctive.totals.total_quads_disjunctive == pytest.approx(0.7)
    assert disjunctive.totals.scarce_county_count == 2
    assert disjunctive.totals.temp_stressed_county_count == 2
    assert disjunctive.metadata.counties_without_gauge == 1
    assert capacity_at_risk(disjunctive.rows, plants, "conjunctive") <= capacity_at_risk(
        disjunctive.rows, plants, "disjunctive"
    )
    assert sum(r.capacity_at_risk for r in disjunctive.rows) == pytest.approx(disjunctive.totals.total_quads_at_risk)


def test_report_skips_counties_without_waaci():
    report = build_report(
        window="2010s", scenario="RCP8.5", statistic="median",
        counties=[make_county(fips="48001"), make_county(fips="48003")],
        waaci_by_fips={"48001": 1.0},
        gauge_wtsi={}, county_gauges={}, plants=[],
        counties_outside_grid=["48003"],
    )
    assert [r.fips for r in report.rows] == ["48001"]
    assert report.metadata.counties_outside_grid == ["48003"]


def test_risk_trend_mean_and_dispersion():
    plants = [make_plant(fips="48001", annual_gen_quad=1.0)]
    waaci = {
        "m1": {2020: {"48001": -1.0}, 2021: {"48001": -1.0}},
        "m2": {2020: {"48001": -1.0}, 2021: {"48001": 1.0}},
    }
    two, one = risk_trend(waaci, plants)
    assert (two.year, two.mean_quads, two.sigma_quads, two.members) == (2020, 1.0, 0.0, 2)
    assert (one.mean_quads, one.sigma_quads) == (0.5, 0.5)
    assert one.lower == 0.0 and one.upper == 1.0


def test_risk_trend_oracle_two_and_four():
    plants = [make_plant(fips="48001", annual_gen_quad=2.0), make_plant(fips="48003", annual_gen_quad=2.0)]
    waaci = {
        "m1": {2030: {"48001": -1.0, "48003": 1.0}},
        "m2": {2030: {"48001": -1.0, "48003": -1.0}},
    }
    (point,) = risk_trend(waaci, plants)
    assert point.mean_quads == pytest.approx(3.0)
    assert point.sigma_quads == pytest.approx(1.0)
    single = risk_trend({"m1": waaci["m1"]}, plants)
    assert single[0].single_member and single[0].sigma_quads == 0.0


def test_exceedance_list_names_counties():
    thresholds = load_thresholds()
    projections = [
        GaugeProjection(gauge_id="G1", fips="45013", state="South Carolina", window="2040s", max_temp_c=33.0, bias_c=0.0),
        GaugeProjection(gauge_id="G2", fips="48071", state="Texas", window="2040s", max_temp_c=32.5, bias_c=0.0),
        GaugeProjection(gauge_id="G3", fips="48071", state="Texas", window="2040s", max_temp_c=33.5, bias_c=0.0),
        GaugeProjection(gauge_id="G4", fips="21001", state="Kentucky", window="2040s", max_temp_c=31.7, bias_c=0.0),
        GaugeProjection(gauge_id="G5", fips="48001", state="Texas", window="2010s", max_temp_c=40.0, bias_c=0.0),
    ]
    names = {"45013": "Beaufort", "48071": "Chambers"}
    unknown = set()
    entries = exceedance_list(projections, thresholds, "2040s", names, unknown)
    assert [(e.state, e.county, e.fips) for e in entries] == [
        ("South Carolina", "Beaufort", "45013"),
        ("Texas", "Chambers", "48071"),
    ]
    assert unknown == {"South Carolina", "Texas"}
