import json
import math

import pandas as pd
import pytest

from app.domain.models import PipelineConfig
from app.services import pipeline
from app.services.pipeline import PipelineService
from app.storage.csv_dataset_manager import CsvDatasetManager

SCENARIO = "RCP8.5"
WINDOWS = ("2010s", "2020s", "2030s", "2040s")
STATISTICS = ("median", "min2", "p80", "max2")


def _risk(run_dir, window, statistic):
    return pd.read_csv(run_dir / SCENARIO / f"risk_{window}_{statistic}.csv", dtype={"fips": str})


def _hot_gauge_county(synth_dataset, truth):
    gauges = pd.read_csv(synth_dataset / "gauges.csv", dtype={"gauge_id": str, "fips": str})
    hot = truth["hot_gauges"][0]
    return gauges.loc[gauges["gauge_id"] == hot, "fips"].iloc[0]


def test_artifacts_are_written(all_statistics_run):
    expected = ["config.json", "trends.csv"] + [
        f"{SCENARIO}/{name}"
        for name in (
            "waaci.csv", "waaci_change.csv", "projections.csv", "validation.csv", "plant_capacity.csv",
            "exceedance.csv", "risk_trend.csv", "risk_trend.svg", "summary.json",
        )
    ]
    expected += [f"{SCENARIO}/risk_{w}_{s}.{ext}" for w in WINDOWS for s in STATISTICS for ext in ("csv", "geojson")]
    for name in expected:
        assert (all_statistics_run / name).is_file(), name


def test_scarce_counties_match_closed_form(all_statistics_run, truth):
    expected = truth["expected_scarce"][SCENARIO]
    for window in WINDOWS:
        for statistic in STATISTICS:
            rows = _risk(all_statistics_run, window, statistic)
            scarce = sorted(rows.loc[rows["water_scarce"], "fips"])
            assert scarce == expected[window][statistic], (window, statistic)


def test_counties_outside_grid_are_excluded(all_statistics_run, truth):
    rows = _risk(all_statistics_run, "2030s", "median")
    assert set(truth["outside_grid"]).isdisjoint(rows["fips"])
    assert len(rows) == 12 - len(truth["outside_grid"])
    summary = json.loads((all_statistics_run / SCENARIO / "summary.json").read_text(encoding="utf-8"))
    assert summary["reports"][0]["metadata"]["counties_outside_grid"] == truth["outside_grid"]


def test_waaci_budget_holds(all_statistics_run):
    waaci = pd.read_csv(all_statistics_run / SCENARIO / "waaci.csv", dtype={"fips": str})
    diff = waaci["supply_mgal_yr"] - waaci["demand_mgal_yr"] - waaci["waaci_mgal_yr"]
    scale = waaci[["supply_mgal_yr", "demand_mgal_yr"]].abs().max(axis=1).clip(lower=1.0)
    assert (diff.abs() <= 1e-8 * scale).all()
    assert set(waaci["statistic"]) == set(STATISTICS)


def test_planted_trends_are_detected(all_statistics_run, truth):
    trends = pd.read_csv(all_statistics_run / "trends.csv", dtype={"gauge_id": str, "fips": str})
    planted = {t["gauge_id"] for t in truth["planted_trends"]}
    hits = trends[trends["gauge_id"].isin(planted)]
    assert len(hits) == len(planted)
    assert (hits["direction"] == "up").all()
    assert hits["significant"].all()


def test_hot_gauge_flags_its_county(all_statistics_run, synth_dataset, truth):
    fips = _hot_gauge_county(synth_dataset, truth)
    projections = pd.read_csv(all_statistics_run / SCENARIO / "projections.csv", dtype={"gauge_id": str})
    hot = projections[(projections["gauge_id"] == truth["hot_gauges"][0]) & (projections["window"] == "2040s")]
    assert hot["max_temp_c"].iloc[0] > 30.5

    rows = _risk(all_statistics_run, "2040s", "median").set_index("fips")
    assert rows.loc[fips, "temp_stressed"]
    assert rows.loc[fips, "state"] == "Pennsylvania"

    exceedance = pd.read_csv(all_statistics_run / SCENARIO / "exceedance.csv", dtype={"fips": str})
    listed = exceedance[(exceedance["window"] == "2040s") & (exceedance["fips"] == fips)]
    assert list(listed["state"]) == ["Pennsylvania"]


def test_dry_cooled_plants_never_count(all_statistics_run, truth):
    capacity = pd.read_csv(all_statistics_run / SCENARIO / "plant_capacity.csv", dtype={"plant_id": str})
    assert not set(truth["dry_plant_ids"]) & set(capacity["plant_id"])
    assert (capacity["usable_mw"] >= 0).all()


def test_totals_equal_row_sums(all_statistics_run):
    summary = json.loads((all_statistics_run / SCENARIO / "summary.json").read_text(encoding="utf-8"))
    assert len(summary["reports"]) == len(WINDOWS) * len(STATISTICS)
    assert len(summary["members"]) == 6 and len(set(summary["members"])) == 6
    for entry in summary["reports"]:
        rows = _risk(all_statistics_run, entry["window"], entry["statistic"])
        totals = entry["totals"]
        assert math.fsum(rows["capacity_at_risk"]) == pytest.approx(totals["total_quads_at_risk"], rel=1e-9, abs=1e-12)
        assert totals["scarce_county_count"] == int(rows["water_scarce"].sum())
        assert totals["total_quads_conjunctive"] <= totals["total_quads_disjunctive"] + 1e-12
    assert set(summary["exposure_change_pct"]["median"]) == {"2020s", "2030s", "2040s"}


def test_risk_trend_covers_every_year(all_statistics_run):
    trend = pd.read_csv(all_statistics_run / SCENARIO / "risk_trend.csv")
    assert list(trend["year"]) == list(range(2008, 2043))
    assert (trend["members"] == 6).all()
    assert (trend["lower"] <= trend["mean_quads"]).all()
    svg = (all_statistics_run / SCENARIO / "risk_trend.svg").read_text(encoding="utf-8")
    assert svg.startswith("<svg") and "<polyline" in svg


def test_rerun_with_more_workers_is_byte_identical(all_statistics_run, synth_dataset, tmp_path):
    config = PipelineConfig(
        dataset_dir=str(synth_dataset),
        output_dir=str(tmp_path),
        statistics=list(STATISTICS),
        workers=4,
    )
    PipelineService(CsvDatasetManager(synth_dataset), config).run()
    first = sorted(p.relative_to(all_statistics_run) for p in all_statistics_run.rglob("*") if p.is_file())
    second = sorted(p.relative_to(tmp_path) for p in tmp_path.rglob("*") if p.is_file())
    assert first == second
    for relative in first:
        if relative.name == "config.json":
            continue
        assert (all_statistics_run / relative).read_bytes() == (tmp_path / relative).read_bytes(), relative


def test_change_mode_demand_never_exceeds_absolute(synth_dataset, tmp_path):
    manager = CsvDatasetManager(synth_dataset)
    base = dict(dataset_dir=str(synth_dataset), output_dir=str(tmp_path), windows=["2040s"])
    absolute = PipelineService(manager, PipelineConfig(**base)).compute_waaci(SCENARIO)
    change = PipelineService(manager, PipelineConfig(**base, demand_mode="change")).compute_waaci(SCENARIO)
    for a, c in zip(absolute.records, change.records):
        assert a.fips == c.fips
        assert c.demand_mgal_yr <= a.demand_mgal_yr
        assert c.waaci_mgal_yr >= a.waaci_mgal_yr


def test_waaci_csv_marks_stressed_rows(all_statistics_run, truth):
    waaci = pd.read_csv(all_statistics_run / SCENARIO / "waaci.csv", dtype={"fips": str})
    assert list(waaci.columns) == [
        "fips", "window", "scenario", "statistic", "supply_mgal_yr", "demand_mgal_yr", "waaci_mgal_yr", "stressed",
    ]
    assert (waaci["stressed"] == (waaci["waaci_mgal_yr"] < 0)).all()

    scarce = truth["expected_scarce"][SCENARIO]["2040s"]["median"]
    assert scarce
    row = waaci[(waaci["fips"] == scarce[0]) & (waaci["window"] == "2040s") & (waaci["statistic"] == "median")]
    assert len(row) == 1
    assert bool(row["stressed"].iloc[0])


def test_freshwater_is_computed_once_per_member(synth_dataset, tmp_path, monkeypatch):
    calls = []
    freshwater = pipeline.freshwater

    def counting_freshwater(precipitation, evapotranspiration):
        calls.append(precipitation.provenance.member)
        return freshwater(precipitation, evapotranspiration)

    monkeypatch.setattr(pipeline, "freshwater", counting_freshwater)
    config = PipelineConfig(dataset_dir=str(synth_dataset), output_dir=str(tmp_path), windows=["2010s", "2040s"])
    service = PipelineService(CsvDatasetManager(synth_dataset), config)
    result = service.compute_waaci(SCENARIO)
    assert result.records
    assert sorted(calls) == sorted(service.members(SCENARIO))
