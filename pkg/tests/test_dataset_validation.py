import shutil

import pandas as pd
import pytest

from app.domain.errors import DatasetValidationError
from app.storage.csv_dataset_manager import CsvDatasetManager


@pytest.fixture
def dataset_copy(synth_dataset, tmp_path):
    target = tmp_path / "dataset"
    shutil.copytree(synth_dataset, target)
    return target


def _rewrite(path, column, value, row=0):
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.loc[row, column] = value
    frame.to_csv(path, index=False, lineterminator="\n")


def test_synthetic_dataset_is_valid(synth_dataset, truth):
    report = CsvDatasetManager(synth_dataset).validate()
    assert report.ok, [str(e) for e in report.errors]
    warnings = [str(w) for w in report.warnings]
    for fips in truth["outside_grid"]:
        assert any(f"county {fips} centroid lies outside the grid" in w for w in warnings)
    assert any("no 2000 population" in w for w in warnings)


def test_loaded_records(synth_dataset, truth):
    manager = CsvDatasetManager(synth_dataset)
    counties = manager.get_counties()
    assert len(counties) == 12
    assert all(len(c.fips) == 5 for c in counties)
    gauges = manager.get_gauges()
    assert [g.gauge_id for g in gauges] == sorted(g.gauge_id for g in gauges)
    assert all(g.gauge_id.startswith("0") for g in gauges)
    fields = manager.get_fields("RCP8.5")
    assert {f.provenance.member for f in fields} == {
        (m, r) for m in ("CCSM4", "GISS-E2H", "MIROC5") for r in ("r1i1p1", "r2i1p1")
    }
    assert manager.get_fields("RCP2.6") == []
    assert set(manager.get_national()) == {2020, 2030, 2040}


def test_out_of_range_stream_temperature(dataset_copy):
    _rewrite(dataset_copy / "gauges.csv", "temp_c", "99")
    report = CsvDatasetManager(dataset_copy).validate()
    assert not report.ok
    assert any("outside [-5, 50]" in e.message and e.line == 2 for e in report.errors)


def test_plant_in_unknown_county(dataset_copy):
    _rewrite(dataset_copy / "plants.csv", "fips", "99999")
    report = CsvDatasetManager(dataset_copy).validate()
    assert any("refers to unknown county 99999" in e.message for e in report.errors)
    with pytest.raises(DatasetValidationError):
        CsvDatasetManager(dataset_copy / "missing").get_plants()


def test_unknown_cooling_class(dataset_copy):
    _rewrite(dataset_copy / "plants.csv", "cooling", "seawater")
    report = CsvDatasetManager(dataset_copy).validate()
    assert any(e.file == "plants.csv" and e.line == 2 for e in report.errors)


def test_malformed_csv_reports_line(tmp_path):
    (tmp_path / "counties.csv").write_text(
        "fips,state,lat,lon,area_km2,pop2010\n"
        "48001,Texas,33.0,-96.0,100.0,1000\n"
        "48003,Texas,33.0,-96.0,100.0,1000,5,6\n",
        encoding="utf-8",
    )
    report = CsvDatasetManager(tmp_path).validate()
    counties = [e for e in report.errors if e.file == "counties.csv"]
    assert counties and counties[0].line == 3


def test_missing_directory():
    report = CsvDatasetManager("/nonexistent/powerrisk/dataset").validate()
    assert not report.ok
    assert "does not exist" in report.errors[0].message
