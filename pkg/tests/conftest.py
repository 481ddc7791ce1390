import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from app.domain.models import CountyRecord, GaugeSeries, GriddedField, GridSpec, PipelineConfig, PlantRecord, Provenance
from app.services.pipeline import PipelineService
from app.services.synthesis import SynthOptions, SyntheticDatasetService
from app.storage.csv_dataset_manager import CsvDatasetManager


def make_spec(lat_start=30.0, lat_step=2.0, lat_count=4, lon_start=-100.0, lon_step=2.0, lon_count=5) -> GridSpec:
    return GridSpec(
        lat_start=lat_start, lat_step=lat_step, lat_count=lat_count,
        lon_start=lon_start, lon_step=lon_step, lon_count=lon_count,
    )


def make_field(
    values: np.ndarray,
    spec: Optional[GridSpec] = None,
    variable: str = "precipitation",
    times: Optional[Sequence[int]] = None,
    model: str = "CCSM4",
    run: str = "r1i1p1",
    scenario: str = "RCP8.5",
) -> GriddedField:
    values = np.asarray(values, dtype=float)
    spec = spec or make_spec(lat_count=values.shape[1], lon_count=values.shape[2])
    times = tuple(times) if times is not None else tuple(range(2008 * 12, 2008 * 12 + values.shape[0]))
    units = {"air_temperature": "degC", "rldscs": "W/m2", "rsdscs": "W/m2"}.get(variable, "mm/month")
    return GriddedField(
        spec=spec,
        variable=variable,
        units=units,
        times=times,
        values=values,
        provenance=Provenance(model=model, scenario=scenario, run=run),
    )


def make_county(fips="48001", state="Texas", lat=33.0, lon=-96.0, area=1000.0, pop2000=None, pop2010=100_000.0, name=None):
    return CountyRecord(
        fips=fips, state=state, name=name, lat=lat, lon=lon, area_km2=area, pop2000=pop2000, pop2010=pop2010
    )


def make_plant(plant_id="P1", fips="48001", state="Texas", lat=33.0, lon=-96.0, cooling="once_through", mw=1000.0, **kw):
    return PlantRecord(
        plant_id=plant_id, lat=lat, lon=lon, fips=fips, state=state, cooling=cooling, nameplate_mw=mw, **kw
    )


def make_gauge(gauge_id="G1", lat=33.0, lon=-96.0, fips="48001", state="Texas", times=(), temps=()):
    return GaugeSeries(
        gauge_id=gauge_id, lat=lat, lon=lon, fips=fips, state=state, times=list(times), temps=list(temps)
    )


@pytest.fixture(scope="session")
def synth_dataset(tmp_path_factory) -> Path:
    """Synthetic dataset (seed 7) shared by the end-to-end tests."""
    root = tmp_path_factory.mktemp("dataset")
    SyntheticDatasetService(root, SynthOptions(seed=7)).generate()
    return root


@pytest.fixture(scope="session")
def truth(synth_dataset) -> dict:
    return json.loads((synth_dataset / "truth.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def all_statistics_run(synth_dataset, tmp_path_factory) -> Path:
    """One full run over every statistic and window."""
    out = tmp_path_factory.mktemp("run")
    config = PipelineConfig(
        dataset_dir=str(synth_dataset),
        output_dir=str(out),
        statistics=["median", "min2", "p80", "max2"],
    )
    PipelineService(CsvDatasetManager(synth_dataset), config).run()
    return out
