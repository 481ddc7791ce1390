import logging
import math
import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.domain.errors import DatasetParseError, DatasetValidationError
from app.domain.geogrid import contains, normalize_longitudes
from app.domain.models import (
    CountyRecord,
    GaugeSeries,
    GriddedField,
    GridSpec,
    PlantRecord,
    Provenance,
    StateThresholds,
    ValidationReport,
    month_index,
)
from app.domain.thermal import load_thresholds
from app.storage.dataset_manager import DatasetManager

logger = logging.getLogger(__name__)

GRID_COLUMNS = ["model", "scenario", "run", "variable", "year", "month", "lat", "lon", "value"]
COUNTY_COLUMNS = ["fips", "state", "lat", "lon", "area_km2", "pop2010"]
GAUGE_COLUMNS = ["gauge_id", "lat", "lon", "fips", "state", "year", "month", "temp_c"]
PLANT_COLUMNS = ["plant_id", "name", "lat", "lon", "fips", "state", "cooling", "fuel", "nameplate_mw"]
NATIONAL_COLUMNS = ["year", "population"]
THERMAL_COLUMNS = [
    "eta_total", "eta_elec", "alpha_heat", "beta_air", "omega",
    "epsilon", "lambda_eff", "gamma_flow", "dt_max_k", "t_max_c",
]

UNITS: Dict[str, str] = {
    "precipitation": "mm/month",
    "evapotranspiration": "mm/month",
    "air_temperature": "degC",
    "rldscs": "W/m2",
    "rsdscs": "W/m2",
}

_LINE_RE = re.compile(r"line (\d+)")


def _clean(value: Any) -> Any:
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, str) and not value.strip():
        return None
    return value


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    return f"{where}: {err['msg']}" if where else err["msg"]


class CsvDatasetManager(DatasetManager):
    """
    Dataset directory of CSV files::

        grids/*.csv     model,scenario,run,variable,year,month,lat,lon,value
        counties.csv    fips,state,[name],lat,lon,area_km2,[pop2000],pop2010
        national.csv    year,population                      (optional)
        gauges.csv      gauge_id,lat,lon,fips,state,[huc],year,month,temp_c
        plants.csv      plant_id,name,lat,lon,fips,state,cooling,fuel,nameplate_mw,
                        [annual_gen_quad],[capacity_factor],[streamflow_m3s],[thermal columns]
        thresholds.csv  state,threshold_c                    (optional)
    """

    def __init__(self, dataset_dir: Path):
        self._dir = Path(dataset_dir)
        self._cache: Dict[str, Any] = {}

    @property
    def dataset_dir(self) -> Path:
        return self._dir

    # ------------------------------------------------------------------
    # Public accessors
    # ------------------------------------------------------------------

    def validate(self) -> ValidationReport:
        report = ValidationReport(dataset_dir=str(self._dir))
        if not self._dir.is_dir():
            report.error(str(self._dir), "dataset directory does not exist")
            return report

        parsed: Dict[str, Any] = {}
        for name, parser, empty in (
            ("fields", self._parse_grids, []),
            ("counties", self._parse_counties, []),
            ("national", self._parse_national, {}),
            ("gauges", self._parse_gauges, []),
            ("plants", self._parse_plants, []),
            ("thresholds", self._parse_thresholds, StateThresholds()),
        ):
            try:
                parsed[name] = parser(report)
            except DatasetParseError as e:
                report.error(Path(e.path).name, e.detail, e.line)
                parsed[name] = empty

        self._check_references(report, **parsed)
        logger.info(
            f"Validated {self._dir}: {len(report.errors)} errors, {len(report.warnings)} warnings"
        )
        return report

    def get_fields(self, scenario: Optional[str] = None) -> List[GriddedField]:
        fields = self._cached("fields", self._parse_grids)
        if scenario is None:
            return list(fields)
        return [f for f in fields if f.provenance.scenario == scenario]

    def get_counties(self) -> List[CountyRecord]:
        return list(self._cached("counties", self._parse_counties))

    def get_national(self) -> Dict[int, float]:
        return dict(self._cached("national", self._parse_national))

    def get_gauges(self) -> List[GaugeSeries]:
        return list(self._cached("gauges", self._parse_gauges))

    def get_plants(self) -> List[PlantRecord]:
        return list(self._cached("plants", self._parse_plants))

    def get_thresholds(self) -> StateThresholds:
        return self._cached("thresholds", self._parse_thresholds)

    def write_table(self, relative_path: str, frame: pd.DataFrame, float_format: str = "%.6f") -> Path:
        """Write one dataset file (used by the synthetic generator)."""
        path = self._dir / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
        self._cache.clear()
        return path

    # ------------------------------------------------------------------
    # Parsing
    # ------------------------------------------------------------------

    def _cached(self, name: str, parser: Callable[[ValidationReport], Any]) -> Any:
        if name not in self._cache:
            report = ValidationReport(dataset_dir=str(self._dir))
            value = parser(report)
            if report.errors:
                shown = "; ".join(str(issue) for issue in report.errors[:5])
                more = f" (+{len(report.errors) - 5} more)" if len(report.errors) > 5 else ""
                raise DatasetValidationError(f"{len(report.errors)} problem(s) in {name}: {shown}{more}")
            self._cache[name] = value
        return self._cache[name]

    def _read(self, path: Path, required: Iterable[str], dtype: Optional[Dict[str, Any]] = None) -> pd.DataFrame:
        if not path.exists():
            raise DatasetParseError("file not found", path=str(path))
        try:
            frame = pd.read_csv(path, dtype=dtype, skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise DatasetParseError("file is empty", path=str(path), line=1)
        except pd.errors.ParserError as e:
            match = _LINE_RE.search(str(e))
            raise DatasetParseError(str(e).strip(), path=str(path), line=int(match.group(1)) if match else None)
        except ValueError as e:
            raise DatasetParseError(str(e), path=str(path))
        frame.columns = [str(c).strip() for c in frame.columns]
        missing = [c for c in required if c not in frame.columns]
        if missing:
            raise DatasetParseError(f"missing columns {missing}", path=str(path), line=1)
        frame["_line"] = np.arange(len(frame)) + 2
        return frame

    def _numeric(self, frame: pd.DataFrame, columns: Iterable[str], file: str, report: ValidationReport) -> pd.Series:
        """Coerce columns to numbers in place; returns a mask of rows that parsed."""
        ok = pd.Series(True, index=frame.index)
        for column in columns:
            raw = frame[column]
            values = pd.to_numeric(raw, errors="coerce")
            bad = values.isna() & raw.notna()
            for line, value in zip(frame.loc[bad, "_line"], raw[bad]):
                report.error(file, f"{column} '{value}' is not a number", int(line))
            frame[column] = values
            ok &= ~bad
        return ok

    def _parse_counties(self, report: ValidationReport) -> List[CountyRecord]:
        path = self._dir / "counties.csv"
        frame = self._read(path, COUNTY_COLUMNS, dtype={"fips": str, "state": str, "name": str})
        counties: List[CountyRecord] = []
        seen = set()
        for rec in frame.to_dict("records"):
            line = int(rec["_line"])
            try:
                county = CountyRecord(
                    fips=str(rec["fips"]).strip(),
                    state=rec["state"],
                    name=_clean(rec.get("name")),
                    lat=rec["lat"],
                    lon=float(normalize_longitudes([rec["lon"]])[0]) if _clean(rec["lon"]) is not None else None,
                    area_km2=rec["area_km2"],
                    pop2000=_clean(rec.get("pop2000")),
                    pop2010=rec["pop2010"],
                )
            except (ValidationError, TypeError, ValueError) as e:
                message = _first_error(e) if isinstance(e, ValidationError) else str(e)
                report.error(path.name, message, line)
                continue
            if county.fips in seen:
                report.error(path.name, f"duplicate county {county.fips}", line)
                continue
            seen.add(county.fips)
            if county.pop2000 is None:
                report.warn(path.name, f"county {county.fips} has no 2000 population; growth rate 0 is used", line)
            counties.append(county)
        return counties

    def _parse_national(self, report: ValidationReport) -> Dict[int, float]:
        path = self._dir / "national.csv"
        if not path.exists():
            report.warn(path.name, "no national reference; projection check skipped")
            return {}
        frame = self._read(path, NATIONAL_COLUMNS)
        ok = self._numeric(frame, NATIONAL_COLUMNS, path.name, report)
        national: Dict[int, float] = {}
        for year, population, line in zip(frame["year"][ok], frame["population"][ok], frame["_line"][ok]):
            if not population > 0:
                report.error(path.name, f"national population must be positive, got {population}", int(line))
                continue
            national[int(year)] = float(population)
        return national

    def _parse_gauges(self, report: ValidationReport) -> List[GaugeSeries]:
        path = self._dir / "gauges.csv"
        frame = self._read(path, GAUGE_COLUMNS, dtype={"gauge_id": str, "fips": str, "state": str, "huc": str})
        ok = self._numeric(frame, ["lat", "lon", "year", "month", "temp_c"], path.name, report)

        bad_month = ok & ~frame["month"].between(1, 12)
        bad_temp = ok & frame["temp_c"].notna() & ~frame["temp_c"].between(-5.0, 50.0)
        for line, month in zip(frame.loc[bad_month, "_line"], frame.loc[bad_month, "month"]):
            report.error(path.name, f"month {month} outside 1..12", int(line))
        for line, temp in zip(frame.loc[bad_temp, "_line"], frame.loc[bad_temp, "temp_c"]):
            report.error(path.name, f"temp_c {temp} outside [-5, 50] degC", int(line))
        frame = frame[ok & ~bad_month & ~bad_temp & frame["year"].notna()].copy()
        frame["lon"] = normalize_longitudes(frame["lon"])
        frame["t"] = [month_index(y, m) for y, m in zip(frame["year"], frame["month"])]

        gauges: List[GaugeSeries] = []
        for gauge_id, group in frame.groupby("gauge_id", sort=True):
            first_line = int(group["_line"].min())
            meta = group[["lat", "lon", "fips", "state"]].drop_duplicates()
            if len(meta) > 1:
                report.error(path.name, f"gauge {gauge_id} has inconsistent location or county", first_line)
                continue
            dupes = group["t"].duplicated()
            if dupes.any():
                report.error(path.name, f"gauge {gauge_id} repeats a month", int(group.loc[dupes, "_line"].iloc[0]))
                continue
            group = group.sort_values("t")
            huc = _clean(group["huc"].iloc[0]) if "huc" in group.columns else None
            try:
                gauges.append(
                    GaugeSeries(
                        gauge_id=str(gauge_id),
                        lat=float(group["lat"].iloc[0]),
                        lon=float(group["lon"].iloc[0]),
                        fips=str(group["fips"].iloc[0]).strip(),
                        state=str(group["state"].iloc[0]),
                        huc=huc,
                        times=[int(t) for t in group["t"]],
                        temps=[None if pd.isna(v) else float(v) for v in group["temp_c"]],
                    )
                )
            except ValidationError as e:
                report.error(path.name, f"gauge {gauge_id}: {_first_error(e)}", first_line)
        return gauges

    def _parse_plants(self, report: ValidationReport) -> List[PlantRecord]:
        path = self._dir / "plants.csv"
        frame = self._read(path, PLANT_COLUMNS, dtype={"plant_id": str, "fips": str, "state": str, "name": str, "fuel": str})
        plants: List[PlantRecord] = []
        seen = set()
        for rec in frame.to_dict("records"):
            line = int(rec["_line"])
            thermal = {c: float(rec[c]) for c in THERMAL_COLUMNS if _clean(rec.get(c)) is not None}
            try:
                plant = PlantRecord(
                    plant_id=str(rec["plant_id"]).strip(),
                    name=_clean(rec.get("name")) or "",
                    lat=rec["lat"],
                    lon=float(normalize_longitudes([rec["lon"]])[0]) if _clean(rec["lon"]) is not None else None,
                    fips=str(rec["fips"]).strip(),
                    state=rec["state"],
                    cooling=rec["cooling"],
                    fuel=_clean(rec.get("fuel")) or "",
                    nameplate_mw=rec["nameplate_mw"],
                    annual_gen_quad=_clean(rec.get("annual_gen_quad")),
                    capacity_factor=_clean(rec.get("capacity_factor")),
                    streamflow_m3s=_clean(rec.get("streamflow_m3s")),
                    thermal=thermal,
                )
            except (ValidationError, TypeError, ValueError) as e:
                message = _first_error(e) if isinstance(e, ValidationError) else str(e)
                report.error(path.name, message, line)
                continue
            if plant.plant_id in seen:
                report.error(path.name, f"duplicate plant {plant.plant_id}", line)
                continue
            seen.add(plant.plant_id)
            plants.append(plant)
        return plants

    def _parse_thresholds(self, report: ValidationReport) -> StateThresholds:
        path = self._dir / "thresholds.csv"
        return load_thresholds(path if path.exists() else None)

    def _parse_grids(self, report: ValidationReport) -> List[GriddedField]:
        grid_dir = self._dir / "grids"
        files = sorted(grid_dir.glob("*.csv")) if grid_dir.is_dir() else []
        if not files:
            raise DatasetParseError("no grid files", path=str(grid_dir))

        frames = []
        for path in files:
            frame = self._read(path, GRID_COLUMNS, dtype={"model": str, "scenario": str, "run": str, "variable": str})
            name = f"grids/{path.name}"
            frame["_file"] = name
            frame["_ok"] = self._numeric(frame, ["year", "month", "lat", "lon", "value"], name, report)
            frames.append(frame)
        frame = pd.concat(frames, ignore_index=True)
        ok = frame["_ok"].astype(bool)
        unknown = ok & ~frame["variable"].isin(list(UNITS))
        for file, line, variable in zip(frame.loc[unknown, "_file"], frame.loc[unknown, "_line"], frame.loc[unknown, "variable"]):
            report.error(file, f"unknown variable '{variable}'", int(line))
        missing = ok & frame["value"].isna()
        for file, line in zip(frame.loc[missing, "_file"], frame.loc[missing, "_line"]):
            report.error(file, "missing value", int(line))
        frame = frame[ok & ~unknown & ~missing].copy()
        frame["lon"] = normalize_longitudes(frame["lon"])

        fields: List[GriddedField] = []
        for (model, scenario, run, variable), group in frame.groupby(["model", "scenario", "run", "variable"], sort=True):
            field = self._grid_field(group, model, scenario, run, variable, report)
            if field is not None:
                fields.append(field)
        logger.info(f"Loaded {len(fields)} gridded fields from {len(files)} files")
        return fields

    def _grid_field(
        self, group: pd.DataFrame, model: str, scenario: str, run: str, variable: str, report: ValidationReport
    ) -> Optional[GriddedField]:
        file = str(group["_file"].iloc[0])
        first_line = int(group["_line"].iloc[0])
        tag = f"{model}/{scenario}/{run}/{variable}"

        lats = np.unique(group["lat"].to_numpy(dtype=float))
        lons = np.unique(group["lon"].to_numpy(dtype=float))
        for axis, nodes in (("latitude", lats), ("longitude", lons)):
            steps = np.diff(nodes)
            if nodes.size < 2 or not np.allclose(steps, steps[0], rtol=0, atol=1e-6):
                report.error(file, f"{tag}: irregular {axis} axis (or grid straddles the antimeridian)", first_line)
                return None

        years = group["year"].to_numpy(dtype=int)
        months = group["month"].to_numpy(dtype=int)
        if ((months < 1) | (months > 12)).any():
            report.error(file, f"{tag}: month outside 1..12", first_line)
            return None
        t = years * 12 + months - 1
        times = np.unique(t)
        if group.duplicated(subset=["year", "month", "lat", "lon"]).any():
            report.error(file, f"{tag}: duplicate grid node for a month", first_line)
            return None

        values = np.full((times.size, lats.size, lons.size), np.nan)
        values[
            np.searchsorted(times, t),
            np.searchsorted(lats, group["lat"].to_numpy(dtype=float)),
            np.searchsorted(lons, group["lon"].to_numpy(dtype=float)),
        ] = group["value"].to_numpy(dtype=float)
        if np.isnan(values).any():
            report.error(file, f"{tag}: {int(np.isnan(values).sum())} grid nodes missing", first_line)
            return None

        try:
            spec = GridSpec(
                lat_start=float(lats[0]), lat_step=float(lats[1] - lats[0]), lat_count=int(lats.size),
                lon_start=float(lons[0]), lon_step=float(lons[1] - lons[0]), lon_count=int(lons.size),
            )
            return GriddedField(
                spec=spec,
                variable=variable,
                units=UNITS[variable],
                times=tuple(int(x) for x in times),
                values=values,
                provenance=Provenance(model=model, scenario=scenario, run=run),
            )
        except ValidationError as e:
            report.error(file, f"{tag}: {_first_error(e)}", first_line)
            return None

    # ------------------------------------------------------------------
    # Cross-file checks
    # ------------------------------------------------------------------

    def _check_references(
        self,
        report: ValidationReport,
        *,
        fields: List[GriddedField],
        counties: List[CountyRecord],
        national: Dict[int, float],
        gauges: List[GaugeSeries],
        plants: List[PlantRecord],
        thresholds: StateThresholds,
    ) -> None:
        known = {c.fips for c in counties}
        for plant in plants:
            if plant.fips not in known:
                report.error("plants.csv", f"plant {plant.plant_id} refers to unknown county {plant.fips}")
        for gauge in gauges:
            if gauge.fips not in known:
                report.error("gauges.csv", f"gauge {gauge.gauge_id} refers to unknown county {gauge.fips}")

        members: Dict[tuple, set] = {}
        for f in fields:
            members.setdefault((f.provenance.scenario, f.provenance.model, f.provenance.run), set()).add(f.variable)
        for (scenario, model, run), variables in sorted(members.items()):
            if not {"precipitation", "evapotranspiration"} <= variables:
                report.error("grids", f"member {model}/{run} ({scenario}) lacks precipitation or evapotranspiration")
        if fields and not any(f.variable == "air_temperature" for f in fields):
            report.warn("grids", "no air temperature fields; stream temperature projections are skipped")

        if fields:
            spec = fields[0].spec
            for county in counties:
                if not contains(spec, county.lat, county.lon):
                    report.warn("counties.csv", f"county {county.fips} centroid lies outside the grid")

        states = sorted({g.state for g in gauges} - set(thresholds.thresholds))
        for state in states:
            report.warn("gauges.csv", f"no temperature limit for {state}; {thresholds.default_c} degC is used")
