"""
Synthetic mini-dataset for tests and demos.

The generated dataset is small (4 x 5 grid, six members, about a dozen
counties, eight gauges, ten plants) but exercises every stage:

* P - E is linear in latitude and longitude, so bilinear sampling at county
  centroids is exact and the expected water budget has a closed form. That
  closed form is written to ``truth.json`` next to the data.
* Two gauges carry a strong planted warming trend, one Pennsylvania gauge
  runs hot, the rest follow lagged air temperature closely.
* One dry-cooled plant sits in the most water-stressed county as a control.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from app.domain.models import Scenario
from app.storage.csv_dataset_manager import CsvDatasetManager

logger = logging.getLogger(__name__)

LATS = (30.0, 32.0, 34.0, 36.0)
LONS = (-100.0, -98.0, -96.0, -94.0, -92.0)
MODELS = ("CCSM4", "GISS-E2H", "MIROC5")
RUNS = ("r1i1p1", "r2i1p1")
RADIATION_RUN = "r1i1p1"

WATER_YEARS = (2008, 2042)
AIR_YEARS = (1998, 2042)
GAUGE_YEARS = (1998, 2012)

# Freshwater (mm/month): offset + LON_GRADIENT*(lon + 96) + LAT_GRADIENT*(lat - 33) + drift*(year - 2010) + season
LON_GRADIENT = 4.0
LAT_GRADIENT = -2.0
MEMBER_OFFSETS = (2.0, 3.5, 5.0, 6.0, 7.0, 8.5)
DRIFT = {"RCP8.5": -0.05, "RCP2.6": -0.01}
WARMING = {"RCP8.5": 0.04, "RCP2.6": 0.015}
AIR_MEMBER_OFFSETS = (-0.4, -0.2, 0.0, 0.1, 0.3, 0.5)

PER_CAPITA_M3 = 1700.0
MGAL_PER_MM_KM2 = 0.264172
MGAL_PER_PERSON = PER_CAPITA_M3 * 264.172e-6

WINDOW_YEARS = {"2010s": (2008, 2012), "2020s": (2018, 2022), "2030s": (2028, 2032), "2040s": (2038, 2042)}

STATES = (
    ("Texas", "48"), ("Louisiana", "22"), ("Pennsylvania", "42"), ("Kentucky", "21"),
    ("Indiana", "18"), ("South Carolina", "45"), ("Virginia", "51"), ("Ohio", "39"),
)
COUNTY_NAMES = (
    "Chambers", "Plaquemines Parish", "Adair", "Beaufort", "Berkeley", "Houston",
    "Cedar", "Fairview", "Lakeside", "Mill Creek", "Oak Ridge", "Pine Bluff",
    "Riverside", "Stone", "Walnut", "Willow",
)
DEMAND_RATIOS = (0.4, 0.7, 1.4, 0.9, 2.0, 0.6)

PLANTED_SLOPE_C_PER_YEAR = 1.0
HOT_OFFSET_C = 12.0


class SynthOptions(BaseModel):
    seed: int = 0
    counties: int = Field(default=12, ge=4, le=len(COUNTY_NAMES))
    gauges: int = Field(default=8, ge=4)
    plants: int = Field(default=10, ge=4)
    scenarios: List[Scenario] = Field(default_factory=lambda: ["RCP8.5"])


def _season(month: int) -> float:
    return 10.0 * math.cos(2.0 * math.pi * (month - 1) / 12.0)


def _freshwater_rate(offset: float, lat: float, lon: float, year: int, drift: float) -> float:
    return offset + LON_GRADIENT * (lon + 96.0) + LAT_GRADIENT * (lat - 33.0) + drift * (year - 2010)


def _air_temperature(lat: float, year: int, month: int, warming: float) -> float:
    return 15.0 - 10.0 * math.cos(2.0 * math.pi * (month - 1) / 12.0) - 0.6 * (lat - 33.0) + warming * (year - 1998)


def _months(years: Tuple[int, int]) -> List[Tuple[int, int]]:
    return [(y, m) for y in range(years[0], years[1] + 1) for m in range(1, 13)]


class SyntheticDatasetService:
    """Writes a synthetic dataset and its ground-truth sidecar."""

    def __init__(self, dataset_dir: Path, options: SynthOptions = SynthOptions()):
        self._dir = Path(dataset_dir)
        self._options = options
        self._store = CsvDatasetManager(self._dir)
        self._rng = np.random.default_rng(options.seed)

    def generate(self) -> Dict[str, Any]:
        opts = self._options
        counties = self._counties()
        gauges, gauge_rows, planted, hot = self._gauges(counties)
        plants, dry = self._plants(counties, gauges)

        for scenario in opts.scenarios:
            for index, (model, run) in enumerate((m, r) for m in MODELS for r in RUNS):
                for variable, frame in self._member_grids(scenario, model, run, index).items():
                    self._store.write_table(f"grids/{model}_{run}_{scenario}_{variable}.csv", frame)

        self._store.write_table("counties.csv", pd.DataFrame(counties)[
            ["fips", "state", "name", "lat", "lon", "area_km2", "pop2000", "pop2010"]
        ])
        self._store.write_table("national.csv", self._national(counties))
        self._store.write_table("gauges.csv", pd.DataFrame(gauge_rows))
        self._store.write_table("plants.csv", pd.DataFrame(plants))

        truth = {
            "seed": opts.seed,
            "scenarios": list(opts.scenarios),
            "planted_trends": [{"gauge_id": g, "slope_c_per_year": PLANTED_SLOPE_C_PER_YEAR} for g in planted],
            "hot_gauges": hot,
            "dry_plant_ids": dry,
            "outside_grid": [c["fips"] for c in counties if not c["inside"]],
            "expected_scarce": {s: self._expected_scarce(counties, s) for s in opts.scenarios},
        }
        (self._dir / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(
            f"Synthesized dataset in {self._dir}: {len(counties)} counties, {len(gauges)} gauges, "
            f"{len(plants)} plants, scenarios {list(opts.scenarios)}"
        )
        return truth

    # ------------------------------------------------------------------
    # Closed-form water budget
    # ------------------------------------------------------------------

    def _member_supplies(self, county: Dict[str, Any], scenario: str, window: str) -> List[float]:
        start, end = WINDOW_YEARS[window]
        center = (start + end) / 2.0
        return [
            12.0 * _freshwater_rate(a, county["lat"], county["lon"], center, DRIFT[scenario])
            * county["area_km2"] * MGAL_PER_MM_KM2
            for a in MEMBER_OFFSETS
        ]

    @staticmethod
    def _demand(county: Dict[str, Any], window: str) -> float:
        start, end = WINDOW_YEARS[window]
        years = (start + end) // 2 - 2010
        return county["pop2010"] * (1.0 + county["rate"]) ** years * MGAL_PER_PERSON

    def _expected_scarce(self, counties: Sequence[Dict[str, Any]], scenario: str) -> Dict[str, Dict[str, List[str]]]:
        expected: Dict[str, Dict[str, List[str]]] = {}
        for window in WINDOW_YEARS:
            by_stat: Dict[str, List[str]] = {"median": [], "min2": [], "p80": [], "max2": []}
            for county in counties:
                if not county["inside"]:
                    continue
                ordered = sorted(self._member_supplies(county, scenario, window))
                demand = self._demand(county, window)
                supply = {
                    "median": (ordered[2] + ordered[3]) / 2.0,
                    "min2": ordered[1],
                    "p80": ordered[4],
                    "max2": ordered[4],
                }
                for statistic, value in supply.items():
                    if value - demand < 0:
                        by_stat[statistic].append(county["fips"])
            expected[window] = {k: sorted(v) for k, v in by_stat.items()}
        return expected

    # ------------------------------------------------------------------
    # Tables
    # ------------------------------------------------------------------

    def _counties(self) -> List[Dict[str, Any]]:
        rng = self._rng
        counties: List[Dict[str, Any]] = []
        for i in range(self._options.counties):
            state, state_code = STATES[i % len(STATES)]
            inside = i != self._options.counties - 1
            lat = float(rng.uniform(30.5, 35.5)) if inside else 37.5
            lon = float(rng.uniform(-99.5, -92.5))
            area = float(rng.uniform(1500.0, 3000.0))
            rate = float(rng.uniform(0.005, 0.03))
            county = {
                "fips": f"{state_code}{i * 2 + 1:03d}",
                "state": state,
                "name": COUNTY_NAMES[i],
                "lat": round(lat, 4),
                "lon": round(lon, 4),
                "area_km2": round(area, 1),
                "rate": rate,
                "inside": inside,
            }
            median_supply = sorted(self._member_supplies(county, "RCP8.5", "2010s"))
            median_supply = (median_supply[2] + median_supply[3]) / 2.0
            if median_supply > 0:
                pop2010 = round(DEMAND_RATIOS[i % len(DEMAND_RATIOS)] * median_supply / MGAL_PER_PERSON)
            else:
                pop2010 = int(rng.integers(20_000, 200_000))
            county["pop2010"] = pop2010
            # The 2000 population implies the generator's growth rate exactly up to rounding.
            county["pop2000"] = None if i == 1 else pop2010 / (1.0 + rate) ** 10
            if i == 1:
                county["rate"] = 0.0
            counties.append(county)
        return counties

    def _national(self, counties: Sequence[Dict[str, Any]]) -> pd.DataFrame:
        rows = []
        for year in (2020, 2030, 2040):
            total = sum(c["pop2010"] * (1.0 + c["rate"]) ** (year - 2010) for c in counties)
            rows.append({"year": year, "population": round(total * 1.02)})
        return pd.DataFrame(rows)

    def _gauges(self, counties: Sequence[Dict[str, Any]]) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]], List[str], List[str]]:
        rng = self._rng
        inside = [c for c in counties if c["inside"]]
        pennsylvania = [c for c in inside if c["state"] == "Pennsylvania"]
        gauges: List[Dict[str, Any]] = []
        rows: List[Dict[str, Any]] = []
        planted: List[str] = []
        hot: List[str] = []
        for i in range(self._options.gauges):
            county = pennsylvania[0] if (i == 0 and pennsylvania) else inside[(i * 3) % len(inside)]
            gauge_id = f"0{8000000 + i * 1111:07d}"
            lat = round(min(max(county["lat"] + float(rng.uniform(-0.2, 0.2)), 30.2), 35.8), 4)
            lon = round(min(max(county["lon"] + float(rng.uniform(-0.2, 0.2)), -99.8), -92.2), 4)
            offset = HOT_OFFSET_C if i == 0 and pennsylvania else 0.0
            slope = PLANTED_SLOPE_C_PER_YEAR if i in (1, 2) else 0.0
            if offset:
                hot.append(gauge_id)
            if slope:
                planted.append(gauge_id)
            gauge = {"gauge_id": gauge_id, "lat": lat, "lon": lon, "fips": county["fips"], "state": county["state"]}
            gauges.append(gauge)

            months = _months(GAUGE_YEARS)
            gap_start = int(rng.integers(24, len(months) - 30))
            missing = set(range(gap_start, gap_start + 4)) | set(np.flatnonzero(rng.random(len(months)) < 0.04).tolist())
            air = [_air_temperature(lat, y, m, WARMING["RCP8.5"]) for y, m in months]
            for k, (year, month) in enumerate(months):
                lagged = 0.6 * air[k] + 0.25 * air[max(k - 1, 0)] + 0.1 * air[max(k - 2, 0)]
                temp = lagged + offset + slope * (k / 12.0) + float(rng.normal(0.0, 0.3))
                rows.append(
                    {
                        **gauge,
                        "huc": f"{3 + i % 10:02d}",
                        "year": year,
                        "month": month,
                        "temp_c": None if k in missing else round(min(max(temp, -5.0), 50.0), 3),
                    }
                )
        return gauges, rows, planted, hot

    def _plants(self, counties: Sequence[Dict[str, Any]], gauges: Sequence[Dict[str, Any]]) -> Tuple[List[Dict[str, Any]], List[str]]:
        rng = self._rng
        by_fips = {c["fips"]: c for c in counties}
        driest = min(
            (c for c in counties if c["inside"]),
            key=lambda c: sorted(self._member_supplies(c, "RCP8.5", "2010s"))[2] - self._demand(c, "2010s"),
        )
        coolings = ["once_through", "recirculating"] * ((self._options.plants - 1) // 2 + 1)
        plants: List[Dict[str, Any]] = []
        dry: List[str] = []
        for i in range(self._options.plants):
            plant_id = f"P{i + 1:03d}"
            if i == self._options.plants - 1:
                county, cooling = driest, "dry"
                lat, lon = county["lat"], county["lon"]
                dry.append(plant_id)
            else:
                gauge = gauges[i % len(gauges)]
                county = by_fips[gauge["fips"]]
                cooling = "hybrid" if i == self._options.plants - 2 else coolings[i]
                lat = round(gauge["lat"] + float(rng.uniform(-0.15, 0.15)), 4)
                lon = round(gauge["lon"] + float(rng.uniform(-0.15, 0.15)), 4)
            nameplate = float(rng.choice([250.0, 500.0, 800.0, 1200.0]))
            annual, cf = None, None
            if i % 3 == 0:
                annual = round(nameplate * 8760 * 0.7 * (3.6e9 / 1055.0) / 1e15, 6)
            elif i % 3 == 1:
                cf = round(float(rng.uniform(0.4, 0.9)), 3)
            plants.append(
                {
                    "plant_id": plant_id,
                    "name": f"{county['name']} Station {i + 1}",
                    "lat": lat,
                    "lon": lon,
                    "fips": county["fips"],
                    "state": county["state"],
                    "cooling": cooling,
                    "fuel": ["coal", "gas", "nuclear"][i % 3],
                    "nameplate_mw": nameplate,
                    "annual_gen_quad": annual,
                    "capacity_factor": cf,
                    "streamflow_m3s": round(float(rng.uniform(20.0, 200.0)), 2) if cooling == "once_through" else None,
                }
            )
        return plants, dry

    def _member_grids(self, scenario: str, model: str, run: str, index: int) -> Dict[str, pd.DataFrame]:
        rng = self._rng
        offset = MEMBER_OFFSETS[index]
        drift = DRIFT.get(scenario, DRIFT["RCP8.5"])
        warming = WARMING.get(scenario, WARMING["RCP8.5"])
        head = {"model": model, "scenario": scenario, "run": run}

        precipitation, evaporation = [], []
        for year, month in _months(WATER_YEARS):
            wet = 120.0 + 10.0 * math.sin(2.0 * math.pi * (month - 1) / 12.0)
            for lat in LATS:
                for lon in LONS:
                    fw = _freshwater_rate(offset, lat, lon, year, drift) + _season(month)
                    cell = {**head, "year": year, "month": month, "lat": lat, "lon": lon}
                    precipitation.append({**cell, "variable": "precipitation", "value": wet})
                    evaporation.append({**cell, "variable": "evapotranspiration", "value": wet - fw})

        air, longwave, shortwave = [], [], []
        for year, month in _months(AIR_YEARS):
            for lat in LATS:
                temp = _air_temperature(lat, year, month, warming) + AIR_MEMBER_OFFSETS[index]
                for lon in LONS:
                    cell = {**head, "year": year, "month": month, "lat": lat, "lon": lon}
                    value = temp + float(rng.normal(0.0, 0.2))
                    air.append({**cell, "variable": "air_temperature", "value": value})
                    if run == RADIATION_RUN:
                        sw = 200.0 - 80.0 * math.cos(2.0 * math.pi * (month - 1) / 12.0) - 2.0 * (lat - 33.0)
                        longwave.append({**cell, "variable": "rldscs", "value": 300.0 + 2.0 * value})
                        shortwave.append({**cell, "variable": "rsdscs", "value": sw + float(rng.normal(0.0, 3.0))})

        columns = ["model", "scenario", "run", "variable", "year", "month", "lat", "lon", "value"]
        grids = {
            "precipitation": pd.DataFrame(precipitation, columns=columns),
            "evapotranspiration": pd.DataFrame(evaporation, columns=columns),
            "air_temperature": pd.DataFrame(air, columns=columns),
        }
        if run == RADIATION_RUN:
            grids["rldscs"] = pd.DataFrame(longwave, columns=columns)
            grids["rsdscs"] = pd.DataFrame(shortwave, columns=columns)
        return grids
