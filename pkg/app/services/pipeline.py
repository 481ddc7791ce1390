"""
Pipeline orchestration: water budget, stream temperature trends and
projections, county risk reports and the yearly risk trend.

Each stage reads through a :class:`DatasetManager`, computes with the domain
modules and writes its artifacts through a :class:`ReportWriter`::

    <output>/config.json
    <output>/trends.csv
    <output>/<scenario>/waaci.csv, waaci_change.csv
    <output>/<scenario>/projections.csv, validation.csv, predictor_comparison.csv
    <output>/<scenario>/plant_capacity.csv, exceedance.csv
    <output>/<scenario>/risk_<window>_<statistic>.csv / .geojson
    <output>/<scenario>/risk_trend.csv, risk_trend.svg, summary.json

Per-county and per-gauge work is fanned out over a thread pool; results are
collected in input order and every merge is either sorted or an exactly
rounded sum, so the artifacts do not depend on the worker count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.domain.demography import PROJECTION_YEARS, demand_population, national_check, population_for_window, project_counties
from app.domain.ensemble import apply_statistic, member_statistic_series
from app.domain.errors import CoverageError, PowerRiskError
from app.domain.geogrid import common_grid, contains, sample_at_point, to_common_grid
from app.domain.mannkendall import historical_trends
from app.domain.models import (
    WINDOWS,
    CountyRecord,
    EnsembleSpec,
    GaugeProjection,
    GaugeSeries,
    GaugeTrend,
    GaugeValidation,
    GriddedField,
    GridSpec,
    PipelineConfig,
    RiskReport,
    RiskTrendPoint,
    WaaciRecord,
    index_year,
)
from app.domain.risk import build_report, exceedance_list, link_gauges, nearest_gauge, risk_trend
from app.domain.streamtemp import PREDICTOR_SETS, compare_predictor_sets, fit_gauge_model, project_gauge
from app.domain.thermal import efficiency_sensitivity, plant_thermal_spec, usable_capacity, wtsi
from app.domain.watersupply import (
    SIGNIFICANT_DRY_MGAL_YR,
    county_supply,
    exposure_change,
    freshwater,
    municipal_demand,
    to_volume,
    waaci_changes,
)
from app.services import reporting
from app.services.reporting import ReportWriter
from app.storage.dataset_manager import DatasetManager

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

BASELINE_WINDOW = "2010s"

# Gridded variable -> predictor variable name
DRIVER_VARIABLES: Dict[str, str] = {"air_temperature": "t_air", "rldscs": "rldscs", "rsdscs": "rsdscs"}

Member = Tuple[str, str]


class WaaciResult(BaseModel):
    """Water budget of one scenario."""

    scenario: str
    records: List[WaaciRecord] = Field(description="Ensemble-statistic records, sorted by (fips, window, statistic).")
    member_records: List[WaaciRecord] = Field(default_factory=list)
    yearly: Dict[str, Dict[int, Dict[str, float]]] = Field(
        default_factory=dict, description="member tag -> year -> fips -> WAACI (Mgal/year)."
    )
    counties_outside_grid: List[str] = Field(default_factory=list)


class ProjectionResult(BaseModel):
    """Stream temperature projections of one scenario."""

    scenario: str
    projections: List[GaugeProjection] = Field(default_factory=list)
    validations: List[GaugeValidation] = Field(default_factory=list)
    comparisons: List[Tuple[str, GaugeValidation]] = Field(default_factory=list)
    skipped_gauges: List[str] = Field(default_factory=list)


class _CountySupply(BaseModel):
    model_config = ConfigDict(frozen=True)

    fips: str
    window_supply: Dict[str, List[float]] = Field(default_factory=dict, description="window -> supply per member.")
    yearly_supply: Dict[str, Dict[int, float]] = Field(default_factory=dict, description="member -> year -> supply.")
    outside: bool = False


class PipelineService:
    """
    Runs the analysis stages for one dataset and configuration.
    """

    def __init__(self, dataset: DatasetManager, config: PipelineConfig, writer: Optional[ReportWriter] = None):
        self._dataset = dataset
        self._config = config
        self._writer = writer or ReportWriter(Path(config.output_dir))
        self._counties: Optional[List[CountyRecord]] = None
        self._members: Dict[str, Dict[Member, Dict[str, GriddedField]]] = {}
        self._targets: Dict[str, GridSpec] = {}
        self._freshwater: Dict[str, Dict[Member, GriddedField]] = {}
        self._ensembles: Dict[str, EnsembleSpec] = {}
        self._national: Dict[int, float] = {}

    @property
    def writer(self) -> ReportWriter:
        return self._writer

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        if self._config.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self._config.workers) as pool:
            return list(pool.map(fn, items))

    def write_config(self) -> None:
        self._writer.write_text("config.json", self._config.model_dump_json(indent=2) + "\n")

    def counties(self) -> List[CountyRecord]:
        if self._counties is None:
            self._counties = project_counties(self._dataset.get_counties(), PROJECTION_YEARS)
            reference = self._dataset.get_national()
            for year in PROJECTION_YEARS:
                if year in reference:
                    diff = national_check([c.projections[year] for c in self._counties], reference[year])
                    self._national[year] = diff
                    logger.info(f"County projections for {year} differ from the national reference by {diff:.2f}%")
        return self._counties

    def members(self, scenario: str) -> Dict[Member, Dict[str, GriddedField]]:
        """Fields of one scenario on the common grid, grouped by member."""
        if scenario not in self._members:
            fields = self._dataset.get_fields(scenario)
            if not fields:
                raise CoverageError(f"no gridded fields for scenario {scenario}", module="geogrid")
            target = self._config.target_grid or common_grid([f.spec for f in fields])
            grouped: Dict[Member, Dict[str, GriddedField]] = {}
            for field in to_common_grid(fields, target):
                grouped.setdefault(field.provenance.member, {})[field.variable] = field
            self._members[scenario] = dict(sorted(grouped.items()))
            self._ensembles[scenario] = EnsembleSpec(scenario=scenario, members=list(self._members[scenario]))
            self._targets[scenario] = target
            logger.info(f"{scenario}: {len(grouped)} members on a {target.lat_count}x{target.lon_count} grid")
        return self._members[scenario]

    def ensemble(self, scenario: str) -> EnsembleSpec:
        self.members(scenario)
        return self._ensembles[scenario]

    def freshwater_fields(self, scenario: str) -> Dict[Member, GriddedField]:
        """P - E field of each member, computed once per scenario."""
        if scenario not in self._freshwater:
            self._freshwater[scenario] = {
                member: freshwater(fields["precipitation"], fields["evapotranspiration"])
                for member, fields in self.members(scenario).items()
            }
        return self._freshwater[scenario]

    def _drivers_at(self, scenario: str, lat: float, lon: float) -> Dict[str, pd.Series]:
        """Ensemble-statistic predictor series (month-indexed) at a point."""
        members = self.members(scenario)
        drivers: Dict[str, pd.Series] = {}
        for variable, name in DRIVER_VARIABLES.items():
            fields = [fields_[variable] for fields_ in members.values() if variable in fields_]
            if not fields:
                continue
            common = sorted(set.intersection(*(set(f.times) for f in fields)))
            stack = np.vstack(
                [pd.Series(sample_at_point(f, lat, lon), index=list(f.times)).reindex(common).to_numpy() for f in fields]
            )
            drivers[name] = pd.Series(member_statistic_series(stack, self._config.predictor_statistic), index=common)
        return drivers

    # ------------------------------------------------------------------
    # Historical trends
    # ------------------------------------------------------------------

    def run_trends(self) -> List[GaugeTrend]:
        gauges = self._dataset.get_gauges()
        trends = historical_trends(gauges, alpha=self._config.alpha, min_record_years=self._config.min_record_years)
        self._writer.write_csv("trends.csv", reporting.trends_frame(trends))
        return trends

    # ------------------------------------------------------------------
    # Water budget
    # ------------------------------------------------------------------

    def _county_supply(self, scenario: str, county: CountyRecord) -> _CountySupply:
        target = self._targets[scenario]
        if not contains(target, county.lat, county.lon):
            return _CountySupply(fips=county.fips, outside=True)
        windows = [WINDOWS[w] for w in self._config.windows]
        window_supply: Dict[str, List[float]] = {w.label: [] for w in windows}
        yearly_supply: Dict[str, Dict[int, float]] = {}
        for (model, run), water in self.freshwater_fields(scenario).items():
            series = sample_at_point(water, county.lat, county.lon)
            for window in windows:
                window_supply[window.label].append(county_supply(water.times, series, window, county.area_km2))
            annual = pd.Series(series, index=[index_year(t) for t in water.times]).groupby(level=0).agg(["sum", "count"])
            yearly_supply[f"{model}/{run}"] = {
                int(year): to_volume(float(row["sum"]), county.area_km2) for year, row in annual.iterrows() if row["count"] == 12
            }
        return _CountySupply(fips=county.fips, window_supply=window_supply, yearly_supply=yearly_supply)

    def compute_waaci(self, scenario: str) -> WaaciResult:
        cfg = self._config
        counties = self.counties()
        self.freshwater_fields(scenario)
        supplies = self._map(lambda c: self._county_supply(scenario, c), counties)

        records: List[WaaciRecord] = []
        member_records: List[WaaciRecord] = []
        yearly: Dict[str, Dict[int, Dict[str, float]]] = {}
        outside: List[str] = []
        for county, supply in zip(counties, supplies):
            if supply.outside:
                outside.append(county.fips)
                logger.warning(f"County {county.fips} centroid outside the {scenario} grid; excluded")
                continue
            for label in cfg.windows:
                demand = municipal_demand(population_for_window(county, WINDOWS[label], cfg.demand_mode), cfg.per_capita_m3)
                values = supply.window_supply[label]
                for statistic in cfg.statistics:
                    records.append(
                        WaaciRecord.build(
                            fips=county.fips, window=label, scenario=scenario, statistic=statistic,
                            supply=apply_statistic(values, statistic), demand=demand,
                        )
                    )
                if cfg.include_members:
                    for tag, value in zip(supply.yearly_supply, values):
                        member_records.append(
                            WaaciRecord.build(
                                fips=county.fips, window=label, scenario=scenario, statistic=tag,
                                supply=value, demand=demand,
                            )
                        )
            for tag, by_year in supply.yearly_supply.items():
                for year, value in by_year.items():
                    demand = municipal_demand(demand_population(county, year, cfg.demand_mode), cfg.per_capita_m3)
                    yearly.setdefault(tag, {}).setdefault(year, {})[county.fips] = value - demand

        key = lambda r: (r.fips, r.window, r.statistic)  # noqa: E731
        return WaaciResult(
            scenario=scenario,
            records=sorted(records, key=key),
            member_records=sorted(member_records, key=key),
            yearly=yearly,
            counties_outside_grid=outside,
        )

    def run_waaci(self, scenario: str) -> WaaciResult:
        result = self.compute_waaci(scenario)
        all_records = result.records + result.member_records
        self._writer.write_csv(f"{scenario}/waaci.csv", reporting.waaci_frame(all_records))
        changes = waaci_changes(all_records, BASELINE_WINDOW)
        self._writer.write_csv(
            f"{scenario}/waaci_change.csv", reporting.waaci_change_frame(changes, SIGNIFICANT_DRY_MGAL_YR)
        )
        scarce = sum(r.stressed for r in result.records)
        logger.info(f"{scenario}: {len(result.records)} WAACI records, {scarce} water-stressed")
        return result

    # ------------------------------------------------------------------
    # Stream temperature projections
    # ------------------------------------------------------------------

    def _project_one(self, scenario: str, gauge: GaugeSeries) -> Tuple[Optional[GaugeValidation], List[GaugeProjection], List[Tuple[str, GaugeValidation]]]:
        cfg = self._config
        try:
            drivers = self._drivers_at(scenario, gauge.lat, gauge.lon)
            fitted = fit_gauge_model(
                gauge, drivers, PREDICTOR_SETS[cfg.predictor_model], cfg.train_years, cfg.test_years
            )
        except PowerRiskError as e:
            logger.warning(f"Skipping projection for gauge {gauge.gauge_id} [{e.module}]: {e}")
            return None, [], []

        maxima: Dict[str, float] = {}
        for label in cfg.windows:
            try:
                _, maxima[label] = project_gauge(fitted, drivers, WINDOWS[label])
            except PowerRiskError as e:
                logger.warning(f"Gauge {gauge.gauge_id} has no projection for {label}: {e}")
        baseline = maxima.get(BASELINE_WINDOW)
        projections = [
            GaugeProjection(
                gauge_id=gauge.gauge_id,
                fips=gauge.fips,
                state=gauge.state,
                window=label,
                max_temp_c=value,
                bias_c=fitted.validation.bias_c,
                max_temp_change_c=None if baseline is None else value - baseline,
            )
            for label, value in maxima.items()
        ]

        comparisons: List[Tuple[str, GaugeValidation]] = []
        if cfg.compare_predictors:
            try:
                comparisons = compare_predictor_sets(
                    gauge, drivers, PREDICTOR_SETS, cfg.train_years, cfg.test_years
                )
            except PowerRiskError as e:
                logger.warning(f"Predictor comparison failed for gauge {gauge.gauge_id}: {e}")
        return fitted.validation, projections, comparisons

    def compute_projections(self, scenario: str) -> ProjectionResult:
        members = self.members(scenario)
        result = ProjectionResult(scenario=scenario)
        if not any("air_temperature" in fields for fields in members.values()):
            logger.warning(f"{scenario}: no air temperature fields; stream temperature projections skipped")
            return result

        gauges = sorted(self._dataset.get_gauges(), key=lambda g: g.gauge_id)
        outcomes = self._map(lambda g: self._project_one(scenario, g), gauges)
        for gauge, (validation, projections, comparisons) in zip(gauges, outcomes):
            if validation is None:
                result.skipped_gauges.append(gauge.gauge_id)
                continue
            result.validations.append(validation)
            result.projections.extend(projections)
            result.comparisons.extend(comparisons)
        logger.info(
            f"{scenario}: projected {len(result.validations)} gauges ({len(result.skipped_gauges)} skipped)"
        )
        return result

    def run_projections(self, scenario: str) -> ProjectionResult:
        result = self.compute_projections(scenario)
        self._writer.write_csv(f"{scenario}/projections.csv", reporting.projections_frame(result.projections))
        self._writer.write_csv(f"{scenario}/validation.csv", reporting.validation_frame(result.validations))
        if self._config.compare_predictors:
            self._writer.write_csv(
                f"{scenario}/predictor_comparison.csv", reporting.comparison_frame(result.comparisons)
            )
        return result

    # ------------------------------------------------------------------
    # Plant derating
    # ------------------------------------------------------------------

    def _air_window_means(self, scenario: str, lat: float, lon: float) -> Dict[str, float]:
        """Ensemble air temperature averaged over each fully covered window at a point."""
        try:
            air = self._drivers_at(scenario, lat, lon).get("t_air")
        except PowerRiskError as e:
            logger.warning(f"No air temperature at ({lat}, {lon}): {e}")
            return {}
        if air is None:
            return {}
        means = {}
        for label in self._config.windows:
            values = air.reindex(WINDOWS[label].months)
            if not values.isna().any():
                means[label] = float(values.mean())
        return means

    def compute_plant_capacity(self, scenario: str, projections: ProjectionResult) -> List[Dict[str, Any]]:
        """Usable capacity of wet-cooled plants at their nearest gauge's projected window maximum."""
        cfg = self._config
        thresholds = self._dataset.get_thresholds()
        gauges = self._dataset.get_gauges()
        by_gauge: Dict[str, Dict[str, float]] = {}
        for p in projections.projections:
            by_gauge.setdefault(p.gauge_id, {})[p.window] = p.max_temp_c

        rows: List[Dict[str, Any]] = []
        for plant in sorted(self._dataset.get_plants(), key=lambda p: p.plant_id):
            if not plant.wet_cooled:
                continue
            gauge_id = nearest_gauge(plant, gauges, cfg.gauge_radius_km)
            maxima = by_gauge.get(gauge_id or "")
            if not maxima:
                continue
            spec = plant_thermal_spec(plant, cfg.thermal, {"t_max_c": thresholds.threshold_for(plant.state)})
            flow = plant.streamflow_m3s if plant.streamflow_m3s is not None else math.inf
            base_stream = maxima.get(BASELINE_WINDOW)
            air_means = self._air_window_means(scenario, plant.lat, plant.lon)
            base_air = air_means.get(BASELINE_WINDOW)
            for label in cfg.windows:
                if label not in maxima:
                    continue
                efficiency = None
                air = air_means.get(label)
                if base_stream is not None and base_air is not None and air is not None:
                    efficiency = efficiency_sensitivity(air - base_air, maxima[label] - base_stream)
                rows.append(
                    {
                        "plant_id": plant.plant_id,
                        "window": label,
                        "stream_temp_c": maxima[label],
                        "streamflow_m3s": plant.streamflow_m3s,
                        "usable_mw": usable_capacity(spec, maxima[label], flow) / 1e6,
                        "efficiency_change_pct": efficiency,
                    }
                )
        return rows

    # ------------------------------------------------------------------
    # Risk
    # ------------------------------------------------------------------

    def compute_risk(self, scenario: str, waaci: WaaciResult, projections: ProjectionResult) -> Tuple[List[RiskReport], Dict[str, list]]:
        cfg = self._config
        counties = self.counties()
        gauges = self._dataset.get_gauges()
        plants = self._dataset.get_plants()
        thresholds = self._dataset.get_thresholds()
        county_gauges = link_gauges(counties, gauges, plants, cfg.gauge_radius_km)
        names = {c.fips: c.label for c in counties}

        reports: List[RiskReport] = []
        exceedances: Dict[str, list] = {}
        for label in cfg.windows:
            unknown: set = set()
            window_projections = [p for p in projections.projections if p.window == label]
            gauge_wtsi = {p.gauge_id: wtsi(p.max_temp_c, p.state, thresholds, unknown) for p in window_projections}
            exceedances[label] = exceedance_list(window_projections, thresholds, label, names, unknown)
            if unknown:
                logger.warning(f"{scenario} {label}: default threshold used for {sorted(unknown)}")
            for statistic in cfg.statistics:
                waaci_by_fips = {
                    r.fips: r.waaci_mgal_yr for r in waaci.records if r.window == label and r.statistic == statistic
                }
                reports.append(
                    build_report(
                        window=label,
                        scenario=scenario,
                        statistic=statistic,
                        counties=counties,
                        waaci_by_fips=waaci_by_fips,
                        gauge_wtsi=gauge_wtsi,
                        county_gauges=county_gauges,
                        plants=plants,
                        exceedances=exceedances[label],
                        mode=cfg.aggregation_mode,
                        default_capacity_factor=cfg.default_capacity_factor,
                        counties_outside_grid=waaci.counties_outside_grid,
                        unknown_threshold_states=unknown,
                    )
                )
        return reports, exceedances

    def compute_risk_trend(self, waaci: WaaciResult) -> List[RiskTrendPoint]:
        return risk_trend(waaci.yearly, self._dataset.get_plants(), self._config.default_capacity_factor)

    def run_risk(self, scenario: str, waaci: WaaciResult, projections: ProjectionResult) -> List[RiskReport]:
        reports, exceedances = self.compute_risk(scenario, waaci, projections)
        for report in reports:
            stem = f"{scenario}/risk_{report.window}_{report.statistic}"
            self._writer.write_csv(f"{stem}.csv", reporting.report_frame(report))
            self._writer.write_json(f"{stem}.geojson", reporting.report_geojson(report))
        self._writer.write_csv(f"{scenario}/exceedance.csv", reporting.exceedance_frame(exceedances))
        self._writer.write_csv(
            f"{scenario}/plant_capacity.csv",
            reporting.plant_capacity_frame(self.compute_plant_capacity(scenario, projections)),
        )

        points = self.compute_risk_trend(waaci)
        self._writer.write_csv(f"{scenario}/risk_trend.csv", reporting.risk_trend_frame(points))
        self._writer.write_text(
            f"{scenario}/risk_trend.svg",
            reporting.render_risk_trend_svg(points, f"Wet-cooled generation at risk, {scenario}"),
        )
        self._writer.write_json(f"{scenario}/summary.json", self.summary(scenario, waaci, projections, reports))
        return reports

    def summary(
        self, scenario: str, waaci: WaaciResult, projections: ProjectionResult, reports: Iterable[RiskReport]
    ) -> Dict[str, Any]:
        exposure: Dict[str, Dict[str, float]] = {}
        for statistic in self._config.statistics:
            base = [r for r in waaci.records if r.window == BASELINE_WINDOW and r.statistic == statistic]
            if not base:
                continue
            exposure[statistic] = {
                label: exposure_change(base, [r for r in waaci.records if r.window == label and r.statistic == statistic])
                for label in self._config.windows
                if label != BASELINE_WINDOW
            }
        return {
            "scenario": scenario,
            "members": self.ensemble(scenario).tags,
            "reports": [
                {
                    "window": r.window,
                    "statistic": r.statistic,
                    "totals": r.totals.model_dump(),
                    "metadata": r.metadata.model_dump(),
                }
                for r in reports
            ],
            "exposure_change_pct": exposure,
            "national_check_pct": {str(year): diff for year, diff in sorted(self._national.items())},
            "gauges_projected": len(projections.validations),
            "gauges_skipped": projections.skipped_gauges,
        }

    # ------------------------------------------------------------------
    # Entry points
    # ------------------------------------------------------------------

    def run(self) -> Dict[str, List[RiskReport]]:
        """Every stage for every configured scenario."""
        self.write_config()
        self.run_trends()
        results: Dict[str, List[RiskReport]] = {}
        for scenario in self._config.scenarios:
            waaci = self.run_waaci(scenario)
            projections = self.run_projections(scenario)
            results[scenario] = self.run_risk(scenario, waaci, projections)
        logger.info(f"Wrote {len(self._writer.written)} artifacts to {self._writer.output_dir}")
        return results
