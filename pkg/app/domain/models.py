"""
Pydantic models for the power-production-at-risk pipeline.

This module defines the data models used throughout the application, including:
- Grid geometry and gridded climate fields with ensemble provenance
- County, stream gauge and power plant records
- Intermediate results (WAACI records, trend tests, fitted regressions)
- Risk reports and the pipeline configuration

All models use Pydantic for validation, serialization, and type safety.
Array-valued models (fields, fitted regressions) allow numpy arrays and are
frozen so they can be shared between worker threads.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


# ---------------------------------------------------------------------------
# Enumerations and calendar helpers
# ---------------------------------------------------------------------------


Variable = Literal[
    "precipitation",
    "evapotranspiration",
    "air_temperature",
    "rldscs",
    "rsdscs",
    "freshwater",
]
Scenario = Literal["RCP2.6", "RCP8.5"]
WindowLabel = Literal["2010s", "2020s", "2030s", "2040s"]
Statistic = Literal["median", "min2", "p80", "max2"]
CoolingClass = Literal["once_through", "recirculating", "dry", "hybrid"]
AggregationMode = Literal["conjunctive", "disjunctive"]
DemandMode = Literal["absolute", "change"]
TrendDirection = Literal["up", "down", "none"]

WET_COOLING: Tuple[str, ...] = ("once_through", "recirculating")


def month_index(year: int, month: int) -> int:
    """Ordinal month number used as the time axis everywhere (year*12 + month-1)."""
    return int(year) * 12 + int(month) - 1


def index_year(index: int) -> int:
    return int(index) // 12


def index_month(index: int) -> int:
    return int(index) % 12 + 1


# ---------------------------------------------------------------------------
# Grid models
# ---------------------------------------------------------------------------


class GridSpec(BaseModel):
    """
    Regular latitude/longitude grid.

    Latitudes ascend from ``lat_start`` in steps of ``lat_step``; longitudes
    ascend from ``lon_start`` and are stored in the [-180, 180) convention.
    """

    model_config = ConfigDict(frozen=True)

    lat_start: float = Field(description="Southernmost latitude (degrees).")
    lat_step: float = Field(gt=0, description="Latitude spacing (degrees).")
    lat_count: int = Field(ge=2, description="Number of latitude nodes.")
    lon_start: float = Field(description="Westernmost longitude (degrees, [-180, 180)).")
    lon_step: float = Field(gt=0, description="Longitude spacing (degrees).")
    lon_count: int = Field(ge=2, description="Number of longitude nodes.")

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if self.lat_start < -90 or self.lat_end > 90:
            raise ValueError(f"latitudes [{self.lat_start}, {self.lat_end}] outside [-90, 90]")
        if self.lon_start < -180 or self.lon_end >= 180:
            raise ValueError(f"longitudes [{self.lon_start}, {self.lon_end}] outside [-180, 180)")
        return self

    @property
    def lat_end(self) -> float:
        return self.lat_start + self.lat_step * (self.lat_count - 1)

    @property
    def lon_end(self) -> float:
        return self.lon_start + self.lon_step * (self.lon_count - 1)

    @property
    def lats(self) -> np.ndarray:
        return self.lat_start + self.lat_step * np.arange(self.lat_count)

    @property
    def lons(self) -> np.ndarray:
        return self.lon_start + self.lon_step * np.arange(self.lon_count)


class Provenance(BaseModel):
    """Ensemble member identity of a gridded field."""

    model_config = ConfigDict(frozen=True)

    model: str = Field(description="Climate model identifier, e.g. 'CCSM4'.")
    scenario: Scenario = Field(description="Emission scenario.")
    run: str = Field(description="Initial-condition run identifier, e.g. 'r1i1p1'.")

    @property
    def member(self) -> Tuple[str, str]:
        return (self.model, self.run)

    @property
    def tag(self) -> str:
        return f"{self.model}/{self.run}"


class GriddedField(BaseModel):
    """
    One climate variable on a regular grid with a monthly time axis.

    ``values`` has shape ``(time, lat, lon)``; ``times`` holds month ordinals
    (see :func:`month_index`) in strictly increasing order.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    variable: Variable
    units: str = Field(description="'mm/month' for water fluxes, 'degC' for temperature, 'W/m2' for radiation.")
    times: Tuple[int, ...]
    values: np.ndarray
    provenance: Provenance

    @model_validator(mode="after")
    def _check_values(self) -> "GriddedField":
        expected = (len(self.times), self.spec.lat_count, self.spec.lon_count)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != time x lat x lon {expected}")
        if np.isnan(self.values).any():
            raise ValueError("gridded values contain NaN")
        if self.variable == "precipitation" and (self.values < 0).any():
            raise ValueError("precipitation must be non-negative")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("time axis must be strictly increasing")
        return self


# ---------------------------------------------------------------------------
# Counties and population
# ---------------------------------------------------------------------------


class CountyRecord(BaseModel):
    """
    County identity, geometry summary and population history/projections.
    """

    fips: str = Field(pattern=r"^\d{5}$", description="Five-digit county FIPS code.")
    state: str = Field(description="State name.")
    name: Optional[str] = Field(default=None, description="County name, used in exceedance listings.")
    lat: float = Field(ge=-90, le=90, description="Centroid latitude (degrees).")
    lon: float = Field(ge=-180, lt=180, description="Centroid longitude (degrees).")
    area_km2: float = Field(ge=0, description="County land area (km2).")
    pop2000: Optional[float] = Field(default=None, ge=0, description="Census 2000 population.")
    pop2010: float = Field(ge=0, description="Census 2010 population.")
    growth_rate: Optional[float] = Field(default=None, description="Geometric annual growth rate 2000-2010 (fraction/year).")
    rate_flagged: bool = Field(default=False, description="True when no 2000 base population exists and rate 0 was used.")
    projections: Dict[int, float] = Field(default_factory=dict, description="Target year -> projected persons.")

    @property
    def label(self) -> str:
        return self.name or self.fips


# ---------------------------------------------------------------------------
# Water supply
# ---------------------------------------------------------------------------


class ClimatologyWindow(BaseModel):
    """Labelled five-year averaging window."""

    model_config = ConfigDict(frozen=True)

    label: WindowLabel
    start_year: int
    end_year: int

    @model_validator(mode="after")
    def _five_years(self) -> "ClimatologyWindow":
        if self.end_year - self.start_year != 4:
            raise ValueError("climatology windows span exactly five years")
        return self

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    @property
    def center_year(self) -> int:
        return self.start_year + 2

    @property
    def months(self) -> List[int]:
        return [month_index(y, m) for y in self.years for m in range(1, 13)]


WINDOWS: Dict[str, ClimatologyWindow] = {
    "2010s": ClimatologyWindow(label="2010s", start_year=2008, end_year=2012),
    "2020s": ClimatologyWindow(label="2020s", start_year=2018, end_year=2022),
    "2030s": ClimatologyWindow(label="2030s", start_year=2028, end_year=2032),
    "2040s": ClimatologyWindow(label="2040s", start_year=2038, end_year=2042),
}


class WaaciRecord(BaseModel):
    """County water budget for one window and one member or ensemble statistic."""

    model_config = ConfigDict(frozen=True)

    fips: str
    window: WindowLabel
    scenario: Scenario
    statistic: str = Field(description="Ensemble statistic tag ('median', 'min2', ...) or member tag 'model/run'.")
    supply_mgal_yr: float
    demand_mgal_yr: float
    waaci_mgal_yr: float

    @model_validator(mode="after")
    def _budget(self) -> "WaaciRecord":
        if self.waaci_mgal_yr != self.supply_mgal_yr - self.demand_mgal_yr:
            raise ValueError("waaci must equal supply - demand")
        return self

    @classmethod
    def build(cls, *, fips: str, window: str, scenario: str, statistic: str,
              supply: float, demand: float) -> "WaaciRecord":
        return cls(
            fips=fips,
            window=window,
            scenario=scenario,
            statistic=statistic,
            supply_mgal_yr=supply,
            demand_mgal_yr=demand,
            waaci_mgal_yr=supply - demand,
        )

    @computed_field
    @property
    def stressed(self) -> bool:
        return self.waaci_mgal_yr < 0


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


class EnsembleSpec(BaseModel):
    """Members (model, initial-condition) of one scenario's ensemble."""

    scenario: Scenario
    members: List[Tuple[str, str]]

    @field_validator("members")
    @classmethod
    def _members_unique(cls, members: List[Tuple[str, str]]) -> List[Tuple[str, str]]:
        if not members:
            raise ValueError("an ensemble needs at least one member")
        if len(set(members)) != len(members):
            raise ValueError("ensemble members must be unique")
        return members

    @property
    def tags(self) -> List[str]:
        return [f"{model}/{run}" for model, run in self.members]


# ---------------------------------------------------------------------------
# Stream temperature
# ---------------------------------------------------------------------------


class GaugeSeries(BaseModel):
    """
    Monthly stream temperature record of one gauge. ``temps`` holds ``None``
    for months without an observation.
    """

    gauge_id: str
    lat: float = Field(ge=-90, le=90)
    lon: float = Field(ge=-180, lt=180)
    fips: str = Field(pattern=r"^\d{5}$")
    state: str
    huc: Optional[str] = Field(default=None, description="Two-digit hydrologic unit code of the gauge's region.")
    times: List[int] = Field(description="Month ordinals, strictly increasing.")
    temps: List[Optional[float]] = Field(description="Temperatures (degC); None marks a gap.")

    @model_validator(mode="after")
    def _check_series(self) -> "GaugeSeries":
        if len(self.times) != len(self.temps):
            raise ValueError("times and temps differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("gauge months must be strictly increasing")
        for t in self.temps:
            if t is not None and not (-5.0 <= t <= 50.0):
                raise ValueError(f"stream temperature {t} outside [-5, 50] degC")
        return self

    @property
    def record_years(self) -> int:
        return len({index_year(m) for m, t in zip(self.times, self.temps) if t is not None})

    @property
    def observed(self) -> List[Tuple[int, float]]:
        return [(m, t) for m, t in zip(self.times, self.temps) if t is not None]


PredictorVariable = Literal["t_air", "rldscs", "rsdscs"]

_MAX_LAG: Dict[str, int] = {"t_air": 2, "rldscs": 1, "rsdscs": 1}


class PredictorTerm(BaseModel):
    """One lagged predictor column, e.g. ``t_air(t-1)``."""

    model_config = ConfigDict(frozen=True)

    variable: PredictorVariable
    lag: int = Field(ge=0, le=2)

    @model_validator(mode="after")
    def _lag_allowed(self) -> "PredictorTerm":
        if self.lag > _MAX_LAG[self.variable]:
            raise ValueError(f"{self.variable} supports lags up to {_MAX_LAG[self.variable]}")
        return self

    @property
    def name(self) -> str:
        return f"{self.variable}(t)" if self.lag == 0 else f"{self.variable}(t-{self.lag})"


class PredictorSpec(BaseModel):
    """Predictor set and forecast lead for the stream temperature regression."""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[PredictorTerm, ...]
    lead: int = Field(default=0, ge=0, description="Forecast lead time (months).")

    @field_validator("terms")
    @classmethod
    def _non_empty(cls, terms: Tuple[PredictorTerm, ...]) -> Tuple[PredictorTerm, ...]:
        if not terms:
            raise ValueError("predictor set must not be empty")
        if len(set(terms)) != len(terms):
            raise ValueError("predictor terms must be unique")
        return terms

    @classmethod
    def of(cls, *names: str, lead: int = 0) -> "PredictorSpec":
        """Build from names like ``"t_air(t)"`` or ``"rsdscs(t-1)"``."""
        terms = []
        for name in names:
            variable, _, rest = name.partition("(")
            rest = rest.rstrip(")")
            lag = 0 if rest == "t" else int(rest.split("-")[1])
            terms.append(PredictorTerm(variable=variable, lag=lag))
        return cls(terms=tuple(terms), lead=lead)

    @property
    def names(self) -> List[str]:
        return [t.name for t in self.terms]

    @property
    def variables(self) -> List[str]:
        return sorted({t.variable for t in self.terms})

    @property
    def max_lag(self) -> int:
        return max(t.lag for t in self.terms)


class FeatureScaler(BaseModel):
    """Column means and scales from the training rows."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    scale: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale


class LssvmModel(BaseModel):
    """Fitted least-squares support vector regression."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sigma: float = Field(gt=0, description="RBF kernel bandwidth.")
    gamma: float = Field(gt=0, description="Regularization constant.")
    alpha: np.ndarray = Field(description="Support coefficients, one per training row.")
    b: float = Field(description="Intercept.")
    x_train: np.ndarray = Field(description="Training rows in (scaled) feature space.")
    scaler: Optional[FeatureScaler] = Field(default=None, description="Scaling applied to raw features, if any.")

    @model_validator(mode="after")
    def _shapes(self) -> "LssvmModel":
        if self.alpha.shape[0] != self.x_train.shape[0]:
            raise ValueError("one support coefficient per training row is required")
        return self

    @property
    def n_features(self) -> int:
        return int(self.x_train.shape[1])


class TrendResult(BaseModel):
    """Mann-Kendall test outcome."""

    model_config = ConfigDict(frozen=True)

    n: int
    s: int = Field(description="Mann-Kendall S statistic.")
    var_s: float = Field(description="Tie-corrected variance of S.")
    var_s_corrected: float = Field(description="Variance after the autocorrelation correction.")
    correction_factor: float = Field(description="Effective sample size ratio n/n* applied to var_s.")
    z: float
    p: float = Field(description="Two-sided p-value using the corrected variance.")
    p_uncorrected: float = Field(description="Two-sided p-value using the tie-corrected variance only.")
    alpha: float
    direction: TrendDirection
    significant: bool

    @model_validator(mode="after")
    def _consistent(self) -> "TrendResult":
        if self.significant != (self.p < self.alpha):
            raise ValueError("significance must equal p < alpha")
        sign = (self.s > 0) - (self.s < 0)
        if {1: "up", -1: "down", 0: "none"}[sign] != self.direction:
            raise ValueError("direction must match sign(S)")
        return self


class GaugeTrend(BaseModel):
    """Historical trend of one gauge together with its record span."""

    gauge_id: str
    state: str
    fips: str
    huc: Optional[str] = None
    start_year: int
    end_year: int
    n_years: int
    trend: TrendResult


class GaugeValidation(BaseModel):
    """Skill of one gauge's regression over the training and validation periods."""

    gauge_id: str
    predictors: List[str]
    sigma: float
    gamma: float
    nse_train: float
    r_train: float
    nse_test: float
    r_test: float
    bias_c: float = Field(description="Mean (predicted - observed) over the validation months.")


class GaugeProjection(BaseModel):
    """Bias-corrected projected maximum stream temperature for one window."""

    gauge_id: str
    fips: str
    state: str
    window: WindowLabel
    max_temp_c: float
    bias_c: float
    max_temp_change_c: Optional[float] = Field(default=None, description="Change relative to the 2010s window maximum.")


# ---------------------------------------------------------------------------
# Thermal physics
# ---------------------------------------------------------------------------


DEFAULT_THRESHOLD_C = 32.2


class StateThresholds(BaseModel):
    """State -> allowable stream temperature (degC); other states use the default."""

    thresholds: Dict[str, float] = Field(default_factory=dict)
    default_c: float = DEFAULT_THRESHOLD_C

    def is_known(self, state: str) -> bool:
        return state in self.thresholds

    def threshold_for(self, state: str) -> float:
        return self.thresholds.get(state, self.default_c)


class ThermalDefaults(BaseModel):
    """
    Plant parameters used when the inventory does not carry them.

    These are engineering placeholders for a generic steam plant, not
    values taken from any particular plant.
    """

    eta_total: float = Field(default=0.40, gt=0, le=1)
    eta_elec: float = Field(default=0.40, gt=0, le=1)
    alpha_heat: float = Field(default=0.1, ge=0, le=1, description="Waste-heat share not discharged to cooling water.")
    beta_air: float = Field(default=0.2, ge=0, le=1, description="Waste-heat share released to air (recirculating).")
    omega: float = Field(default=1.0, gt=0, description="Air temperature / humidity correction.")
    epsilon: float = Field(default=1.0, gt=0, description="Blowdown densification factor.")
    lambda_eff: float = Field(default=1.0, gt=0, description="Efficiency correction factor.")
    gamma_flow: float = Field(default=0.3, ge=0, le=1, description="Maximum usable fraction of streamflow.")
    dt_max_k: float = Field(default=10.0, gt=0, description="Maximum permissible temperature rise (K).")
    t_max_c: float = Field(default=DEFAULT_THRESHOLD_C, description="Maximum permissible intake temperature (degC).")


class PlantThermalSpec(BaseModel):
    """Cooling-water physics parameters of one plant, SI units."""

    model_config = ConfigDict(frozen=True)

    capacity_w: float = Field(gt=0, description="Installed capacity (W).")
    eta_total: float = Field(gt=0, le=1)
    eta_elec: float = Field(gt=0, le=1)
    alpha_heat: float = Field(ge=0, le=1)
    beta_air: float = Field(ge=0, le=1)
    omega: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    lambda_eff: float = Field(gt=0)
    dt_max_k: float = Field(gt=0)
    t_max_c: float
    gamma_flow: float = Field(ge=0, le=1)
    rho_w: float = 1000.0
    c_p: float = 4186.0
    cooling: CoolingClass = "once_through"


# ---------------------------------------------------------------------------
# Plants and risk
# ---------------------------------------------------------------------------


class PlantRecord(BaseModel):
    """Thermoelectric plant from the inventory."""

    plant_id: str
    name: str = ""
    lat: float = Field(ge=-90, le=90)
    lon: float = Field(ge=-180, lt=180)
    fips: str = Field(pattern=r"^\d{5}$")
    state: str
    cooling: CoolingClass
    fuel: str = ""
    nameplate_mw: float = Field(gt=0)
    annual_gen_quad: Optional[float] = Field(default=None, ge=0)
    capacity_factor: Optional[float] = Field(default=None, gt=0, le=1)
    streamflow_m3s: Optional[float] = Field(default=None, ge=0, description="Natural streamflow at the intake.")
    thermal: Dict[str, float] = Field(default_factory=dict, description="Optional per-plant thermal parameter overrides.")

    @property
    def wet_cooled(self) -> bool:
        return self.cooling in WET_COOLING


class CountyClassification(BaseModel):
    model_config = ConfigDict(frozen=True)

    water_scarce: bool
    temp_stressed: bool
    no_gauge: bool = False


class CountyRiskRow(BaseModel):
    fips: str
    state: str
    name: Optional[str] = None
    lat: float
    lon: float
    waaci: float
    water_scarce: bool
    temp_stressed: bool
    no_gauge: bool
    capacity_at_risk: float = Field(description="Annual generation (quad/year) of wet-cooled plants at risk in this county.")


class ExceedanceEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: str
    county: str
    fips: str


class RiskTotals(BaseModel):
    scarce_county_count: int
    temp_stressed_county_count: int
    exceed_county_list: List[ExceedanceEntry]
    total_quads_at_risk: float
    total_quads_conjunctive: float
    total_quads_disjunctive: float


class ReportMetadata(BaseModel):
    aggregation_mode: AggregationMode
    default_capacity_factor: float
    plants_using_default_capacity_factor: int = 0
    counties_outside_grid: List[str] = Field(default_factory=list)
    counties_without_gauge: int = 0
    unknown_threshold_states: List[str] = Field(default_factory=list)


class RiskReport(BaseModel):
    """Per-county stress classification and aggregated capacity at risk."""

    window: WindowLabel
    scenario: Scenario
    statistic: str
    rows: List[CountyRiskRow]
    totals: RiskTotals
    metadata: ReportMetadata

    @model_validator(mode="after")
    def _unique_counties(self) -> "RiskReport":
        fips = [r.fips for r in self.rows]
        if len(set(fips)) != len(fips):
            raise ValueError("a county may appear at most once in a report")
        return self


class RiskTrendPoint(BaseModel):
    year: int
    mean_quads: float
    sigma_quads: float
    members: int
    single_member: bool = False

    @property
    def lower(self) -> float:
        return self.mean_quads - self.sigma_quads

    @property
    def upper(self) -> float:
        return self.mean_quads + self.sigma_quads


# ---------------------------------------------------------------------------
# Pipeline configuration
# ---------------------------------------------------------------------------


class PipelineConfig(BaseModel):
    """
    Effective configuration of one pipeline run.

    Defaults follow the values published for the method where one exists;
    every field can be overridden from a YAML file or the command line.
    Persisted next to the artifacts as ``config.json``.
    """

    dataset_dir: str = Field(default="data/dataset", description="Directory holding the input CSV files.")
    output_dir: str = Field(default="data/runs/latest", description="Directory receiving the artifacts.")
    scenarios: List[Scenario] = Field(default_factory=lambda: ["RCP8.5"], description="Scenarios to evaluate.")
    statistics: List[Statistic] = Field(default_factory=lambda: ["median"], description="Ensemble statistics for WAACI.")
    windows: List[WindowLabel] = Field(
        default_factory=lambda: ["2010s", "2020s", "2030s", "2040s"],
        description="Climatology windows to evaluate.",
    )
    per_capita_m3: float = Field(default=1700.0, ge=0, description="Municipal water demand per capita (m3/year).")
    demand_mode: DemandMode = Field(default="absolute", description="'absolute' projected population or 'change' since 2010.")
    alpha: float = Field(default=0.10, gt=0, lt=1, description="Significance level of the trend test.")
    min_record_years: int = Field(default=7, ge=1, description="Minimum record length for trend analysis.")
    gauge_radius_km: float = Field(default=100.0, gt=0, description="Plant-to-gauge link radius.")
    aggregation_mode: AggregationMode = Field(default="disjunctive", description="How scarcity and heat combine.")
    default_capacity_factor: float = Field(default=0.6, gt=0, le=1, description="Placeholder CF when generation is absent.")
    predictor_model: Literal["model1", "model2", "model3", "model4"] = Field(default="model4")
    predictor_statistic: Literal["median", "p80"] = Field(default="median", description="Ensemble statistic of the air-temperature predictor.")
    compare_predictors: bool = Field(default=False, description="Also score predictor sets 1-4 per gauge.")
    include_members: bool = Field(default=False, description="Emit per-member WAACI rows in addition to statistics.")
    train_years: Tuple[int, int] = Field(default=(1998, 2007))
    test_years: Tuple[int, int] = Field(default=(2008, 2012))
    target_grid: Optional[GridSpec] = Field(default=None, description="Common grid for members; derived when absent.")
    thermal: ThermalDefaults = Field(default_factory=ThermalDefaults)
    workers: int = Field(default=1, ge=1, description="Thread pool size for per-gauge and per-county work.")
    seed: int = Field(default=0, description="Seed for synthetic data generation.")

    @field_validator("statistics", "windows", "scenarios")
    @classmethod
    def _non_empty_unique(cls, values: list) -> list:
        if not values:
            raise ValueError("at least one value is required")
        return list(dict.fromkeys(values))


# ---------------------------------------------------------------------------
# Dataset validation
# ---------------------------------------------------------------------------


class ValidationIssue(BaseModel):
    file: str
    line: Optional[int] = Field(default=None, description="1-based line in the file (header is line 1).")
    message: str

    def __str__(self) -> str:
        location = f"{self.file}:{self.line}" if self.line is not None else self.file
        return f"{location}: {self.message}"


class ValidationReport(BaseModel):
    """Outcome of dataset validation; warnings never fail a run."""

    dataset_dir: str
    errors: List[ValidationIssue] = Field(default_factory=list)
    warnings: List[ValidationIssue] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, file: str, message: str, line: Optional[int] = None) -> None:
        self.errors.append(ValidationIssue(file=file, line=line, message=message))

    def warn(self, file: str, message: str, line: Optional[int] = None) -> None:
        self.warnings.append(ValidationIssue(file=file, line=line, message=message))
