"""
Artifact emission: CSV tables via pandas, GeoJSON point collections and the
self-contained SVG risk-trend chart rendered from a Jinja2 template.

All writers produce byte-stable output for identical inputs: fixed column
order, fixed float format, sorted JSON keys and ``\\n`` line endings.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from app.domain.models import (
    ExceedanceEntry,
    GaugeProjection,
    GaugeTrend,
    GaugeValidation,
    RiskReport,
    RiskTrendPoint,
    WaaciRecord,
)

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"
FLOAT_FORMAT = "%.10g"

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=select_autoescape(enabled_extensions=("html", "j2")),
    keep_trailing_newline=True,
)


class ReportWriter:
    """Writes artifacts below one output directory and remembers what it wrote."""

    def __init__(self, output_dir: Path):
        self._dir = Path(output_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self.written: List[str] = []

    @property
    def output_dir(self) -> Path:
        return self._dir

    def _target(self, relative_path: str) -> Path:
        path = self._dir / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(relative_path)
        return path

    def write_csv(self, relative_path: str, frame: pd.DataFrame) -> Path:
        path = self._target(relative_path)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.debug(f"Wrote {path} ({len(frame)} rows)")
        return path

    def write_json(self, relative_path: str, payload: Any) -> Path:
        path = self._target(relative_path)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_text(self, relative_path: str, text: str) -> Path:
        path = self._target(relative_path)
        path.write_text(text, encoding="utf-8", newline="\n")
        return path


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


TREND_COLUMNS = ["gauge_id", "S", "Z", "p", "direction", "significant", "state", "fips", "huc", "start_year", "end_year", "n_years"]
WAACI_COLUMNS = [
    "fips", "window", "scenario", "statistic", "supply_mgal_yr", "demand_mgal_yr", "waaci_mgal_yr", "stressed",
]
WAACI_CHANGE_COLUMNS = [
    "fips", "window", "scenario", "statistic",
    "baseline_mgal_yr", "waaci_mgal_yr", "change_mgal_yr", "significant_dry",
]
PROJECTION_COLUMNS = ["gauge_id", "window", "max_temp_c", "bias_c", "max_temp_change_c"]
VALIDATION_COLUMNS = ["gauge_id", "nse_train", "r_train", "nse_test", "r_test", "bias_c"]
COMPARISON_COLUMNS = ["gauge_id", "model", "predictors", "nse_train", "r_train", "nse_test", "r_test"]
PLANT_CAPACITY_COLUMNS = ["plant_id", "window", "stream_temp_c", "streamflow_m3s", "usable_mw", "efficiency_change_pct"]
REPORT_COLUMNS = ["fips", "state", "name", "lat", "lon", "waaci", "water_scarce", "temp_stressed", "no_gauge", "capacity_at_risk"]
EXCEEDANCE_COLUMNS = ["window", "state", "county", "fips"]
RISK_TREND_COLUMNS = ["year", "mean_quads", "sigma_quads", "lower", "upper", "members", "single_member"]


def _frame(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def trends_frame(trends: Iterable[GaugeTrend]) -> pd.DataFrame:
    return _frame(
        (
            {
                "gauge_id": t.gauge_id,
                "S": t.trend.s,
                "Z": t.trend.z,
                "p": t.trend.p,
                "direction": t.trend.direction,
                "significant": t.trend.significant,
                "state": t.state,
                "fips": t.fips,
                "huc": t.huc or "",
                "start_year": t.start_year,
                "end_year": t.end_year,
                "n_years": t.n_years,
            }
            for t in trends
        ),
        TREND_COLUMNS,
    )


def waaci_frame(records: Iterable[WaaciRecord]) -> pd.DataFrame:
    return _frame((r.model_dump() for r in records), WAACI_COLUMNS)


def waaci_change_frame(pairs: Iterable[Tuple[WaaciRecord, WaaciRecord, float]], significant_dry: float) -> pd.DataFrame:
    return _frame(
        (
            {
                "fips": record.fips,
                "window": record.window,
                "scenario": record.scenario,
                "statistic": record.statistic,
                "baseline_mgal_yr": base.waaci_mgal_yr,
                "waaci_mgal_yr": record.waaci_mgal_yr,
                "change_mgal_yr": change,
                "significant_dry": record.waaci_mgal_yr <= significant_dry,
            }
            for record, base, change in pairs
        ),
        WAACI_CHANGE_COLUMNS,
    )


def projections_frame(projections: Iterable[GaugeProjection]) -> pd.DataFrame:
    return _frame((p.model_dump() for p in projections), PROJECTION_COLUMNS)


def validation_frame(validations: Iterable[GaugeValidation]) -> pd.DataFrame:
    return _frame((v.model_dump() for v in validations), VALIDATION_COLUMNS)


def comparison_frame(rows: Iterable[Tuple[str, GaugeValidation]]) -> pd.DataFrame:
    return _frame(
        (
            {
                "gauge_id": v.gauge_id,
                "model": label,
                "predictors": " ".join(v.predictors),
                "nse_train": v.nse_train,
                "r_train": v.r_train,
                "nse_test": v.nse_test,
                "r_test": v.r_test,
            }
            for label, v in rows
        ),
        COMPARISON_COLUMNS,
    )


def plant_capacity_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    return _frame(rows, PLANT_CAPACITY_COLUMNS)


def report_frame(report: RiskReport) -> pd.DataFrame:
    return _frame((r.model_dump() for r in report.rows), REPORT_COLUMNS)


def exceedance_frame(by_window: Mapping[str, Sequence[ExceedanceEntry]]) -> pd.DataFrame:
    return _frame(
        ({"window": window, **e.model_dump()} for window in sorted(by_window) for e in by_window[window]),
        EXCEEDANCE_COLUMNS,
    )


def risk_trend_frame(points: Iterable[RiskTrendPoint]) -> pd.DataFrame:
    return _frame(
        (
            {
                "year": p.year,
                "mean_quads": p.mean_quads,
                "sigma_quads": p.sigma_quads,
                "lower": p.lower,
                "upper": p.upper,
                "members": p.members,
                "single_member": p.single_member,
            }
            for p in points
        ),
        RISK_TREND_COLUMNS,
    )


# ---------------------------------------------------------------------------
# GeoJSON
# ---------------------------------------------------------------------------


def report_geojson(report: RiskReport) -> Dict[str, Any]:
    """One point feature per county centroid; totals and metadata as foreign members."""
    features = [
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [row.lon, row.lat]},
            "properties": {
                "fips": row.fips,
                "state": row.state,
                "name": row.name,
                "waaci": row.waaci,
                "water_scarce": row.water_scarce,
                "temp_stressed": row.temp_stressed,
                "no_gauge": row.no_gauge,
                "capacity_at_risk": row.capacity_at_risk,
            },
        }
        for row in report.rows
    ]
    return {
        "type": "FeatureCollection",
        "features": features,
        "window": report.window,
        "scenario": report.scenario,
        "statistic": report.statistic,
        "totals": report.totals.model_dump(),
        "metadata": report.metadata.model_dump(),
    }


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def render_risk_trend_svg(points: Sequence[RiskTrendPoint], title: str, width: int = 640, height: int = 360) -> str:
    """Line chart of the member-mean at-risk generation with a +/- 1 sigma band."""
    left, right, top, bottom = 70, width - 20, 30, height - 40
    context: Dict[str, Any] = {
        "title": title, "width": width, "height": height,
        "left": left, "right": right, "top": top, "bottom": bottom,
        "line": "", "band": "", "x_ticks": [], "y_ticks": [], "note": "",
    }
    if points:
        years = [p.year for p in points]
        y_max = max(p.upper for p in points)
        y_max = y_max * 1.1 if y_max > 0 else 1.0
        x_span = max(years[-1] - years[0], 1)

        def sx(year: float) -> float:
            return left + (year - years[0]) / x_span * (right - left)

        def sy(value: float) -> float:
            return bottom - max(value, 0.0) / y_max * (bottom - top)

        context["line"] = " ".join(f"{_fmt(sx(p.year))},{_fmt(sy(p.mean_quads))}" for p in points)
        upper = [f"{_fmt(sx(p.year))},{_fmt(sy(p.upper))}" for p in points]
        lower = [f"{_fmt(sx(p.year))},{_fmt(sy(p.lower))}" for p in reversed(points)]
        context["band"] = " ".join(upper + lower)
        step = 5 if x_span >= 10 else 1
        context["x_ticks"] = [
            {"x": round(sx(y), 2), "label": str(y)} for y in range(years[0], years[-1] + 1) if (y - years[0]) % step == 0
        ]
        context["y_ticks"] = [
            {"y": round(sy(y_max * k / 4), 2), "label": f"{y_max * k / 4:.3f}"} for k in range(5)
        ]
        if any(p.single_member for p in points):
            context["note"] = "single member: no dispersion band"
    return _env.get_template("risk_trend.svg.j2").render(**context)
