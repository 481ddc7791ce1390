"""
Report endpoints: browse run directories, download artifacts and start runs.

Runs live under ``<data>/runs/<run_id>``; datasets under ``<data>/<dataset>``.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd
from fastapi import APIRouter, Depends, HTTPException, status
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from app.core.dependencies import get_data_dir, get_dataset_manager, get_runs_dir, load_config
from app.domain.errors import DatasetValidationError, PowerRiskError
from app.services.pipeline import PipelineService

logger = logging.getLogger(__name__)

router = APIRouter()

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

MEDIA_TYPES = {
    ".csv": "text/csv",
    ".json": "application/json",
    ".geojson": "application/geo+json",
    ".svg": "image/svg+xml",
}


class RunRequest(BaseModel):
    run_id: str = Field(description="Name of the run directory to create or overwrite.")
    dataset: str = Field(default="dataset", description="Dataset directory name inside the data directory.")
    config: Dict[str, Any] = Field(default_factory=dict, description="PipelineConfig overrides.")


class RunInfo(BaseModel):
    run_id: str
    artifacts: List[str] = Field(default_factory=list)


def _checked_name(name: str, what: str) -> str:
    if not _NAME_RE.match(name) or ".." in name:
        raise HTTPException(status_code=404, detail=f"{what} not found")
    return name


def _run_dir(run_id: str, runs_dir: Path) -> Path:
    d = runs_dir / _checked_name(run_id, "Run")
    if not (d / "config.json").is_file():
        raise HTTPException(status_code=404, detail="Run not found")
    return d


def _artifacts(run_dir: Path) -> List[str]:
    return sorted(p.relative_to(run_dir).as_posix() for p in run_dir.rglob("*") if p.is_file())


@router.get("/runs")
async def list_runs(runs_dir: Path = Depends(get_runs_dir)) -> dict:
    runs = sorted(d.name for d in runs_dir.iterdir() if d.is_dir() and (d / "config.json").is_file())
    return {"runs": runs}


@router.get("/runs/{run_id}", response_model=RunInfo)
async def get_run(run_id: str, runs_dir: Path = Depends(get_runs_dir)) -> RunInfo:
    run_dir = _run_dir(run_id, runs_dir)
    return RunInfo(run_id=run_id, artifacts=_artifacts(run_dir))


@router.get("/runs/{run_id}/artifacts/{artifact_path:path}")
async def download_artifact(run_id: str, artifact_path: str, runs_dir: Path = Depends(get_runs_dir)) -> FileResponse:
    run_dir = _run_dir(run_id, runs_dir).resolve()
    target = (run_dir / artifact_path).resolve()
    if run_dir not in target.parents or not target.is_file():
        raise HTTPException(status_code=404, detail="Artifact not found")
    return FileResponse(
        path=str(target),
        filename=target.name,
        media_type=MEDIA_TYPES.get(target.suffix, "application/octet-stream"),
    )


@router.get("/runs/{run_id}/{scenario}/summary")
async def get_summary(run_id: str, scenario: str, runs_dir: Path = Depends(get_runs_dir)) -> dict:
    path = _run_dir(run_id, runs_dir) / _checked_name(scenario, "Scenario") / "summary.json"
    if not path.is_file():
        raise HTTPException(status_code=404, detail="Summary not found")
    return json.loads(path.read_text(encoding="utf-8"))


@router.get("/runs/{run_id}/{scenario}/reports/{window}/{statistic}")
async def get_report_rows(
    run_id: str, scenario: str, window: str, statistic: str, runs_dir: Path = Depends(get_runs_dir)
) -> dict:
    """County rows of one risk report as JSON records."""
    name = f"risk_{_checked_name(window, 'Report')}_{_checked_name(statistic, 'Report')}.csv"
    path = _run_dir(run_id, runs_dir) / _checked_name(scenario, "Scenario") / name
    if not path.is_file():
        raise HTTPException(status_code=404, detail="Report not found")
    frame = pd.read_csv(path, dtype={"fips": str})
    rows = json.loads(frame.to_json(orient="records"))
    return {"window": window, "statistic": statistic, "scenario": scenario, "rows": rows}


@router.post("/runs", status_code=status.HTTP_201_CREATED, response_model=RunInfo)
def start_run(request: RunRequest, runs_dir: Path = Depends(get_runs_dir)) -> RunInfo:
    """
    Validate a dataset in the data directory and run every stage into a new
    run directory. Blocking; intended for the small datasets this serves.
    """
    run_id = _checked_name(request.run_id, "Run")
    dataset_dir = get_data_dir() / _checked_name(request.dataset, "Dataset")
    if not dataset_dir.is_dir():
        raise HTTPException(status_code=404, detail="Dataset not found")

    overrides = {**request.config, "dataset_dir": str(dataset_dir), "output_dir": str(runs_dir / run_id)}
    try:
        config = load_config(overrides=overrides)
        dataset = get_dataset_manager(dataset_dir)
        report = dataset.validate()
        if not report.ok:
            raise HTTPException(
                status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                detail=[str(issue) for issue in report.errors],
            )
        service = PipelineService(dataset, config)
        service.run()
    except DatasetValidationError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except PowerRiskError as e:
        logger.error(f"Run {run_id} failed in {e.module}: {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=f"[{e.module}] {e}")

    logger.info(f"Run {run_id} finished with {len(service.writer.written)} artifacts")
    return RunInfo(run_id=run_id, artifacts=sorted(set(service.writer.written)))
