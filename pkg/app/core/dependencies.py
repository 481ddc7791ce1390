from pathlib import Path
from typing import Any, Dict, Mapping, Optional
import logging
import os

import yaml
from pydantic import ValidationError

from app.domain.errors import DatasetValidationError
from app.domain.models import PipelineConfig
from app.storage.csv_dataset_manager import CsvDatasetManager
from app.storage.dataset_manager import DatasetManager

logger = logging.getLogger(__name__)

DATA_ROOT_ENV_VAR = "POWERRISK_DATA_DIR"
LOG_LEVEL_ENV_VAR = "POWERRISK_LOG_LEVEL"
_REPO_ROOT = Path(__file__).resolve().parents[2]
_DEFAULT_DATA_DIR = _REPO_ROOT / "data"

_dataset_managers: Dict[Path, DatasetManager] = {}


def get_data_dir() -> Path:
    env_path = os.environ.get(DATA_ROOT_ENV_VAR)
    if env_path:
        d = Path(env_path).expanduser()
    else:
        d = _DEFAULT_DATA_DIR
    d.mkdir(parents=True, exist_ok=True)
    return d


def get_runs_dir() -> Path:
    d = get_data_dir() / "runs"
    d.mkdir(parents=True, exist_ok=True)
    return d


def get_dataset_manager(dataset_dir: Optional[Path] = None) -> DatasetManager:
    """One cached manager per dataset directory (default ``<data>/dataset``)."""
    key = Path(dataset_dir or get_data_dir() / "dataset").resolve()
    if key not in _dataset_managers:
        _dataset_managers[key] = CsvDatasetManager(key)
    return _dataset_managers[key]


def reset_dataset_managers() -> None:
    _dataset_managers.clear()


def read_config_file(path: Path) -> Dict[str, Any]:
    """YAML mapping of PipelineConfig fields; an empty file is an empty mapping."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise DatasetValidationError(f"config file {path} not found")
    except yaml.YAMLError as e:
        raise DatasetValidationError(f"config file {path} is not valid YAML: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise DatasetValidationError(f"config file {path} must hold a mapping, got {type(data).__name__}")
    return data


def load_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """
    Effective configuration: defaults < YAML file < explicit overrides.

    ``None`` values in ``overrides`` mean "not given" and are skipped. The
    ``thermal`` section merges key by key instead of replacing the defaults.
    """
    merged: Dict[str, Any] = dict(read_config_file(path)) if path else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "thermal" and isinstance(merged.get("thermal"), dict):
            merged["thermal"] = {**merged["thermal"], **value}
        else:
            merged[key] = value
    try:
        config = PipelineConfig(**merged)
    except ValidationError as e:
        raise DatasetValidationError(f"invalid configuration: {e}")
    logger.debug(f"Effective configuration: {config.model_dump()}")
    return config
