import pytest

from app.core.dependencies import get_dataset_manager, get_runs_dir, load_config, read_config_file, reset_dataset_managers
from app.domain.errors import DatasetValidationError


def test_defaults():
    config = load_config()
    assert config.per_capita_m3 == 1700.0
    assert config.alpha == 0.10
    assert config.aggregation_mode == "disjunctive"
    assert config.windows == ["2010s", "2020s", "2030s", "2040s"]
    assert config.thermal.gamma_flow == 0.3


def test_yaml_then_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("alpha: 0.05\nthermal:\n  dt_max_k: 8\n  gamma_flow: 0.5\n", encoding="utf-8")
    config = load_config(path, {"alpha": None, "thermal": {"gamma_flow": 0.2}, "workers": 3})
    assert config.alpha == 0.05
    assert config.workers == 3
    assert config.thermal.dt_max_k == 8.0
    assert config.thermal.gamma_flow == 0.2


def test_duplicate_selectors_collapse():
    assert load_config(overrides={"statistics": ["p80", "median", "p80"]}).statistics == ["p80", "median"]


@pytest.mark.parametrize(
    "content",
    ["- just\n- a list\n", "alpha: [unclosed\n"],
)
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "bad.yaml"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(DatasetValidationError):
        read_config_file(path)


def test_invalid_values_and_missing_file(tmp_path):
    with pytest.raises(DatasetValidationError):
        load_config(overrides={"statistics": ["mean"]})
    with pytest.raises(DatasetValidationError):
        load_config(overrides={"windows": []})
    with pytest.raises(DatasetValidationError):
        read_config_file(tmp_path / "absent.yaml")
    assert read_config_file(_empty(tmp_path)) == {}


def _empty(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf-8")
    return path


def test_data_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("POWERRISK_DATA_DIR", str(tmp_path))
    reset_dataset_managers()
    assert get_runs_dir() == tmp_path / "runs"
    manager = get_dataset_manager()
    assert manager is get_dataset_manager(tmp_path / "dataset")
    reset_dataset_managers()
