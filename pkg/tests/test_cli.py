import json

import pandas as pd
import pytest

from app.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main
from app.core.dependencies import reset_dataset_managers


@pytest.fixture(autouse=True)
def fresh_managers():
    reset_dataset_managers()
    yield
    reset_dataset_managers()


def test_validate_synthetic_dataset(synth_dataset, capsys):
    assert main(["validate", "--dataset", str(synth_dataset)]) == EXIT_OK
    assert ": ok (0 errors" in capsys.readouterr().out


def test_validate_missing_dataset(tmp_path, capsys):
    assert main(["validate", "--dataset", str(tmp_path / "nothing")]) == EXIT_VALIDATION
    captured = capsys.readouterr()
    assert "FAILED" in captured.out
    assert "error:" in captured.err


def test_invalid_configuration_is_a_validation_failure(synth_dataset, tmp_path, capsys):
    code = main(["waaci", "--dataset", str(synth_dataset), "--output", str(tmp_path), "--alpha", "2"])
    assert code == EXIT_VALIDATION
    assert "error [cli]: invalid configuration" in capsys.readouterr().err


def test_missing_scenario_is_a_runtime_failure(synth_dataset, tmp_path, capsys):
    code = main(["waaci", "--dataset", str(synth_dataset), "--output", str(tmp_path), "--scenario", "RCP2.6"])
    assert code == EXIT_RUNTIME
    assert "error [geogrid]: no gridded fields for scenario RCP2.6" in capsys.readouterr().err


def test_waaci_stage_writes_artifacts(synth_dataset, tmp_path, capsys):
    code = main(
        ["waaci", "--dataset", str(synth_dataset), "--output", str(tmp_path), "--window", "2010s", "--window", "2040s"]
    )
    assert code == EXIT_OK
    assert (tmp_path / "RCP8.5" / "waaci.csv").is_file()
    assert str(tmp_path / "RCP8.5" / "waaci_change.csv") in capsys.readouterr().out
    config = json.loads((tmp_path / "config.json").read_text(encoding="utf-8"))
    assert config["windows"] == ["2010s", "2040s"]


def test_yaml_config_and_flags(synth_dataset, tmp_path):
    config_file = tmp_path / "config.yaml"
    config_file.write_text("per_capita_m3: 1000\nstatistics: [p80]\n", encoding="utf-8")
    out = tmp_path / "out"
    code = main(
        ["trend", "--dataset", str(synth_dataset), "--output", str(out), "--config", str(config_file), "--alpha", "0.05"]
    )
    assert code == EXIT_OK
    config = json.loads((out / "config.json").read_text(encoding="utf-8"))
    assert (config["per_capita_m3"], config["statistics"], config["alpha"]) == (1000.0, ["p80"], 0.05)
    assert (out / "trends.csv").is_file()


def test_synth_command(tmp_path):
    out = tmp_path / "mini"
    code = main(["synth", "--out", str(out), "--seed", "3", "--counties", "4", "--gauges", "4", "--plants", "4"])
    assert code == EXIT_OK
    truth = json.loads((out / "truth.json").read_text(encoding="utf-8"))
    assert truth["seed"] == 3
    assert len(truth["outside_grid"]) == 1
    assert main(["validate", "--dataset", str(out)]) == EXIT_OK


def test_repeated_statistic_flags(synth_dataset, tmp_path):
    code = main(
        [
            "waaci", "--dataset", str(synth_dataset), "--output", str(tmp_path),
            "--window", "2040s", "--statistic", "median", "--statistic", "p80",
        ]
    )
    assert code == EXIT_OK
    config = json.loads((tmp_path / "config.json").read_text(encoding="utf-8"))
    assert config["statistics"] == ["median", "p80"]

    waaci = pd.read_csv(tmp_path / "RCP8.5" / "waaci.csv", dtype={"fips": str})
    waaci = waaci[waaci["window"] == "2040s"]
    assert set(waaci["statistic"]) == {"median", "p80"}
    wide = waaci.pivot(index="fips", columns="statistic", values="supply_mgal_yr")
    assert (wide["p80"] >= wide["median"]).all()
    assert (wide["p80"] != wide["median"]).any()
