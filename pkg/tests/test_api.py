import shutil

import pytest
from fastapi.testclient import TestClient

from app.core.dependencies import reset_dataset_managers
from app.main import app


@pytest.fixture
def data_dir(tmp_path, monkeypatch, synth_dataset, all_statistics_run):
    monkeypatch.setenv("POWERRISK_DATA_DIR", str(tmp_path))
    (tmp_path / "dataset").symlink_to(synth_dataset, target_is_directory=True)
    shutil.copytree(all_statistics_run, tmp_path / "runs" / "demo")
    reset_dataset_managers()
    yield tmp_path
    reset_dataset_managers()


@pytest.fixture
def client(data_dir):
    with TestClient(app) as c:
        yield c


def test_health_and_information(client, data_dir):
    assert client.get("/health").json() == {"status": "ok"}
    info = client.get("/information").json()
    assert info["data_dir"] == str(data_dir)
    assert info["statistics"] == ["median", "min2", "p80", "max2"]


def test_index_lists_runs(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "demo" in response.text


def test_browse_run(client):
    assert client.get("/runs").json() == {"runs": ["demo"]}
    info = client.get("/runs/demo").json()
    assert "RCP8.5/summary.json" in info["artifacts"]
    assert client.get("/runs/missing").status_code == 404
    assert client.get("/runs/bad..name").status_code == 404


def test_download_artifacts(client):
    response = client.get("/runs/demo/artifacts/RCP8.5/risk_trend.svg")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")
    geojson = client.get("/runs/demo/artifacts/RCP8.5/risk_2030s_median.geojson").json()
    assert geojson["type"] == "FeatureCollection"
    assert client.get("/runs/demo/artifacts/RCP8.5/nothing.csv").status_code == 404


def test_summary_and_report_rows(client, truth):
    summary = client.get("/runs/demo/RCP8.5/summary").json()
    assert summary["scenario"] == "RCP8.5"
    report = client.get("/runs/demo/RCP8.5/reports/2030s/median").json()
    scarce = sorted(r["fips"] for r in report["rows"] if r["water_scarce"])
    assert scarce == truth["expected_scarce"]["RCP8.5"]["2030s"]["median"]
    assert client.get("/runs/demo/RCP8.5/reports/2030s/mean").status_code == 404
    assert client.get("/runs/demo/RCP2.6/summary").status_code == 404


def test_start_run_errors(client):
    missing = client.post("/runs", json={"run_id": "x", "dataset": "absent"})
    assert missing.status_code == 404
    invalid = client.post("/runs", json={"run_id": "x", "config": {"alpha": 5}})
    assert invalid.status_code == 422


def test_start_run(client, data_dir):
    response = client.post("/runs", json={"run_id": "api-run", "config": {"windows": ["2010s"]}})
    assert response.status_code == 201
    body = response.json()
    assert body["run_id"] == "api-run"
    assert "RCP8.5/risk_2010s_median.csv" in body["artifacts"]
    assert (data_dir / "runs" / "api-run" / "config.json").is_file()
    assert "api-run" in client.get("/runs").json()["runs"]
