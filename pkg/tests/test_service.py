import json

import pytest
from fastapi.testclient import TestClient

from pbengine.service import ServiceConfig, apply_env_overrides, create_app, parse_service_config
from pbengine.store import CorpusStore

from .conftest import fixture_path


@pytest.fixture()
def app_config(tmp_path):
    return ServiceConfig(
        data_dir=str(tmp_path / "data"),
        ballots_path=fixture_path("ballots-4wards.json"),
        census_path=fixture_path("census-4wards.csv"),
    )


@pytest.fixture()
def client(app_config):
    app = create_app(app_config)
    with TestClient(app) as c:
        yield c


def open_session(client, ballot_ref="ward-49"):
    res = client.post("/sessions", json={"ballot_ref": ballot_ref})
    assert res.status_code == 201
    return res.json()["session_id"]


def drive_to_done(client, sid, token, with_profile=True):
    client.post(f"/sessions/{sid}/sort", json={"order": ["bike-lanes", "curb-cuts"]})
    client.post(f"/sessions/{sid}/allocation", json={"project_id": "bike-lanes", "amount": 600_000})
    client.post(f"/sessions/{sid}/fill-up", json={"project_id": "curb-cuts"})
    assert client.post(f"/sessions/{sid}/reveal").status_code == 200
    if with_profile:
        res = client.post(
            f"/sessions/{sid}/demographics",
            json={"race": "black", "age_band": "25-34", "income_band": "25k-50k", "education_band": "bachelors"},
        )
        assert res.status_code == 200
    res = client.post(f"/sessions/{sid}/finalize", json={"idempotency_token": token})
    assert res.status_code == 200
    return res.json()


def test_get_ballot_hides_costs(client):
    res = client.get("/ballots/ward-49")
    assert res.status_code == 200
    body = res.json()
    assert body["ward_id"] == 49
    assert len(body["projects"]) == 8
    assert "cost" not in json.dumps(body)


def test_unknown_ballot_404(client):
    res = client.get("/ballots/nope")
    assert res.status_code == 404
    assert res.json()["code"] == "ballot-not-found"
    res = client.post("/sessions", json={"ballot_ref": "nope"})
    assert res.status_code == 404


def test_session_flow_and_error_mapping(client):
    sid = open_session(client)
    res = client.post(f"/sessions/{sid}/allocation", json={"project_id": "bike-lanes", "amount": 1_000_000})
    assert res.status_code == 200
    assert res.json()["remaining"] == 0
    res = client.post(f"/sessions/{sid}/allocation", json={"project_id": "curb-cuts", "amount": 1_000})
    assert res.status_code == 422
    assert res.json()["code"] == "budget-exceeded"
    res = client.post(f"/sessions/{sid}/allocation", json={"project_id": "curb-cuts", "amount": 500})
    assert res.status_code == 422
    assert res.json()["code"] == "granularity-violation"
    res = client.post(f"/sessions/{sid}/allocation", json={"project_id": "ghost", "amount": 1_000})
    assert res.status_code == 404
    assert res.json()["code"] == "project-not-found"


def test_reveal_before_allocation_is_conflict(client):
    sid = open_session(client)
    client.post(f"/sessions/{sid}/sort", json={"order": []})
    res = client.post(f"/sessions/{sid}/reveal")
    assert res.status_code == 409
    assert res.json()["code"] == "stage-violation"


def test_no_cost_fields_before_reveal(client):
    sid = open_session(client)
    responses = [
        client.get("/ballots/ward-49"),
        client.get(f"/sessions/{sid}"),
        client.post(f"/sessions/{sid}/sort", json={"order": ["bike-lanes"]}),
        client.post(f"/sessions/{sid}/allocation", json={"project_id": "bike-lanes", "amount": 49_000}),
    ]
    for res in responses:
        assert "cost" not in json.dumps(res.json())
    reveal = client.post(f"/sessions/{sid}/reveal").json()
    assert reveal["costs"]["curb-cuts"]["rounded_cost"] == 49_000


def test_finalize_requires_token_and_is_idempotent(client, app_config):
    sid = open_session(client)
    client.post(f"/sessions/{sid}/fill-up", json={"project_id": "school-improvements"})
    client.post(f"/sessions/{sid}/reveal")
    res = client.post(f"/sessions/{sid}/finalize", json={})
    assert res.status_code == 422
    assert res.json()["code"] == "token-required"
    res = client.post(f"/sessions/{sid}/finalize", json={"idempotency_token": "tok-1"})
    assert res.status_code == 200
    res = client.post(f"/sessions/{sid}/finalize", json={"idempotency_token": "tok-1"})
    assert res.status_code == 200  # replay: one record, no error
    store = CorpusStore(app_config.data_dir)
    assert len(store.records(49)) == 1
    store.close()
    res = client.post(f"/sessions/{sid}/finalize", json={"idempotency_token": "tok-2"})
    assert res.status_code == 409
    assert res.json()["code"] == "already-finalized"


def test_results_aggregate_count_conservation(client):
    for i in range(3):
        drive_to_done(client, open_session(client), f"agg-tok-{i}")
    res = client.get("/results/49/aggregate")
    assert res.status_code == 200
    body = res.json()
    assert body["votes"] == 3
    assert body["per_project"]["bike-lanes"]["total_dollars"] == 3 * 600_000
    assert set(body["funded"]) == {"knapsack-greedy", "equal-shares"}


def test_results_demographics_and_strips(client):
    drive_to_done(client, open_session(client), "demo-tok-0")
    drive_to_done(client, open_session(client), "demo-tok-1", with_profile=False)
    res = client.get("/results/demographics", params={"wards": "49", "axis": "race", "mode": "counts"})
    assert res.status_code == 200
    matrix = res.json()
    row = matrix["rows"].index("black")
    col = matrix["columns"].index({"ward": 49, "source": "voters"})
    assert matrix["cells"][row][col] == 1  # only the finalized profile counts
    res = client.get("/results/49/strips")
    assert res.status_code == 200
    strips = res.json()
    assert strips["voters"] == 2
    assert len(strips["points"]) == 2 * 5


def test_anonymity_no_output_joins_profile_and_allocation(client):
    sid = open_session(client)
    drive_to_done(client, sid, "anon-tok")
    session_body = client.get(f"/sessions/{sid}").json()
    assert "race" not in json.dumps(session_body)
    assert session_body["profile_recorded"] is True
    # results payloads never carry session ids
    for path in ("/results/49/aggregate", "/results/49/strips"):
        body = json.dumps(client.get(path).json())
        assert sid not in body
    demo = json.dumps(client.get("/results/demographics", params={"wards": "49"}).json())
    assert sid not in demo


def test_census_ingest_endpoint(client):
    csv_text = "ward,axis,category,count\n29,race,white,10\n29,age,18-24,10\n"
    res = client.post("/census", content=csv_text)
    assert res.status_code == 200
    assert res.json()["wards"] == [29]
    res = client.post("/census", content="ward,axis,category,count\n29,race,white,-5\n")
    assert res.status_code == 422
    assert res.json()["code"] == "invalid-count"


def test_results_gating(tmp_path):
    config = ServiceConfig(
        data_dir=str(tmp_path / "gated"),
        ballots_path=fixture_path("ballots-4wards.json"),
        census_path=fixture_path("census-4wards.csv"),
        live_results=False,
    )
    with TestClient(create_app(config)) as client:
        res = client.get("/results/49/aggregate")
        assert res.status_code == 422
        assert res.json()["code"] == "results-gated"


def test_crash_recovery_replays_event_logs(app_config):
    with TestClient(create_app(app_config)) as client:
        sid = open_session(client)
        client.post(f"/sessions/{sid}/sort", json={"order": ["picnic-tables"]})
        client.post(f"/sessions/{sid}/allocation", json={"project_id": "picnic-tables", "amount": 23_000})
        done_sid = open_session(client)
        drive_to_done(client, done_sid, "recover-tok")
    # simulated crash: new app over the same data dir
    with TestClient(create_app(app_config)) as client:
        res = client.get(f"/sessions/{sid}")
        assert res.status_code == 200
        body = res.json()
        assert body["stage"] == "AllocateBlind"
        assert body["amounts"]["picnic-tables"] == 23_000
        assert body["remaining"] == 1_000_000 - 23_000
        # finalized session recovered as Done; its record survived exactly once
        res = client.get(f"/sessions/{done_sid}")
        assert res.json()["stage"] == "Done"
        res = client.get("/results/49/aggregate")
        assert res.json()["votes"] == 1
        # the recovered live session can continue to completion
        res = client.post(f"/sessions/{sid}/fill-up", json={"project_id": "street-murals"})
        assert res.status_code == 200


def test_voter_token_hook(app_config):
    # default stub admits everyone; a wired-in check can refuse
    deny_all = lambda token: token == "magic"
    with TestClient(create_app(app_config, voter_token_check=deny_all)) as client:
        res = client.post("/sessions", json={"ballot_ref": "ward-49"})
        assert res.status_code == 422
        assert res.json()["code"] == "voter-token-rejected"
        res = client.post("/sessions", json={"ballot_ref": "ward-49", "voter_token": "magic"})
        assert res.status_code == 201


def test_service_config_parsing(tmp_path, monkeypatch):
    text = "bind = 0.0.0.0:9001\ndata_dir = /tmp/x\nbin_count = 7\ntheta = 0.5\nlive_results = false\n"
    config = parse_service_config(text)
    assert config.host == "0.0.0.0" and config.port == 9001
    assert config.bin_count == 7 and config.theta_default == 0.5
    assert config.live_results is False
    monkeypatch.setenv("PB_BIND", "127.0.0.1:9999")
    monkeypatch.setenv("PB_THETA", "0.75")
    merged = apply_env_overrides(config)
    assert merged.port == 9999 and merged.theta_default == 0.75
