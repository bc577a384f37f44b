import pytest
from fastapi.testclient import TestClient

from semiblind.harness import CSV_HEADER, SimConfig, aggregate, csv_text, run_scenario
from semiblind.service import create_app
from semiblind.service.app import handle_check, handle_run, handle_sweep
from semiblind.service.schemas import SimRequest


SMALL = dict(n_tx=2, n_rx=2, n_subcarriers=32, cp_len=4, n_paths=4,
             training_len=8, n_blind_passes=2, n_trials=3, seed=0)


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestSchemas:
    def test_request_mirrors_config_defaults(self):
        req = SimRequest()
        cfg = req.to_config()
        assert cfg == SimConfig()

    def test_request_rejects_unknown_fields(self):
        with pytest.raises(Exception):
            SimRequest(step_size=0.1)

    def test_request_rejects_unknown_mode(self):
        with pytest.raises(Exception):
            SimRequest(mode="mmse")


class TestHandlers:
    def test_handle_run_matches_harness(self):
        req = SimRequest(**SMALL, mode="dd", ebn0_db=10.0)
        resp = handle_run(req)
        want_rows = aggregate(run_scenario(SimConfig(**SMALL, mode="dd", ebn0_db=10.0)))
        assert resp.csv == csv_text(want_rows)
        assert len(resp.rows) == len(want_rows)
        assert resp.rows[0].channel_mse == want_rows[0].channel_mse
        assert resp.rows[0].pass_index == want_rows[0].pass_idx

    def test_handle_sweep_row_count(self):
        req = SimRequest(**SMALL, mode=["dd", "training-only"], ebn0_db=[0.0, 10.0])
        resp = handle_sweep(req)
        assert len(resp.rows) == 2 * 3 + 2 * 1

    def test_handle_check_passes(self):
        resp = handle_check()
        assert resp.passed
        assert len(resp.checks) == 6


class TestRoutes:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_run_happy_path(self, client):
        r = client.post("/run", json={**SMALL, "mode": "dd", "ebn0_db": 10.0})
        assert r.status_code == 200
        body = r.json()
        assert body["csv"].startswith(CSV_HEADER)
        assert len(body["rows"]) == 3  # 1 + 2 passes
        for row in body["rows"]:
            assert set(row) == {"mode", "n_tx", "n_rx", "ebn0_db", "frame", "pass",
                                "channel_mse", "mse_stderr", "ber", "ber_stderr",
                                "bits_total", "trials"}
            assert row["mode"] == "dd"
            assert row["trials"] == 3

    def test_run_is_deterministic(self, client):
        payload = {**SMALL, "mode": "aba", "ebn0_db": 10.0}
        a = client.post("/run", json=payload).json()
        b = client.post("/run", json=payload).json()
        assert a == b

    def test_run_rejects_schema_violations(self, client):
        r = client.post("/run", json={**SMALL, "mode": "mmse"})
        assert r.status_code == 422
        r = client.post("/run", json={**SMALL, "bogus_field": 1})
        assert r.status_code == 422

    def test_run_rejects_config_errors_as_400(self, client):
        # schema-valid but semantically impossible: training longer than the frame
        r = client.post("/run", json={**SMALL, "training_len": 33})
        assert r.status_code == 400
        assert "training_len" in r.json()["detail"]

    def test_run_rejects_lists_as_400(self, client):
        r = client.post("/run", json={**SMALL, "mode": ["dd", "aba"]})
        assert r.status_code == 400

    def test_sweep_happy_path(self, client):
        r = client.post("/sweep", json={**SMALL, "mode": ["dd", "ls"],
                                        "ebn0_db": [0.0, 10.0]})
        assert r.status_code == 200
        rows = r.json()["rows"]
        assert len(rows) == 2 * 3 + 2 * 1
        modes = {row["mode"] for row in rows}
        assert modes == {"dd", "ls"}

    def test_check_route(self, client):
        r = client.get("/check")
        assert r.status_code == 200
        body = r.json()
        assert body["passed"] is True
        assert [c["name"] for c in body["checks"]] == [
            "dft-roundtrip", "dft-direct-sum", "channel-convolution",
            "end-to-end-subcarrier", "lms-gradient-fd", "ls-recovery"]
        for c in body["checks"]:
            assert c["passed"] is True
            assert c["max_error"] < c["tolerance"]
