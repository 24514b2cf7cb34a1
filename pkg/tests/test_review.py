from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
import pytest

from nomina.config import load_config
from nomina.review import make_server
from nomina.workspace import Workspace, replay_state, run_report

from tests.test_cli import TOY_CFG, toy_copy, toy_master  # noqa: F401  (fixtures)


class ReviewClient:
    def __init__(self, port: int):
        self.base = f"http://127.0.0.1:{port}"

    def request(self, method: str, path: str, payload: dict | None = None):
        data = json.dumps(payload).encode("utf-8") if payload is not None else None
        req = urllib.request.Request(
            self.base + path, data=data, method=method,
            headers={"Content-Type": "application/json"},
        )
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            return exc.code, json.loads(exc.read().decode("utf-8"))

    def get(self, path):
        return self.request("GET", path)

    def post(self, path, payload):
        return self.request("POST", path, payload)


@pytest.fixture
def service(toy_copy):  # noqa: F811
    config = load_config(TOY_CFG, workspace_override=toy_copy)
    ws = Workspace(config.workspace)
    server = make_server(config, ws, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    client = ReviewClient(server.server_address[1])
    yield client, config, ws
    server.shutdown()
    server.server_close()


class TestReadEndpoints:
    def test_project_summary(self, service):
        client, _, _ = service
        status, payload = client.get("/api/project")
        assert status == 200
        assert [t["label"] for t in payload["targets"]] == ["eng1", "srb"]
        assert "report" in payload["stages"]

    def test_pairs_before_classify_is_not_found(self, tmp_path):
        from nomina.cli import main

        ws_dir = tmp_path / "ws"
        for stage in ("segment", "tag", "align"):
            assert main(["--config", str(TOY_CFG), "--workspace", str(ws_dir), stage]) == 0
        config = load_config(TOY_CFG, workspace_override=ws_dir)
        server = make_server(config, Workspace(ws_dir), port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            client = ReviewClient(server.server_address[1])
            status, _ = client.get("/api/bitext/eng1")
            assert status == 200
            status, payload = client.get("/api/pairs/eng1")
            assert status == 404
        finally:
            server.shutdown()
            server.server_close()

    def test_bitext_payload_mirrors_links(self, service):
        client, _, ws = service
        status, payload = client.get("/api/bitext/eng1")
        assert status == 200
        assert payload["revision"] == 0
        assert len(payload["pivot"]) == 39
        kinds = [l["kind"] for l in payload["links"]]
        assert kinds.count("1:2") == 1 and kinds.count("1:0") == 1

    def test_pairs_listing(self, service):
        client, _, _ = service
        status, payload = client.get("/api/pairs/srb")
        assert status == 200
        assert len(payload["pairs"]) == 27
        absent = [p for p in payload["pairs"] if p["label"] == "Absence"]
        assert all(p["span"] is None for p in absent)

    def test_unknown_label_404(self, service):
        client, _, _ = service
        status, _ = client.get("/api/bitext/nope")
        assert status == 404

    def test_fallback_index_served(self, service):
        client, _, _ = service
        req = urllib.request.Request(client.base + "/")
        with urllib.request.urlopen(req) as resp:
            assert resp.status == 200
            assert b"review" in resp.read()


class TestEdits:
    def split_payload(self, revision: int, index: int) -> dict:
        return {
            "revision": revision,
            "edits": [{"op": "split", "index": index, "pivot_first": 1, "target_first": 1}],
        }

    def find_12(self, client) -> int:
        _, payload = client.get("/api/bitext/eng1")
        return next(i for i, l in enumerate(payload["links"]) if l["kind"] == "1:2")

    def test_stale_revision_conflict(self, service):
        client, _, _ = service
        idx = self.find_12(client)
        status, payload = client.post(
            "/api/bitext/eng1/edits", self.split_payload(revision=99, index=idx)
        )
        assert status == 409
        assert payload["error"] == "EditConflict"
        # state unchanged
        _, again = client.get("/api/bitext/eng1")
        assert again["revision"] == 0

    def test_split_one_to_two(self, service):
        client, _, ws = service
        idx = self.find_12(client)
        status, payload = client.post(
            "/api/bitext/eng1/edits", self.split_payload(revision=0, index=idx)
        )
        assert status == 200
        assert payload["revision"] == 1
        kinds = [l["kind"] for l in payload["links"]]
        assert kinds[idx : idx + 2] == ["1:1", "0:1"]
        statuses = {l["status"] for l in payload["links"][idx : idx + 2]}
        assert statuses == {"edited"}
        # persisted
        assert b"edited" in ws.path("links_eng1.tsv").read_bytes()

    def test_invalid_edit_rejected_with_violations(self, service):
        client, _, _ = service
        status, payload = client.post(
            "/api/bitext/eng1/edits",
            {"revision": 0, "edits": [{"op": "merge", "index": 0}]},
        )
        assert status == 422
        assert payload["error"] in ("InvalidEdit",)

    def test_approve_confirms_all(self, service):
        client, _, _ = service
        status, payload = client.post("/api/bitext/srb/approve", {"revision": 0})
        assert status == 200
        assert payload["approved"] is True
        assert {l["status"] for l in payload["links"]} == {"confirmed"}


class TestOverrides:
    def test_override_and_report_reflects_it(self, service):
        client, config, ws = service
        _, pairs = client.get("/api/pairs/eng1")
        borrow_idx = next(
            p["index"] for p in pairs["pairs"] if p["label"] == "Borrowing"
        )
        status, payload = client.post(
            "/api/pairs/eng1/overrides",
            {"revision": 0, "index": borrow_idx, "label": "Other", "note": "reviewed"},
        )
        assert status == 200
        assert payload["pairs"][borrow_idx]["label"] == "Other"
        assert payload["pairs"][borrow_idx]["override"] is True
        run_report(config, ws)
        report = json.loads(ws.path("report.json").read_text())
        row = next(r for r in report["matrix"]["rows"] if r["label"] == "eng1")
        assert row["counts"]["Other"] == 1
        assert row["counts"]["Borrowing"] == 22

    def test_other_requires_note(self, service):
        client, _, _ = service
        status, payload = client.post(
            "/api/pairs/eng1/overrides",
            {"revision": 0, "index": 0, "label": "Other", "note": "  "},
        )
        assert status == 422

    def test_bad_index_conflict(self, service):
        client, _, _ = service
        status, _ = client.post(
            "/api/pairs/eng1/overrides",
            {"revision": 0, "index": 999, "label": "Absence", "note": ""},
        )
        assert status == 409


class TestPersistenceAndReplay:
    def test_state_survives_restart_and_replays(self, service):
        client, config, ws = service
        idx = TestEdits().find_12(client)
        client.post("/api/bitext/eng1/edits", TestEdits().split_payload(0, idx))
        client.post(
            "/api/pairs/eng1/overrides",
            {"revision": 1, "index": 3, "label": "Other", "note": "checked"},
        )
        # replaying the event log over the auto artifacts reproduces the
        # persisted working state byte for byte
        replayed = replay_state(config, ws)
        assert replayed["eng1"]["links"] == ws.path("links_eng1.tsv").read_bytes()
        assert replayed["eng1"]["pairs"] == ws.path("pairs_eng1.tsv").read_bytes()
        assert replayed["srb"]["links"] == ws.path("links_srb.tsv").read_bytes()

        # a fresh service over the same workspace sees the same state
        server2 = make_server(config, ws, port=0)
        t2 = threading.Thread(target=server2.serve_forever, daemon=True)
        t2.start()
        try:
            client2 = ReviewClient(server2.server_address[1])
            _, payload = client2.get("/api/bitext/eng1")
            assert payload["revision"] == 2
            kinds = [l["kind"] for l in payload["links"]]
            assert kinds[idx : idx + 2] == ["1:1", "0:1"]
            _, pairs = client2.get("/api/pairs/eng1")
            assert pairs["pairs"][3]["label"] == "Other"
        finally:
            server2.shutdown()
            server2.server_close()

    def test_events_are_append_only_with_increasing_revisions(self, service):
        client, _, ws = service
        client.post("/api/bitext/srb/approve", {"revision": 0})
        client.post(
            "/api/pairs/srb/overrides",
            {"revision": 1, "index": 0, "label": "Borrowing", "note": ""},
        )
        events = ws.events()
        srb = [e for e in events if e["bitext"] == "srb"]
        assert [e["revision"] for e in srb] == [1, 2]
        assert [e["seq"] for e in events] == sorted(e["seq"] for e in events)
