"""HTTP service conformance: endpoints, status codes, idempotency, restart."""

import pytest
from fastapi.testclient import TestClient

from conftest import fixture_adapter_dict
from evalbench.service import create_app
from evalbench.steps import STEP_ORDER, StepId
from helpers import PROBLEM, canned_payloads


@pytest.fixture(scope="module")
def payloads(bundle):
    return canned_payloads(bundle)


@pytest.fixture()
def service(bundle_copy, store_path):
    app = create_app(bundle_copy, store_path)
    with TestClient(app) as client:
        yield client, bundle_copy, store_path


def create_project(client, **extra):
    response = client.post("/projects", json={"problem": PROBLEM, "seed": 7, **extra})
    assert response.status_code == 201
    return response.json()["id"]


def drive_steps(client, pid, payloads, upto=StepId.EXPERIMENTAL_DESIGN):
    for step in STEP_ORDER:
        response = client.post(
            f"/projects/{pid}/steps/{step.value}", json={"payload": payloads[step]}
        )
        assert response.status_code == 200, (step, response.text)
        if step is upto:
            break


class TestBundleEndpoints:
    def test_metrics_lookup_matches_catalogue(self, service):
        client, _, _ = service
        response = client.get(
            "/bundle/metrics", params={"feature": "communication-data-throughput"}
        )
        assert response.status_code == 200
        entries = response.json()["entries"]
        assert len(entries) == 2
        assert {e["metric"]["name"] for e in entries} == {
            "TCP/UDP/IP Transfer Speed",
            "MPI Transfer Speed",
        }

    def test_unknown_resource_is_404(self, service):
        client, _, _ = service
        assert client.get("/unknown").status_code == 404
        assert client.get("/projects/ghost").status_code == 404
        assert client.get("/bundle/metrics", params={"feature": "ghost"}).status_code == 404

    def test_taxonomy_and_factors(self, service):
        client, _, _ = service
        taxonomy = client.get("/bundle/taxonomy", params={"kind": "performance-feature"})
        assert taxonomy.status_code == 200
        assert len(taxonomy.json()["elements"]) >= 4
        factors = client.get(
            "/bundle/factors",
            params={"features": "scalability", "benchmarks": "iPerf", "metrics": "m"},
        )
        assert factors.status_code == 200
        assert factors.json()["quality"] == ["m"]

    def test_match(self, service):
        client, _, _ = service
        response = client.get("/bundle/match", params={"text": "reliable and variable"})
        matched = {m["element"]["id"] for m in response.json()["matches"]}
        assert {"reliability", "variability"} <= matched


class TestGatingOverHttp:
    def test_out_of_order_step_is_409_with_missing_step(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        response = client.post(
            f"/projects/{pid}/steps/feature-identification",
            json={"payload": payloads[StepId.FEATURE_IDENTIFICATION]},
        )
        assert response.status_code == 409
        assert response.json()["missing_step"] == "requirement-recognition"

    def test_contract_violation_is_422(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        response = client.post(
            f"/projects/{pid}/steps/requirement-recognition",
            json={"payload": {"questions": []}},
        )
        assert response.status_code == 422

    def test_duplicate_submission_is_409(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        body = {"payload": payloads[StepId.REQUIREMENT_RECOGNITION]}
        assert client.post(
            f"/projects/{pid}/steps/requirement-recognition", json=body
        ).status_code == 200
        assert client.post(
            f"/projects/{pid}/steps/requirement-recognition", json=body
        ).status_code == 409


class TestCampaignOverHttp:
    def test_execute_analyze_conclude(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        drive_steps(client, pid, payloads, upto=StepId.EXPERIMENTAL_DESIGN)
        adapter = fixture_adapter_dict(
            metric="TCP/UDP/IP Transfer Speed",
            factors=("instance type", "message size"),
        )
        response = client.post(f"/projects/{pid}/execute", json={"adapter": adapter})
        assert response.status_code == 200, response.text
        view = response.json()
        records = next(
            r for r in view["records"]
            if r["step"] == "experimental-implementation"
        )["payload"]["records"]
        assert all(r["status"] == "ok" for r in records)
        assert view["pending_runs"] == []

        runs = client.get(f"/projects/{pid}/runs").json()
        assert len(runs["sealed"]) == len(records)

        anova = client.get(f"/projects/{pid}/analysis/anova").json()
        assert anova["factor"] == "instance type"
        assert anova["anova"]["f"] is None or anova["anova"]["f"] >= 0

        pareto = client.get(f"/projects/{pid}/analysis/pareto").json()
        assert pareto["pareto"]["cumulative_pct"][-1] == 100.0

        chart = client.get(
            f"/projects/{pid}/analysis/chart", params={"kind": "column"}
        ).json()
        assert chart["kind"] == "column"

        assert client.post(
            f"/projects/{pid}/steps/experimental-analysis", json={"auto": True}
        ).status_code == 200
        assert client.post(
            f"/projects/{pid}/steps/conclusion-documentation", json={"auto": True}
        ).status_code == 200

        report = client.get(f"/projects/{pid}/report")
        assert report.status_code == 200
        assert "## Conclusions" in report.text

        compare = client.get(f"/projects/{pid}/compare/{pid}").json()
        assert compare["overall"] == 1.0

    def test_design_endpoint_generates_and_submits(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        drive_steps(client, pid, payloads, upto=StepId.FACTORS_SELECTION)
        design = payloads[StepId.EXPERIMENTAL_DESIGN]["design"]
        response = client.post(f"/projects/{pid}/design", json={"design": design})
        assert response.status_code == 200
        assert len(response.json()["plan"]) == len(payloads[StepId.EXPERIMENTAL_DESIGN]["plan"])


class TestIdempotency:
    def test_request_id_suppresses_reapply(self, service, payloads):
        client, _, _ = service
        pid = create_project(client)
        body = {
            "payload": payloads[StepId.REQUIREMENT_RECOGNITION],
            "request_id": "retry-1",
        }
        first = client.post(f"/projects/{pid}/steps/requirement-recognition", json=body)
        second = client.post(f"/projects/{pid}/steps/requirement-recognition", json=body)
        assert first.status_code == 200 and second.status_code == 200
        assert first.json()["event_count"] == second.json()["event_count"]

    def test_create_with_request_id_is_idempotent(self, service):
        client, _, _ = service
        a = client.post(
            "/projects", json={"problem": PROBLEM, "seed": 7, "request_id": "mk-1"}
        ).json()["id"]
        b = client.post(
            "/projects", json={"problem": PROBLEM, "seed": 7, "request_id": "mk-1"}
        ).json()["id"]
        assert a == b


class TestRestart:
    def test_new_app_over_same_store_replays_identically(self, bundle_copy, store_path, payloads):
        with TestClient(create_app(bundle_copy, store_path)) as client:
            pid = create_project(client)
            drive_steps(client, pid, payloads, upto=StepId.METRICS_BENCHMARKS_SELECTION)
            before = client.get(f"/projects/{pid}").json()
        with TestClient(create_app(bundle_copy, store_path)) as client:
            after = client.get(f"/projects/{pid}").json()
        assert after == before
        assert after["content_digest"] == before["content_digest"]


class TestUiMount:
    def test_built_ui_served_when_configured(self, bundle_copy, store_path, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>workbench</body></html>")
        with TestClient(create_app(bundle_copy, store_path, ui_path=ui)) as client:
            assert client.get("/ui/").status_code == 200
            assert "workbench" in client.get("/ui/").text
            assert client.get("/bundle").status_code == 200

    def test_no_mount_without_configuration(self, bundle_copy, store_path):
        with TestClient(create_app(bundle_copy, store_path)) as client:
            assert client.get("/ui/").status_code == 404


class TestTemplatesOverHttp:
    def test_make_and_apply_template(self, service, payloads):
        client, bundle_dir, _ = service
        pid = create_project(client)
        drive_steps(client, pid, payloads, upto=StepId.EXPERIMENTAL_DESIGN)
        client.post(
            f"/projects/{pid}/steps/experimental-implementation",
            json={"payload": payloads[StepId.EXPERIMENTAL_IMPLEMENTATION]},
        ).raise_for_status()
        client.post(
            f"/projects/{pid}/steps/experimental-analysis", json={"auto": True}
        ).raise_for_status()
        made = client.post(
            "/templates", json={"project_id": pid, "feature_id": "scalability"}
        )
        assert made.status_code == 200, made.text
        template_id = made.json()["template_id"]
        assert (bundle_dir / "templates" / f"{template_id}.json").exists()
        listed = client.get("/templates").json()["templates"]
        assert any(t["template_id"] == template_id for t in listed)
        applied = client.post(
            "/projects", json={"template_id": template_id, "seed": 7}
        )
        assert applied.status_code == 201, applied.text
        new_view = applied.json()
        design = next(
            r for r in new_view["records"] if r["step"] == "experimental-design"
        )
        assert design["payload"]["design"] == made.json()["design"]
