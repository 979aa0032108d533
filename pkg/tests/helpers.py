"""Shared test helpers: canned step payloads and a project driver."""

from __future__ import annotations

from evalbench.analysis import build_analysis_payload
from evalbench.artefacts import KnowledgeBundle, lookup_factors, lookup_metrics
from evalbench.doe import DesignSpec, Factor, full_factorial
from evalbench.engine import Project, create_project, submit_step_output
from evalbench.reporting import build_conclusion_payload
from evalbench.steps import STEP_ORDER, StepId

PROBLEM = "expected to deliver reliable performance under highly variable load intensities"
METRIC = "TCP/UDP/IP Transfer Speed"
DESIGN_SEED = 20260810


def canned_design_spec(seed: int = DESIGN_SEED, replicates: int = 2) -> DesignSpec:
    return DesignSpec(
        factors=(
            Factor("instance type", "resource", ("small", "large")),
            Factor("message size", "workload", ("1MB", "64MB")),
        ),
        replicates=replicates,
        seed=seed,
        response_metrics=(METRIC,),
    )


def fabricate_records(plan: list[dict], metric: str = METRIC) -> list[dict]:
    """Deterministic pseudo-measurements with clean main effects."""
    records = []
    for run in plan:
        combo = run["combination"]
        value = 100.0
        if combo.get("instance type") == "large":
            value += 50.0
        if combo.get("message size") == "64MB":
            value += 10.0
        records.append(
            {
                "index": run["index"],
                "combination": combo,
                "block": run["block"],
                "replicate": run["replicate"],
                "started_at": "2026-01-01T00:00:00+00:00",
                "finished_at": "2026-01-01T00:00:01+00:00",
                "raw_digest": "0" * 64,
                "status": "ok",
                "measurements": {metric: {"value": value, "unit": "Mbit/s"}},
                "failure": "",
                "exit_code": 0,
            }
        )
    return records


def canned_payloads(bundle: KnowledgeBundle, seed: int = DESIGN_SEED) -> dict[StepId, dict]:
    """A mutually consistent payload per step, for gating and driver tests."""
    questions = {
        "questions": [
            {
                "id": "q1",
                "text": "How scalable is the system when dealing with different amounts of workloads?",
                "elements": ["scalability"],
                "status": "open",
            },
            {
                "id": "q2",
                "text": "How fast does the system scale with an increasing workload?",
                "elements": ["elasticity"],
                "status": "open",
            },
            {
                "id": "q3",
                "text": "How fast does the system scale with a decreasing workload?",
                "elements": ["elasticity"],
                "status": "open",
            },
        ]
    }
    features = {"features": ["scalability", "communication-data-throughput"]}
    candidates = []
    for fid in features["features"]:
        for entry in lookup_metrics(bundle, fid):
            candidates.append(
                {
                    "feature": fid,
                    "metric": entry.metric.name,
                    "benchmarks": [b.name for b in entry.benchmarks],
                }
            )
    selection = {"metrics": [METRIC], "benchmarks": ["iPerf"]}
    fc = lookup_factors(bundle, features["features"], selection["benchmarks"], selection["metrics"])
    factors_listing = {
        "resource": [n.name for n in fc.resource],
        "workload": [n.name for n in fc.workload],
        "quality": list(fc.quality),
    }
    factors_selection = {
        "factors": [
            {"name": "instance type", "kind": "resource", "levels": ["small", "large"], "role": "design"},
            {"name": "message size", "kind": "workload", "levels": ["1MB", "64MB"], "role": "design"},
        ]
    }
    spec = canned_design_spec(seed)
    plan = [r.to_dict() for r in full_factorial(spec)]
    design = {"design": spec.to_dict(), "plan": plan}
    records = fabricate_records(plan)
    implementation = {
        "records": records,
        "environment": {"host": "test-host", "timestamp": "2026-01-01T00:00:00+00:00"},
        "adapter": {"name": "fabricated", "command": "", "timeout": 1, "rules": [], "version": ""},
    }
    analysis_payload = build_analysis_payload(spec.factors, plan, records, spec.response_metrics)

    payloads = {
        StepId.REQUIREMENT_RECOGNITION: questions,
        StepId.FEATURE_IDENTIFICATION: features,
        StepId.METRICS_BENCHMARKS_LISTING: {"candidates": candidates},
        StepId.METRICS_BENCHMARKS_SELECTION: selection,
        StepId.FACTORS_LISTING: factors_listing,
        StepId.FACTORS_SELECTION: factors_selection,
        StepId.EXPERIMENTAL_DESIGN: design,
        StepId.EXPERIMENTAL_IMPLEMENTATION: implementation,
        StepId.EXPERIMENTAL_ANALYSIS: analysis_payload,
    }
    # conclusion payload needs the driven project state
    project = create_project(bundle, PROBLEM, seed)
    for step in STEP_ORDER[:-1]:
        project = submit_step_output(project, step, 0, payloads[step], bundle)
    payloads[StepId.CONCLUSION_DOCUMENTATION] = build_conclusion_payload(project)
    return payloads


def drive_project(
    bundle: KnowledgeBundle,
    payloads: dict[StepId, dict] | None = None,
    upto: StepId = StepId.CONCLUSION_DOCUMENTATION,
    seed: int = DESIGN_SEED,
    operator: str = "",
    problem: str = PROBLEM,
) -> Project:
    """Fresh in-memory project advanced through ``upto`` inclusive."""
    payloads = payloads or canned_payloads(bundle, seed)
    project = create_project(bundle, problem, seed, operator=operator)
    for step in STEP_ORDER:
        project = submit_step_output(project, step, 0, payloads[step], bundle, operator=operator)
        if step is upto:
            break
    return project
