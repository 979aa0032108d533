#!/usr/bin/env python3
"""End-to-end demo: a full evaluation against the deterministic fixture
benchmark, from requirement recognition to a rendered report and a
replayable template.

Usage:
    python scripts/run_demo_evaluation.py [--workdir DIR] [--seed N]

Writes the project store, the markdown report, and the template into the
working directory, then replays the template and prints the repeatability
score (which is 1.0: the fixture benchmark is deterministic).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from evalbench.analysis import build_analysis_payload
from evalbench.artefacts import load_bundle, lookup_factors, lookup_metrics, sample_bundle_path
from evalbench.doe import DesignSpec, Factor, full_factorial
from evalbench.engine import compare_runs
from evalbench.journal import ProjectStore
from evalbench.reporting import (
    build_conclusion_payload,
    generate_report,
    generate_template,
    instantiate_template,
    save_template,
)
from evalbench.runner import BenchmarkAdapter, ExtractionRule, capture_environment, execute_plan
from evalbench.steps import StepId

FIXTURE = Path(__file__).resolve().parent / "fixture_benchmark.py"
METRIC = "TCP/UDP/IP Transfer Speed"
OPERATOR = "demo"


def fixture_adapter() -> BenchmarkAdapter:
    command = (
        f'{sys.executable} {FIXTURE} --metric "{METRIC}" --unit Mbit/s '
        f'--factor "instance type={{factor:instance type}}" '
        f'--factor "message size={{factor:message size}}"'
    )
    return BenchmarkAdapter(
        name="fixture-benchmark",
        command=command,
        timeout=30,
        rules=(ExtractionRule(metric=METRIC, unit="Mbit/s",
                              pattern=r"TCP/UDP/IP Transfer Speed:\s*([0-9.]+)"),),
        version="1.0",
    )


def run_campaign(store, bundle, project_id, adapter):
    project = store.load(project_id)
    design = project.record_for(StepId.EXPERIMENTAL_DESIGN, project.iteration)
    spec = DesignSpec.from_dict(design.payload["design"])
    environment = capture_environment(adapter)
    store.start_campaign(project_id, environment.to_dict(), adapter.to_dict())
    result = execute_plan(
        design.payload["plan"], adapter, capture_env=False,
        response_metrics=spec.response_metrics,
        on_record=lambda rec: store.record_run(project_id, rec.to_dict()),
    )
    impl = {
        "records": [r.to_dict() for r in result.records],
        "environment": environment.to_dict(),
        "adapter": adapter.to_dict(),
    }
    store.submit(bundle, project_id, StepId.EXPERIMENTAL_IMPLEMENTATION,
                 project.iteration, impl, operator=OPERATOR)
    analysis = build_analysis_payload(
        spec.factors, design.payload["plan"], impl["records"], spec.response_metrics
    )
    project = store.submit(bundle, project_id, StepId.EXPERIMENTAL_ANALYSIS,
                           project.iteration, analysis, operator=OPERATOR)
    conclusion = build_conclusion_payload(project)
    return store.submit(bundle, project_id, StepId.CONCLUSION_DOCUMENTATION,
                        project.iteration, conclusion, operator=OPERATOR)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--workdir", default="demo-output")
    parser.add_argument("--seed", type=int, default=20260810)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(sample_bundle_path())
    store = ProjectStore(workdir / "store")
    adapter = fixture_adapter()

    problem = "expected to deliver reliable performance under highly variable load intensities"
    project = store.create_project(bundle, problem, args.seed, operator=OPERATOR)
    print(f"project: {project.id}")

    questions = {
        "questions": [
            {"id": "q1", "text": "How scalable is the system when dealing with "
             "different amounts of workloads?", "elements": ["scalability"], "status": "open"},
            {"id": "q2", "text": "How fast does the system scale with an increasing "
             "workload?", "elements": ["elasticity"], "status": "open"},
            {"id": "q3", "text": "How fast does the system scale with a decreasing "
             "workload?", "elements": ["elasticity"], "status": "open"},
        ]
    }
    store.submit(bundle, project.id, StepId.REQUIREMENT_RECOGNITION, 0, questions,
                 operator=OPERATOR)
    features = ["scalability", "communication-data-throughput"]
    store.submit(bundle, project.id, StepId.FEATURE_IDENTIFICATION, 0,
                 {"features": features}, operator=OPERATOR)
    candidates = [
        {"feature": fid, "metric": entry.metric.name,
         "benchmarks": [b.name for b in entry.benchmarks]}
        for fid in features for entry in lookup_metrics(bundle, fid)
    ]
    store.submit(bundle, project.id, StepId.METRICS_BENCHMARKS_LISTING, 0,
                 {"candidates": candidates}, operator=OPERATOR)
    store.submit(bundle, project.id, StepId.METRICS_BENCHMARKS_SELECTION, 0,
                 {"metrics": [METRIC], "benchmarks": ["iPerf"]}, operator=OPERATOR)
    found = lookup_factors(bundle, features, ["iPerf"], [METRIC])
    store.submit(bundle, project.id, StepId.FACTORS_LISTING, 0, {
        "resource": [n.name for n in found.resource],
        "workload": [n.name for n in found.workload],
        "quality": list(found.quality),
    }, operator=OPERATOR)
    store.submit(bundle, project.id, StepId.FACTORS_SELECTION, 0, {"factors": [
        {"name": "instance type", "kind": "resource",
         "levels": ["small", "large"], "role": "design"},
        {"name": "message size", "kind": "workload",
         "levels": ["1MB", "64MB"], "role": "design"},
    ]}, operator=OPERATOR)
    spec = DesignSpec(
        factors=(Factor("instance type", "resource", ("small", "large")),
                 Factor("message size", "workload", ("1MB", "64MB"))),
        replicates=3,
        seed=args.seed,
        response_metrics=(METRIC,),
    )
    plan = [r.to_dict() for r in full_factorial(spec)]
    store.submit(bundle, project.id, StepId.EXPERIMENTAL_DESIGN, 0,
                 {"design": spec.to_dict(), "plan": plan}, operator=OPERATOR)
    print(f"designed {len(plan)} runs; executing...")
    project = run_campaign(store, bundle, project.id, adapter)

    report_path = workdir / "report.md"
    report_path.write_text(generate_report(project, "markdown"), encoding="utf-8")
    print(f"report: {report_path}")

    template = generate_template(project, "scalability", bundle)
    template_path = workdir / f"{template.template_id}.json"
    save_template(template, workdir)  # workdir acts as a bundle-like target
    print(f"template: {workdir / 'templates' / (template.template_id + '.json')}")

    replay = instantiate_template(template, bundle, seed=args.seed,
                                  operator=OPERATOR, store=store)
    replay = run_campaign(store, bundle, replay.id, adapter)
    score = compare_runs(project, replay)
    print(f"replayed as {replay.id}; repeatability score: {score.overall:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
