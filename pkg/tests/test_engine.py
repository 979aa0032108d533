"""Workflow gating, payload contracts, logging, replay, and run comparison."""

import copy

import pytest

from evalbench.engine import (
    begin_iteration,
    compare_runs,
    create_project,
    submit_step_output,
)
from evalbench.errors import (
    DomainMismatchError,
    DuplicateSubmissionError,
    GatingError,
    IncompleteProjectError,
    PayloadError,
)
from evalbench.steps import STEP_ORDER, StepId
from helpers import PROBLEM, canned_payloads, drive_project


@pytest.fixture(scope="module")
def payloads(bundle):
    return canned_payloads(bundle)


def strip_volatile(project_dict):
    data = copy.deepcopy(project_dict)
    data.pop("id")
    for rec in data["records"]:
        rec.pop("completed_at")
    for entry in data["log"]:
        entry.pop("timestamp")
    return data


class TestCreateProject:
    def test_new_project_awaits_step_one(self, bundle):
        project = create_project(bundle, PROBLEM, seed=1)
        assert project.iteration == 0
        assert project.records == []
        assert len(project.log) == 1
        assert project.log[0].action == "project-created"

    def test_same_inputs_same_seed_identical_modulo_id_and_time(self, bundle):
        a = create_project(bundle, PROBLEM, seed=9)
        b = create_project(bundle, PROBLEM, seed=9)
        assert a.id != b.id
        assert strip_volatile(a.to_dict()) == strip_volatile(b.to_dict())

    def test_empty_problem_rejected(self, bundle):
        with pytest.raises(PayloadError):
            create_project(bundle, "   ", seed=1)


class TestGating:
    def test_feature_step_before_requirements_names_the_gap(self, bundle, payloads):
        project = create_project(bundle, PROBLEM, seed=1)
        with pytest.raises(GatingError) as err:
            submit_step_output(
                project, StepId.FEATURE_IDENTIFICATION, 0,
                payloads[StepId.FEATURE_IDENTIFICATION], bundle,
            )
        assert err.value.missing_step == StepId.REQUIREMENT_RECOGNITION.value

    def test_questions_then_features_accepted(self, bundle, payloads):
        project = create_project(bundle, PROBLEM, seed=1)
        project = submit_step_output(
            project, StepId.REQUIREMENT_RECOGNITION, 0,
            payloads[StepId.REQUIREMENT_RECOGNITION], bundle,
        )
        project = submit_step_output(
            project, StepId.FEATURE_IDENTIFICATION, 0,
            {"features": ["scalability", "elasticity"]}, bundle,
        )
        assert project.completed(StepId.FEATURE_IDENTIFICATION, 0)

    def test_selection_must_be_subset_of_listing(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.METRICS_BENCHMARKS_LISTING)
        # independent subset-check oracle over the listed candidates
        listed = {c["metric"] for c in payloads[StepId.METRICS_BENCHMARKS_LISTING]["candidates"]}
        assert "Latency" not in listed
        with pytest.raises(PayloadError):
            submit_step_output(
                project, StepId.METRICS_BENCHMARKS_SELECTION, 0,
                {"metrics": ["Latency"], "benchmarks": []}, bundle,
            )

    def test_duplicate_submission_rejected(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.REQUIREMENT_RECOGNITION)
        with pytest.raises(DuplicateSubmissionError):
            submit_step_output(
                project, StepId.REQUIREMENT_RECOGNITION, 0,
                payloads[StepId.REQUIREMENT_RECOGNITION], bundle,
            )

    def test_no_submissions_after_conclusion(self, bundle, payloads):
        project = drive_project(bundle, payloads)
        with pytest.raises(GatingError):
            begin_iteration(project)

    def test_log_grows_with_every_state_change(self, bundle, payloads):
        project = create_project(bundle, PROBLEM, seed=2)
        sizes = [len(project.log)]
        for step in STEP_ORDER:
            project = submit_step_output(project, step, 0, payloads[step], bundle)
            sizes.append(len(project.log))
        assert sizes == sorted(sizes)
        assert all(b > a for a, b in zip(sizes, sizes[1:]))
        times = [e.timestamp for e in project.log]
        assert times == sorted(times)

    def test_input_digest_chains_previous_payload(self, bundle, payloads):
        from evalbench.common import content_digest, text_digest

        project = drive_project(bundle, payloads, upto=StepId.FEATURE_IDENTIFICATION)
        first = project.record_for(StepId.REQUIREMENT_RECOGNITION, 0)
        second = project.record_for(StepId.FEATURE_IDENTIFICATION, 0)
        assert first.input_digest == text_digest(PROBLEM)
        assert second.input_digest == content_digest(first.payload)


class TestIteration:
    def test_back_edge_reopens_design(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.EXPERIMENTAL_ANALYSIS)
        project = begin_iteration(project)
        assert project.iteration == 1
        # steps 7..9 accept fresh submissions for iteration 1
        project = submit_step_output(
            project, StepId.EXPERIMENTAL_DESIGN, 1,
            payloads[StepId.EXPERIMENTAL_DESIGN], bundle,
        )
        assert project.completed(StepId.EXPERIMENTAL_DESIGN, 1)

    def test_begin_iteration_mid_design_rejected(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.EXPERIMENTAL_DESIGN)
        with pytest.raises(GatingError):
            begin_iteration(project)

    def test_double_begin_rejected(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.EXPERIMENTAL_ANALYSIS)
        project = begin_iteration(project)
        with pytest.raises(GatingError):
            begin_iteration(project)

    def test_shared_steps_not_resubmittable_in_later_iterations(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.EXPERIMENTAL_ANALYSIS)
        project = begin_iteration(project)
        with pytest.raises(GatingError):
            submit_step_output(
                project, StepId.FEATURE_IDENTIFICATION, 1,
                payloads[StepId.FEATURE_IDENTIFICATION], bundle,
            )

    def test_iteration_mismatch_rejected(self, bundle, payloads):
        project = drive_project(bundle, payloads, upto=StepId.FACTORS_SELECTION)
        with pytest.raises(GatingError):
            submit_step_output(
                project, StepId.EXPERIMENTAL_DESIGN, 1,
                payloads[StepId.EXPERIMENTAL_DESIGN], bundle,
            )


class TestReplay:
    def test_replaying_the_recorded_calls_reproduces_payloads(self, bundle, payloads):
        first = drive_project(bundle, payloads, seed=77)
        second = drive_project(bundle, payloads, seed=77)
        assert [r.payload for r in first.records] == [r.payload for r in second.records]
        assert [r.input_digest for r in first.records] == [
            r.input_digest for r in second.records
        ]

class TestCompareRuns:
    def test_self_comparison_is_exactly_one(self, bundle, payloads):
        project = drive_project(bundle, payloads)
        report = compare_runs(project, project)
        assert report.overall == 1.0
        assert all(s.score == 1.0 for s in report.steps)

    def test_one_question_of_three_differs_gives_half(self, bundle, payloads):
        base = drive_project(bundle, payloads)
        altered = copy.deepcopy(payloads)
        altered[StepId.REQUIREMENT_RECOGNITION] = {
            "questions": [
                dict(payloads[StepId.REQUIREMENT_RECOGNITION]["questions"][0]),
                dict(payloads[StepId.REQUIREMENT_RECOGNITION]["questions"][1]),
                {
                    "id": "q3",
                    "text": "How does performance vary across regions?",
                    "elements": ["variability"],
                    "status": "open",
                },
            ]
        }
        other = drive_project(bundle, altered)
        report = compare_runs(base, other)
        step1 = next(s for s in report.steps if s.step is StepId.REQUIREMENT_RECOGNITION)
        # Jaccard oracle: |A & B| / |A | B| = 2 / 4
        assert step1.score == pytest.approx(0.5)

    def test_symmetry(self, bundle, payloads):
        base = drive_project(bundle, payloads)
        altered = copy.deepcopy(payloads)
        altered[StepId.METRICS_BENCHMARKS_SELECTION] = {
            "metrics": ["TCP/UDP/IP Transfer Speed", "MPI Transfer Speed"],
            "benchmarks": ["iPerf"],
        }
        other = drive_project(bundle, altered)
        ab = compare_runs(base, other).to_dict()
        ba = compare_runs(other, base).to_dict()
        assert ab == ba

    def test_incomplete_project_rejected(self, bundle, payloads):
        done = drive_project(bundle, payloads)
        partial = drive_project(bundle, payloads, upto=StepId.EXPERIMENTAL_ANALYSIS)
        with pytest.raises(IncompleteProjectError):
            compare_runs(done, partial)

    def test_domain_mismatch_rejected(self, bundle, payloads, tmp_path):
        done = drive_project(bundle, payloads)
        other = drive_project(bundle, payloads)
        other.bundle_domain = "other-domain"
        with pytest.raises(DomainMismatchError):
            compare_runs(done, other)

    def test_numeric_tolerance_banding(self, bundle, payloads):
        base = drive_project(bundle, payloads)
        jittered = copy.deepcopy(payloads)
        records = copy.deepcopy(jittered[StepId.EXPERIMENTAL_IMPLEMENTATION]["records"])
        for rec in records:
            for cell in rec["measurements"].values():
                cell["value"] *= 1.01  # inside the default 5% band
        jittered[StepId.EXPERIMENTAL_IMPLEMENTATION] = {
            **jittered[StepId.EXPERIMENTAL_IMPLEMENTATION],
            "records": records,
        }
        from evalbench.analysis import build_analysis_payload
        from evalbench.doe import DesignSpec

        spec = DesignSpec.from_dict(jittered[StepId.EXPERIMENTAL_DESIGN]["design"])
        jittered[StepId.EXPERIMENTAL_ANALYSIS] = build_analysis_payload(
            spec.factors,
            jittered[StepId.EXPERIMENTAL_DESIGN]["plan"],
            records,
            spec.response_metrics,
        )
        other = drive_project(bundle, jittered)
        report = compare_runs(base, other)
        impl = next(s for s in report.steps if s.step is StepId.EXPERIMENTAL_IMPLEMENTATION)
        assert impl.score == 1.0
        tight = compare_runs(base, other, numeric_rtol=0.001)
        impl_tight = next(
            s for s in tight.steps if s.step is StepId.EXPERIMENTAL_IMPLEMENTATION
        )
        assert impl_tight.score < 1.0
