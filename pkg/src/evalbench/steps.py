"""Evaluation step identities, ordering, and per-step payload contracts.

The workflow is a fixed sequence of nine working steps plus a terminal
conclusion step. Steps one through six are performed once per project;
the experimental chain (design, implementation, analysis) may repeat per
iteration, re-entered only from the analysis step.

Each step's output payload is a JSON-shaped dict with a fixed schema,
validated here both structurally and against the payloads of earlier steps
(selections must come from listed candidates, and so on).
"""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Any

from .errors import PayloadError

if TYPE_CHECKING:  # pragma: no cover
    from .artefacts import KnowledgeBundle
    from .engine import Project


class StepId(Enum):
    REQUIREMENT_RECOGNITION = "requirement-recognition"
    FEATURE_IDENTIFICATION = "feature-identification"
    METRICS_BENCHMARKS_LISTING = "metrics-benchmarks-listing"
    METRICS_BENCHMARKS_SELECTION = "metrics-benchmarks-selection"
    FACTORS_LISTING = "factors-listing"
    FACTORS_SELECTION = "factors-selection"
    EXPERIMENTAL_DESIGN = "experimental-design"
    EXPERIMENTAL_IMPLEMENTATION = "experimental-implementation"
    EXPERIMENTAL_ANALYSIS = "experimental-analysis"
    CONCLUSION_DOCUMENTATION = "conclusion-documentation"

    @classmethod
    def parse(cls, value: "StepId | str") -> "StepId":
        if isinstance(value, cls):
            return value
        for step in cls:
            if step.value == value or step.name == value:
                return step
        from .errors import UnknownIdError

        raise UnknownIdError(f"unknown step: {value!r}")


STEP_ORDER: tuple[StepId, ...] = tuple(StepId)
STEP_INDEX: dict[StepId, int] = {step: i for i, step in enumerate(STEP_ORDER)}

#: steps re-opened by each new iteration (the recursive experimental chain)
ITERATION_STEPS: frozenset[StepId] = frozenset(
    {
        StepId.EXPERIMENTAL_DESIGN,
        StepId.EXPERIMENTAL_IMPLEMENTATION,
        StepId.EXPERIMENTAL_ANALYSIS,
    }
)

#: first step of the iteration chain (target of the analysis -> design back-edge)
ITERATION_ENTRY = StepId.EXPERIMENTAL_DESIGN


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PayloadError(message)


def _require_keys(payload: Any, keys: set[str], step: StepId) -> None:
    _require(isinstance(payload, dict), f"{step.value}: payload must be an object")
    missing = keys - payload.keys()
    _require(not missing, f"{step.value}: payload missing keys {sorted(missing)}")


def _string_list(value: Any, what: str) -> list[str]:
    _require(isinstance(value, list), f"{what} must be a list")
    for item in value:
        _require(isinstance(item, str) and item.strip() != "", f"{what} must contain non-empty strings")
    return value


def _prior_payload(project: "Project", step: StepId, iteration: int = 0) -> dict:
    record = project.record_for(step, iteration)
    if record is None:
        raise PayloadError(f"internal: prior step {step.value} not found")
    return record.payload


def _validate_questions(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.REQUIREMENT_RECOGNITION
    _require_keys(payload, {"questions"}, step)
    questions = payload["questions"]
    _require(isinstance(questions, list) and questions, f"{step.value}: at least one question required")
    seen_ids: set[str] = set()
    for q in questions:
        _require(isinstance(q, dict), f"{step.value}: each question must be an object")
        _require(bool(str(q.get("text", "")).strip()), f"{step.value}: question text must be non-empty")
        qid = q.get("id")
        _require(isinstance(qid, str) and qid != "", f"{step.value}: question id must be a non-empty string")
        _require(qid not in seen_ids, f"{step.value}: duplicate question id {qid!r}")
        seen_ids.add(qid)
        _require(q.get("status", "open") in {"open", "answered"}, f"{step.value}: invalid question status")
        for eid in q.get("elements", []):
            _require(
                bundle.element(eid) is not None,
                f"{step.value}: question {qid!r} links unknown taxonomy element {eid!r}",
            )


def _validate_features(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.FEATURE_IDENTIFICATION
    _require_keys(payload, {"features"}, step)
    features = _string_list(payload["features"], f"{step.value}: features")
    _require(bool(features), f"{step.value}: at least one feature required")
    _require(len(set(features)) == len(features), f"{step.value}: duplicate feature ids")
    for fid in features:
        el = bundle.element(fid)
        _require(el is not None, f"{step.value}: unknown taxonomy element {fid!r}")
        _require(
            el.kind == "performance-feature",
            f"{step.value}: element {fid!r} is a {el.kind}, not a performance-feature",
        )


def _validate_listing(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.METRICS_BENCHMARKS_LISTING
    _require_keys(payload, {"candidates"}, step)
    candidates = payload["candidates"]
    _require(isinstance(candidates, list) and candidates, f"{step.value}: candidate list required")
    features = set(_prior_payload(project, StepId.FEATURE_IDENTIFICATION)["features"])
    for cand in candidates:
        _require(isinstance(cand, dict), f"{step.value}: each candidate must be an object")
        _require(
            cand.get("feature") in features,
            f"{step.value}: candidate references feature {cand.get('feature')!r} "
            "not identified in the feature step",
        )
        _require(
            isinstance(cand.get("metric"), str) and cand["metric"],
            f"{step.value}: candidate metric name required",
        )
        _string_list(cand.get("benchmarks", []), f"{step.value}: candidate benchmarks")


def _validate_selection(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.METRICS_BENCHMARKS_SELECTION
    _require_keys(payload, {"metrics", "benchmarks"}, step)
    metrics = _string_list(payload["metrics"], f"{step.value}: metrics")
    benchmarks = _string_list(payload["benchmarks"], f"{step.value}: benchmarks")
    _require(bool(metrics), f"{step.value}: at least one metric must be selected")
    listing = _prior_payload(project, StepId.METRICS_BENCHMARKS_LISTING)["candidates"]
    listed_metrics = {c["metric"] for c in listing}
    listed_benchmarks = {b for c in listing for b in c.get("benchmarks", [])}
    for m in metrics:
        _require(
            m in listed_metrics,
            f"{step.value}: metric {m!r} was not listed as a candidate",
        )
    for b in benchmarks:
        _require(
            b in listed_benchmarks,
            f"{step.value}: benchmark {b!r} was not listed as a candidate",
        )


def _validate_factors_listing(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.FACTORS_LISTING
    _require_keys(payload, {"resource", "workload", "quality"}, step)
    _string_list(payload["resource"], f"{step.value}: resource")
    _string_list(payload["workload"], f"{step.value}: workload")
    quality = _string_list(payload["quality"], f"{step.value}: quality")
    selected = set(_prior_payload(project, StepId.METRICS_BENCHMARKS_SELECTION)["metrics"])
    for q in quality:
        _require(
            q in selected,
            f"{step.value}: quality factor {q!r} is not a selected metric",
        )


_FACTOR_ROLES = {"design", "held-constant", "blocking"}


def _validate_factors_selection(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.FACTORS_SELECTION
    _require_keys(payload, {"factors"}, step)
    factors = payload["factors"]
    _require(isinstance(factors, list) and factors, f"{step.value}: at least one factor required")
    listing = _prior_payload(project, StepId.FACTORS_LISTING)
    listed = set(listing["resource"]) | set(listing["workload"]) | set(listing["quality"])
    seen: set[str] = set()
    for f in factors:
        _require(isinstance(f, dict), f"{step.value}: each factor must be an object")
        name = f.get("name")
        _require(isinstance(name, str) and name != "", f"{step.value}: factor name required")
        _require(name not in seen, f"{step.value}: duplicate factor {name!r}")
        seen.add(name)
        _require(
            name in listed,
            f"{step.value}: factor {name!r} was not listed in the factors-listing step",
        )
        _require(f.get("kind") in {"resource", "workload", "quality"}, f"{step.value}: invalid factor kind")
        _require(f.get("role", "design") in _FACTOR_ROLES, f"{step.value}: invalid factor role")
        levels = f.get("levels", [])
        _require(isinstance(levels, list), f"{step.value}: factor levels must be a list")
        if f.get("role", "design") in {"design", "blocking"}:
            _require(
                len(levels) >= 2,
                f"{step.value}: factor {name!r} needs >=2 levels for role {f.get('role', 'design')!r}",
            )
        _require(
            len({str(l) for l in levels}) == len(levels),
            f"{step.value}: factor {name!r} has duplicate levels",
        )


def _validate_design(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    from .doe import DesignSpec, full_factorial

    step = StepId.EXPERIMENTAL_DESIGN
    _require_keys(payload, {"design", "plan"}, step)
    try:
        spec = DesignSpec.from_dict(payload["design"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PayloadError(f"{step.value}: malformed design spec: {exc}") from exc

    selection = _prior_payload(project, StepId.FACTORS_SELECTION)["factors"]
    by_name = {f["name"]: f for f in selection}
    for factor in spec.factors:
        chosen = by_name.get(factor.name)
        _require(
            chosen is not None,
            f"{step.value}: design factor {factor.name!r} was not selected in the factors step",
        )
        _require(
            chosen.get("role", "design") == "design",
            f"{step.value}: factor {factor.name!r} was selected with role "
            f"{chosen.get('role', 'design')!r}, not design",
        )
        _require(
            [str(l) for l in factor.levels] == [str(l) for l in chosen["levels"]],
            f"{step.value}: levels of factor {factor.name!r} differ from the selected levels",
        )
    if spec.blocking is not None:
        chosen = by_name.get(spec.blocking.name)
        _require(
            chosen is not None and chosen.get("role") == "blocking",
            f"{step.value}: blocking factor {spec.blocking.name!r} was not selected with role blocking",
        )
    metrics = set(_prior_payload(project, StepId.METRICS_BENCHMARKS_SELECTION)["metrics"])
    _require(bool(spec.response_metrics), f"{step.value}: at least one response metric required")
    for m in spec.response_metrics:
        _require(
            m in metrics,
            f"{step.value}: response metric {m!r} is not among the selected metrics",
        )
    expected = [r.to_dict() for r in full_factorial(spec)]
    _require(
        payload["plan"] == expected,
        f"{step.value}: plan does not match the seeded full factorial of the design spec",
    )


def _validate_implementation(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.EXPERIMENTAL_IMPLEMENTATION
    _require_keys(payload, {"records", "environment", "adapter"}, step)
    iteration = project.iteration
    design_payload = _prior_payload(project, StepId.EXPERIMENTAL_DESIGN, iteration)
    plan = design_payload["plan"]
    records = payload["records"]
    _require(isinstance(records, list), f"{step.value}: records must be a list")
    _require(
        len(records) == len(plan),
        f"{step.value}: {len(records)} records for a plan of {len(plan)} runs",
    )
    metrics = design_payload["design"]["response_metrics"]
    for rec, planned in zip(records, plan):
        _require(isinstance(rec, dict), f"{step.value}: each record must be an object")
        _require(
            rec.get("index") == planned["index"],
            f"{step.value}: record index {rec.get('index')!r} out of order "
            f"(expected {planned['index']})",
        )
        _require(
            rec.get("combination") == planned["combination"],
            f"{step.value}: record {rec.get('index')} combination differs from the plan",
        )
        status = rec.get("status")
        _require(status in {"ok", "failed", "timeout"}, f"{step.value}: invalid run status {status!r}")
        if status == "ok":
            measured = rec.get("measurements", {})
            for m in metrics:
                _require(
                    m in measured,
                    f"{step.value}: ok record {rec.get('index')} lacks metric {m!r}",
                )
        else:
            _require(
                bool(rec.get("failure", "")),
                f"{step.value}: non-ok record {rec.get('index')} lacks failure detail",
            )
    _require(isinstance(payload["environment"], dict), f"{step.value}: environment must be an object")
    _require(isinstance(payload["adapter"], dict), f"{step.value}: adapter must be an object")


_ANALYSIS_KEYS = {"descriptive", "anova", "effects", "pareto", "boosting", "charts"}


def _validate_analysis(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.EXPERIMENTAL_ANALYSIS
    _require_keys(payload, {"results"}, step)
    results = payload["results"]
    _require(isinstance(results, dict) and results, f"{step.value}: results object required")
    unknown = results.keys() - _ANALYSIS_KEYS
    _require(not unknown, f"{step.value}: unknown result kinds {sorted(unknown)}")


def _validate_conclusion(payload, bundle: "KnowledgeBundle", project: "Project") -> None:
    step = StepId.CONCLUSION_DOCUMENTATION
    _require_keys(payload, {"answers", "findings"}, step)
    _require(isinstance(payload["findings"], str), f"{step.value}: findings must be text")
    answers = payload["answers"]
    _require(isinstance(answers, list), f"{step.value}: answers must be a list")
    questions = {q["id"] for q in _prior_payload(project, StepId.REQUIREMENT_RECOGNITION)["questions"]}
    answered: set[str] = set()
    for ans in answers:
        _require(isinstance(ans, dict), f"{step.value}: each answer must be an object")
        qid = ans.get("question_id")
        _require(qid in questions, f"{step.value}: answer references unknown question {qid!r}")
        _require(qid not in answered, f"{step.value}: duplicate answer for question {qid!r}")
        answered.add(qid)
        status = ans.get("status")
        _require(status in {"answered", "open"}, f"{step.value}: invalid answer status {status!r}")
        if status == "answered":
            _require(
                bool(ans.get("evidence")),
                f"{step.value}: answered question {qid!r} cites no evidence",
            )
        else:
            _require(
                bool(str(ans.get("reason", "")).strip()),
                f"{step.value}: open question {qid!r} needs a stated reason",
            )
    missing = questions - answered
    _require(not missing, f"{step.value}: no answer for questions {sorted(missing)}")


_VALIDATORS = {
    StepId.REQUIREMENT_RECOGNITION: _validate_questions,
    StepId.FEATURE_IDENTIFICATION: _validate_features,
    StepId.METRICS_BENCHMARKS_LISTING: _validate_listing,
    StepId.METRICS_BENCHMARKS_SELECTION: _validate_selection,
    StepId.FACTORS_LISTING: _validate_factors_listing,
    StepId.FACTORS_SELECTION: _validate_factors_selection,
    StepId.EXPERIMENTAL_DESIGN: _validate_design,
    StepId.EXPERIMENTAL_IMPLEMENTATION: _validate_implementation,
    StepId.EXPERIMENTAL_ANALYSIS: _validate_analysis,
    StepId.CONCLUSION_DOCUMENTATION: _validate_conclusion,
}


def validate_payload(step: StepId, payload: dict, bundle: "KnowledgeBundle", project: "Project") -> None:
    """Raise :class:`PayloadError` unless the payload honors the step contract."""
    _VALIDATORS[step](payload, bundle, project)
