"""Reports, question answering, and reusable evaluation templates.

Reports are deterministic renderings of the project journal: equal project
content yields byte-identical documents. A ``redact_volatile`` mode blanks
wall-clock timestamps and the project id so two replays of the same
evaluation can be compared byte-for-byte on their shared content.

A template captures everything needed to re-run one feature's evaluation
without the source project: the recorded selections of the shared steps,
the seeded design spec, the adapter definition, the environment
requirements, and the analysis recipe. Instantiating a template replays
the shared steps into a fresh project and pre-fills the design step,
leaving implementation and analysis pending.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .artefacts import KnowledgeBundle
from .common import content_digest
from .doe import DesignSpec, full_factorial
from .engine import Project, create_project, submit_step_output
from .errors import (
    BundleParseError,
    DomainMismatchError,
    GatingError,
    PayloadError,
    UnknownIdError,
)
from .journal import ProjectStore
from .steps import STEP_INDEX, StepId

_SHARED_STEPS: tuple[StepId, ...] = (
    StepId.REQUIREMENT_RECOGNITION,
    StepId.FEATURE_IDENTIFICATION,
    StepId.METRICS_BENCHMARKS_LISTING,
    StepId.METRICS_BENCHMARKS_SELECTION,
    StepId.FACTORS_LISTING,
    StepId.FACTORS_SELECTION,
)

_VOLATILE_KEYS = frozenset(
    {"timestamp", "started_at", "finished_at", "completed_at", "captured_at"}
)


def _fmt(x: float) -> str:
    return format(x, ".6g")


@dataclass(frozen=True)
class QuestionAnswer:
    question_id: str
    status: str  # "answered" | "open"
    text: str
    evidence: tuple[str, ...] = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "status": self.status,
            "text": self.text,
            "evidence": list(self.evidence),
            "reason": self.reason,
        }


def _analysis_artifact_ids(project: Project, iteration: int) -> list[str]:
    record = project.record_for(StepId.EXPERIMENTAL_ANALYSIS, iteration)
    if record is None:
        return []
    ids: list[str] = []
    results = record.payload.get("results", {})
    for metric in sorted(results.get("descriptive", {})):
        ids.append(f"analysis:{iteration}:descriptive:{metric}")
    for metric in sorted(results.get("anova", {})):
        for factor in sorted(results["anova"][metric]):
            ids.append(f"analysis:{iteration}:anova:{metric}:{factor}")
    for metric in sorted(results.get("effects", {})):
        ids.append(f"analysis:{iteration}:effects:{metric}")
    for metric in sorted(results.get("pareto", {})):
        ids.append(f"analysis:{iteration}:pareto:{metric}")
    for chart in results.get("charts", []):
        if "id" in chart:
            ids.append(f"analysis:{iteration}:{chart['id']}")
    return ids


def resolve_evidence(project: Project, ref: str) -> bool:
    """True when an evidence reference names an artifact of this project."""
    parts = ref.split(":")
    if not parts:
        return False
    if parts[0] == "step" and len(parts) >= 3:
        try:
            return project.completed(StepId.parse(parts[2]), int(parts[1]))
        except Exception:
            return False
    if parts[0] == "run" and len(parts) == 3:
        record = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, int(parts[1]))
        if record is None:
            return False
        return any(str(r.get("index")) == parts[2] for r in record.payload["records"])
    if parts[0] == "analysis" and len(parts) >= 3:
        return ref in _analysis_artifact_ids(project, int(parts[1]))
    return False


def answer_questions(project: Project) -> list[QuestionAnswer]:
    """One answer per requirement question, built from the current
    iteration's analysis via a fixed phrase template.

    A question counts as addressed when the features it links (through its
    taxonomy elements) intersect the identified features; everything else
    is flagged open with the reason stated.
    """
    iteration = project.iteration
    if not project.completed(StepId.EXPERIMENTAL_ANALYSIS, iteration):
        raise GatingError(
            f"experimental-analysis of iteration {iteration} is not complete",
            missing_step=StepId.EXPERIMENTAL_ANALYSIS.value,
        )
    questions = project.record_for(StepId.REQUIREMENT_RECOGNITION, 0).payload["questions"]
    features = set(project.record_for(StepId.FEATURE_IDENTIFICATION, 0).payload["features"])
    analysis = project.record_for(StepId.EXPERIMENTAL_ANALYSIS, iteration).payload
    results = analysis.get("results", {})
    artifact_ids = _analysis_artifact_ids(project, iteration)
    base_evidence = [f"step:{iteration}:{StepId.EXPERIMENTAL_IMPLEMENTATION.value}"]

    summaries: list[str] = []
    for metric in sorted(results.get("descriptive", {})):
        stats = results["descriptive"][metric]
        lo, hi = stats["ci95"]
        summaries.append(
            f"{metric}: mean {_fmt(stats['mean'])} "
            f"(n={stats['n']}, 95% CI [{_fmt(lo)}, {_fmt(hi)}])"
        )
    summary = "; ".join(summaries) if summaries else "see analysis artifacts"

    answers: list[QuestionAnswer] = []
    for question in questions:
        linked = set(question.get("elements", []))
        if linked & features:
            answers.append(
                QuestionAnswer(
                    question_id=question["id"],
                    status="answered",
                    text=f"{question['text']} -- {summary}",
                    evidence=tuple(base_evidence + artifact_ids),
                )
            )
        else:
            answers.append(
                QuestionAnswer(
                    question_id=question["id"],
                    status="open",
                    text=question["text"],
                    reason="no experiment in this evaluation addressed the linked features",
                )
            )
    return answers


def build_conclusion_payload(project: Project, findings: str = "") -> dict:
    """Conclusion-step payload with template-generated answers."""
    answers = answer_questions(project)
    answered = sum(1 for a in answers if a.status == "answered")
    default_findings = (
        f"{answered} of {len(answers)} requirement questions answered from "
        f"{project.iteration + 1} iteration(s) of experiments."
    )
    return {
        "answers": [a.to_dict() for a in answers],
        "findings": findings or default_findings,
    }


# ---------------------------------------------------------------------------
# Report rendering


def _redact(value, project_id: str):
    if isinstance(value, dict):
        return {
            k: "<volatile>" if k in _VOLATILE_KEYS else _redact(v, project_id)
            for k, v in value.items()
        }
    if isinstance(value, list):
        return [_redact(v, project_id) for v in value]
    if isinstance(value, str) and project_id and project_id in value:
        return value.replace(project_id, "<project>")
    return value


def _payload_block(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)


def generate_report(
    project: Project,
    fmt: str = "markdown",
    redact_volatile: bool = False,
) -> str:
    """Render the live log and step records as one structured document.

    Formats: ``markdown`` or ``text``. Rendering is deterministic; with
    ``redact_volatile`` wall-clock fields and the project id are blanked so
    replayed evaluations compare byte-identically.
    """
    if fmt not in {"markdown", "text"}:
        raise PayloadError(f"unsupported report format {fmt!r}")
    data = project.to_dict()
    if redact_volatile:
        data = _redact(data, project.id)
        data["id"] = "<project>"
        for entry in data["log"]:
            entry["timestamp"] = "<volatile>"
        for record in data["records"]:
            record["completed_at"] = "<volatile>"
            # input digests hash the previous payload, which may contain
            # wall-clock fields; the payloads themselves are rendered in full
            record["input_digest"] = "<volatile>"

    md = fmt == "markdown"
    lines: list[str] = []

    def heading(level: int, text: str) -> None:
        if md:
            lines.append("#" * level + " " + text)
        else:
            underline = ("=" if level == 1 else "-") * len(text)
            lines.append(text)
            lines.append(underline)
        lines.append("")

    heading(1, f"Evaluation report: {data['id']}")
    lines.append(f"- domain: {data['bundle_domain']} (bundle {data['bundle_version']})")
    lines.append(f"- seed: {data['seed']}")
    lines.append(f"- iterations: {data['iteration'] + 1}")
    lines.append(f"- problem: {data['problem']}")
    if not data["concluded"]:
        lines.append("")
        lines.append("**INCOMPLETE**: this evaluation has not reached its conclusion step."
                     if md else "INCOMPLETE: this evaluation has not reached its conclusion step.")
    lines.append("")

    records = sorted(
        data["records"], key=lambda r: (STEP_INDEX[StepId.parse(r["step"])], r["iteration"])
    )
    for record in records:
        step = StepId.parse(record["step"])
        label = step.value
        if step.value != StepId.CONCLUSION_DOCUMENTATION.value:
            title = f"Step: {label} (iteration {record['iteration']})"
        else:
            title = "Conclusions"
        heading(2, title)
        lines.append(f"- completed: {record['completed_at']}")
        lines.append(f"- operator: {record['operator'] or 'anonymous'}")
        lines.append(f"- input digest: {record['input_digest'] or '(none)'}")
        lines.append("")
        if md:
            lines.append("```json")
        lines.append(_payload_block(record["payload"]))
        if md:
            lines.append("```")
        lines.append("")

    heading(2, "Live log")
    for entry in data["log"]:
        scope = entry["step"] or "project"
        lines.append(
            f"- [{entry['timestamp']}] it{entry['iteration']} {scope}: "
            f"{entry['action']} -- {entry['detail']}"
        )
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Evaluation templates


@dataclass(frozen=True)
class EvaluationTemplate:
    template_id: str
    feature_id: str
    domain: str
    bundle_version: str
    environment_requirements: dict
    instructions: str
    design: dict
    adapter: dict
    analysis_recipe: dict
    selections: dict  # problem text + payloads of the shared steps
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "feature_id": self.feature_id,
            "domain": self.domain,
            "bundle_version": self.bundle_version,
            "environment_requirements": self.environment_requirements,
            "instructions": self.instructions,
            "design": self.design,
            "adapter": self.adapter,
            "analysis_recipe": self.analysis_recipe,
            "selections": self.selections,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationTemplate":
        return cls(
            template_id=data["template_id"],
            feature_id=data["feature_id"],
            domain=data["domain"],
            bundle_version=data.get("bundle_version", ""),
            environment_requirements=data.get("environment_requirements", {}),
            instructions=data.get("instructions", ""),
            design=data["design"],
            adapter=data.get("adapter", {}),
            analysis_recipe=data.get("analysis_recipe", {}),
            selections=data.get("selections", {}),
            provenance=data.get("provenance", {}),
        )

    def content_digest(self) -> str:
        return content_digest(self.to_dict())


def generate_template(project: Project, feature_id: str, bundle: KnowledgeBundle) -> EvaluationTemplate:
    """Freeze the current iteration's experimental chain into a template."""
    iteration = project.iteration
    for step in (StepId.EXPERIMENTAL_DESIGN, StepId.EXPERIMENTAL_IMPLEMENTATION, StepId.EXPERIMENTAL_ANALYSIS):
        if not project.completed(step, iteration):
            raise GatingError(
                f"cannot build a template: {step.value} of iteration {iteration} "
                "is not complete",
                missing_step=step.value,
            )
    features = project.record_for(StepId.FEATURE_IDENTIFICATION, 0).payload["features"]
    feature = bundle.resolve_feature(feature_id)
    if feature.id not in features:
        raise UnknownIdError(
            f"feature {feature_id!r} was not evaluated in project {project.id}"
        )
    design_payload = project.record_for(StepId.EXPERIMENTAL_DESIGN, iteration).payload
    impl_payload = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, iteration).payload
    analysis_payload = project.record_for(StepId.EXPERIMENTAL_ANALYSIS, iteration).payload

    environment = dict(impl_payload.get("environment", {}))
    environment.pop("timestamp", None)  # requirements, not a moment in time
    adapter = impl_payload.get("adapter", {})
    selections = {"problem": project.problem}
    for step in _SHARED_STEPS:
        selections[step.value] = project.record_for(step, 0).payload

    recipe = {
        "operations": sorted(analysis_payload.get("results", {}).keys()),
        "response_metrics": list(design_payload["design"].get("response_metrics", [])),
    }
    instructions = (
        f"Re-create the seeded run plan from the archived design spec, execute it "
        f"with adapter {adapter.get('name', '?')!r} strictly in plan order, then "
        f"apply the archived analysis recipe to the collected records."
    )
    body = {
        "feature_id": feature.id,
        "domain": project.bundle_domain,
        "bundle_version": project.bundle_version,
        "environment_requirements": environment,
        "instructions": instructions,
        "design": design_payload["design"],
        "adapter": adapter,
        "analysis_recipe": recipe,
        "selections": selections,
        "provenance": {
            "project_id": project.id,
            "design_digest": content_digest(design_payload["design"]),
            "plan_digest": content_digest(design_payload["plan"]),
            "records_digest": content_digest(impl_payload["records"]),
        },
    }
    template_id = "tpl-" + content_digest(body)[:12]
    return EvaluationTemplate(template_id=template_id, **body)


def instantiate_template(
    template: EvaluationTemplate,
    bundle: KnowledgeBundle,
    seed: Optional[int] = None,
    operator: str = "",
    project_id: Optional[str] = None,
    store: Optional[ProjectStore] = None,
) -> Project:
    """New project with the shared steps pre-filled and the design step
    submitted verbatim from the template; implementation and analysis stay
    pending. The project seed is freshly assigned unless supplied (the
    design keeps its own archived seed, so the run plan is unchanged)."""
    if bundle.domain != template.domain:
        raise DomainMismatchError(
            f"template is for domain {template.domain!r}, bundle is {bundle.domain!r}"
        )
    project_seed = seed if seed is not None else secrets.randbits(63)
    operator = operator or f"template:{template.template_id}"
    problem = template.selections.get("problem", "")

    if store is not None:
        project = store.create_project(bundle, problem, project_seed, operator, project_id)
        submit = lambda step, payload: store.submit(
            bundle, project.id, step, 0, payload, operator
        )
    else:
        project = create_project(bundle, problem, project_seed, operator, project_id)
        submit = lambda step, payload: submit_step_output(
            project, step, 0, payload, bundle, operator
        )

    for step in _SHARED_STEPS:
        payload = template.selections.get(step.value)
        if payload is None:
            raise PayloadError(f"template lacks the recorded payload for step {step.value}")
        project = submit(step, payload)

    spec = DesignSpec.from_dict(template.design)
    plan = [r.to_dict() for r in full_factorial(spec)]
    project = submit(
        StepId.EXPERIMENTAL_DESIGN, {"design": template.design, "plan": plan}
    )
    if bundle.version != template.bundle_version:
        note = (
            f"template {template.template_id} was built against bundle "
            f"{template.bundle_version}; instantiated on {bundle.version}"
        )
        if store is not None:
            project = store.add_note(project.id, note, action="version-warning")
        else:
            from .engine import _note_event, apply_event

            project = apply_event(project, _note_event(project, note, action="version-warning"))
    return project


# ---------------------------------------------------------------------------
# Template files (they live in the bundle's templates directory)


def save_template(template: EvaluationTemplate, bundle_path: str | Path) -> Path:
    tdir = Path(bundle_path) / "templates"
    tdir.mkdir(parents=True, exist_ok=True)
    path = tdir / f"{template.template_id}.json"
    path.write_text(
        json.dumps(template.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def load_template(path: str | Path) -> EvaluationTemplate:
    file = Path(path)
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleParseError(f"cannot read template {file}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"malformed template JSON in {file}: {exc}") from exc
    try:
        return EvaluationTemplate.from_dict(data)
    except KeyError as exc:
        raise BundleParseError(f"template {file} is missing field {exc}") from exc


def find_template(bundle: KnowledgeBundle, template_id: str) -> EvaluationTemplate:
    for raw in bundle.templates:
        if raw.get("template_id") == template_id:
            return EvaluationTemplate.from_dict(raw)
    raise UnknownIdError(f"unknown template: {template_id!r}")
