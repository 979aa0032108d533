"""The gated evaluation workflow: projects, events, and run comparison.

A project advances by appending events; every state change is an event and
the event sequence is the authoritative history (see
:mod:`evalbench.journal` for persistence). Events carry their timestamps,
so replaying a journal reconstructs a byte-identical project snapshot.

Gating: a step may be recorded only when every earlier step of its
iteration is complete. Steps one through six belong to iteration zero and
are shared by all iterations; the design/implementation/analysis chain
re-opens per iteration, and the only re-entry edge is analysis back to
design (via :func:`begin_iteration`). The conclusion step is terminal.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .artefacts import KnowledgeBundle
from .common import canonical_json, content_digest, text_digest, utc_now_iso
from .errors import (
    DomainMismatchError,
    DuplicateSubmissionError,
    GatingError,
    IncompleteProjectError,
    PayloadError,
)
from .steps import (
    ITERATION_ENTRY,
    ITERATION_STEPS,
    STEP_INDEX,
    STEP_ORDER,
    StepId,
    validate_payload,
)

PRE_ITERATION_STEPS: tuple[StepId, ...] = STEP_ORDER[: STEP_INDEX[ITERATION_ENTRY]]


@dataclass
class StepRecord:
    step: StepId
    iteration: int
    input_digest: str
    payload: dict
    completed_at: str
    operator: str = ""

    def to_dict(self) -> dict:
        return {
            "step": self.step.value,
            "iteration": self.iteration,
            "input_digest": self.input_digest,
            "payload": self.payload,
            "completed_at": self.completed_at,
            "operator": self.operator,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StepRecord":
        return cls(
            step=StepId.parse(data["step"]),
            iteration=data["iteration"],
            input_digest=data["input_digest"],
            payload=data["payload"],
            completed_at=data["completed_at"],
            operator=data.get("operator", ""),
        )


@dataclass
class LogEntry:
    timestamp: str
    step: Optional[str]
    iteration: int
    action: str
    detail: str
    attachments: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "step": self.step,
            "iteration": self.iteration,
            "action": self.action,
            "detail": self.detail,
            "attachments": list(self.attachments),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogEntry":
        return cls(
            timestamp=data["timestamp"],
            step=data.get("step"),
            iteration=data["iteration"],
            action=data["action"],
            detail=data["detail"],
            attachments=list(data.get("attachments", [])),
        )


@dataclass
class Event:
    seq: int
    kind: str  # created | step | iteration | campaign | run | note
    timestamp: str
    data: dict
    request_id: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "timestamp": self.timestamp,
            "data": self.data,
            "request_id": self.request_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Event":
        return cls(
            seq=data["seq"],
            kind=data["kind"],
            timestamp=data["timestamp"],
            data=data["data"],
            request_id=data.get("request_id"),
        )


@dataclass
class Project:
    id: str
    bundle_domain: str
    bundle_version: str
    problem: str
    seed: int
    iteration: int = 0
    records: list[StepRecord] = field(default_factory=list)
    log: list[LogEntry] = field(default_factory=list)
    pending_runs: list[dict] = field(default_factory=list)
    campaign_environment: Optional[dict] = None
    campaign_adapter: Optional[dict] = None
    event_count: int = 0
    last_timestamp: str = ""

    # -- queries ------------------------------------------------------------

    def record_for(self, step: StepId, iteration: int) -> Optional[StepRecord]:
        for rec in self.records:
            if rec.step is step and rec.iteration == iteration:
                return rec
        return None

    def completed(self, step: StepId, iteration: int) -> bool:
        return self.record_for(step, iteration) is not None

    @property
    def concluded(self) -> bool:
        return any(r.step is StepId.CONCLUSION_DOCUMENTATION for r in self.records)

    def completed_steps(self) -> list[tuple[StepId, int]]:
        return [(r.step, r.iteration) for r in self.records]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "bundle_domain": self.bundle_domain,
            "bundle_version": self.bundle_version,
            "problem": self.problem,
            "seed": self.seed,
            "iteration": self.iteration,
            "concluded": self.concluded,
            "records": [r.to_dict() for r in self.records],
            "log": [e.to_dict() for e in self.log],
            "pending_runs": list(self.pending_runs),
            "campaign_environment": self.campaign_environment,
            "campaign_adapter": self.campaign_adapter,
            "event_count": self.event_count,
        }

    def content_digest(self) -> str:
        return content_digest(self.to_dict())

    # -- event machinery ----------------------------------------------------

    def _next_timestamp(self) -> str:
        now = utc_now_iso()
        return now if now > self.last_timestamp else self.last_timestamp

    def _make_event(self, kind: str, data: dict, request_id: Optional[str] = None) -> Event:
        return Event(
            seq=self.event_count,
            kind=kind,
            timestamp=self._next_timestamp(),
            data=data,
            request_id=request_id,
        )


def _creation_event(
    bundle: KnowledgeBundle,
    problem_text: str,
    seed: int,
    operator: str = "",
    project_id: Optional[str] = None,
    request_id: Optional[str] = None,
) -> Event:
    if not problem_text or not problem_text.strip():
        raise PayloadError("problem statement must be non-empty")
    return Event(
        seq=0,
        kind="created",
        timestamp=utc_now_iso(),
        request_id=request_id,
        data={
            "project_id": project_id or f"p-{uuid.uuid4().hex[:12]}",
            "bundle_domain": bundle.domain,
            "bundle_version": bundle.version,
            "problem": problem_text,
            "seed": int(seed),
            "operator": operator,
        },
    )


def apply_event(project: Optional[Project], event: Event) -> Project:
    """Fold one event into the project state. Used for both live mutation
    and journal replay; all timestamps come from the event itself."""
    if event.kind == "created":
        d = event.data
        project = Project(
            id=d["project_id"],
            bundle_domain=d["bundle_domain"],
            bundle_version=d["bundle_version"],
            problem=d["problem"],
            seed=d["seed"],
        )
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=None,
                iteration=0,
                action="project-created",
                detail=f"problem statement recorded ({len(d['problem'])} chars)",
                attachments=[text_digest(d["problem"])],
            )
        )
        project.event_count = 1
        project.last_timestamp = event.timestamp
        return project

    if project is None:
        raise PayloadError(f"event {event.kind!r} requires an existing project")

    if event.kind == "step":
        d = event.data
        step = StepId.parse(d["step"])
        project.records.append(
            StepRecord(
                step=step,
                iteration=d["iteration"],
                input_digest=d["input_digest"],
                payload=d["payload"],
                completed_at=event.timestamp,
                operator=d.get("operator", ""),
            )
        )
        if step is StepId.EXPERIMENTAL_IMPLEMENTATION:
            # sealed into the step payload; the holding area is done
            project.pending_runs = []
            project.campaign_environment = None
            project.campaign_adapter = None
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=step.value,
                iteration=d["iteration"],
                action="step-submitted",
                detail=f"output recorded by {d.get('operator') or 'anonymous'}",
                attachments=[content_digest(d["payload"])],
            )
        )
    elif event.kind == "iteration":
        project.iteration = event.data["iteration"]
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=ITERATION_ENTRY.value,
                iteration=event.data["iteration"],
                action="iteration-begun",
                detail=f"experimental chain reopened (iteration {event.data['iteration']})",
            )
        )
    elif event.kind == "campaign":
        project.pending_runs = []
        project.campaign_environment = event.data["environment"]
        project.campaign_adapter = event.data.get("adapter")
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=StepId.EXPERIMENTAL_IMPLEMENTATION.value,
                iteration=event.data["iteration"],
                action="campaign-started",
                detail=f"environment captured on {event.data['environment'].get('host', '?')}",
            )
        )
    elif event.kind == "run":
        record = event.data["record"]
        project.pending_runs.append(record)
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=StepId.EXPERIMENTAL_IMPLEMENTATION.value,
                iteration=event.data["iteration"],
                action="run-recorded",
                detail=f"run {record.get('index')} status {record.get('status')}",
                attachments=[record.get("raw_digest", "")],
            )
        )
    elif event.kind == "note":
        d = event.data
        project.log.append(
            LogEntry(
                timestamp=event.timestamp,
                step=d.get("step"),
                iteration=d.get("iteration", project.iteration),
                action=d.get("action", "note"),
                detail=d.get("detail", ""),
                attachments=list(d.get("attachments", [])),
            )
        )
    else:
        raise PayloadError(f"unknown event kind {event.kind!r}")

    project.event_count += 1
    project.last_timestamp = max(project.last_timestamp, event.timestamp)
    return project


# ---------------------------------------------------------------------------
# Gating


def _required_predecessors(step: StepId, iteration: int) -> list[tuple[StepId, int]]:
    idx = STEP_INDEX[step]
    if step in ITERATION_STEPS and iteration > 0:
        shared = [(s, 0) for s in PRE_ITERATION_STEPS]
        chain = [(s, iteration) for s in STEP_ORDER[STEP_INDEX[ITERATION_ENTRY]: idx]]
        return shared + chain
    if step is StepId.CONCLUSION_DOCUMENTATION:
        shared = [(s, 0) for s in PRE_ITERATION_STEPS]
        chain = [(s, iteration) for s in STEP_ORDER[STEP_INDEX[ITERATION_ENTRY]: idx] if s in ITERATION_STEPS]
        return shared + chain
    return [(s, 0) for s in STEP_ORDER[:idx]]


def missing_predecessor(project: Project, step: StepId, iteration: int) -> Optional[tuple[StepId, int]]:
    """Earliest incomplete predecessor of (step, iteration), if any."""
    for pred in _required_predecessors(step, iteration):
        if not project.completed(*pred):
            return pred
    return None


def _input_digest(project: Project, step: StepId, iteration: int) -> str:
    """Digest of the artifact the step consumed (the previous step's output)."""
    if step is StepId.REQUIREMENT_RECOGNITION:
        return text_digest(project.problem)
    if step is ITERATION_ENTRY and iteration > 0:
        prev = project.record_for(StepId.EXPERIMENTAL_ANALYSIS, iteration - 1)
    elif step is StepId.CONCLUSION_DOCUMENTATION:
        prev = project.record_for(StepId.EXPERIMENTAL_ANALYSIS, iteration)
    else:
        prev_step = STEP_ORDER[STEP_INDEX[step] - 1]
        prev_iter = iteration if prev_step in ITERATION_STEPS else 0
        prev = project.record_for(prev_step, prev_iter)
    return content_digest(prev.payload) if prev else ""


def _submit_event(
    project: Project,
    bundle: KnowledgeBundle,
    step: StepId | str,
    iteration: int,
    payload: dict,
    operator: str = "",
    request_id: Optional[str] = None,
) -> Event:
    step = StepId.parse(step)
    if project.concluded:
        raise GatingError("project already concluded; no further submissions accepted")
    if step in ITERATION_STEPS or step is StepId.CONCLUSION_DOCUMENTATION:
        if iteration != project.iteration:
            raise GatingError(
                f"step {step.value} must be submitted for the current iteration "
                f"{project.iteration}, not {iteration}"
            )
    elif iteration != 0:
        raise GatingError(f"step {step.value} belongs to iteration 0 and is not repeated")
    if project.completed(step, iteration):
        raise DuplicateSubmissionError(
            f"step {step.value} already submitted for iteration {iteration}"
        )
    missing = missing_predecessor(project, step, iteration)
    if missing is not None:
        miss_step, miss_iter = missing
        raise GatingError(
            f"cannot submit {step.value}: step {miss_step.value} "
            f"(iteration {miss_iter}) is not complete",
            missing_step=miss_step.value,
        )
    validate_payload(step, payload, bundle, project)
    return project._make_event(
        "step",
        {
            "step": step.value,
            "iteration": iteration,
            "payload": payload,
            "operator": operator,
            "input_digest": _input_digest(project, step, iteration),
        },
        request_id=request_id,
    )


def _iteration_event(project: Project, operator: str = "", request_id: Optional[str] = None) -> Event:
    if project.concluded:
        raise GatingError("project already concluded; cannot begin a new iteration")
    if not project.completed(StepId.EXPERIMENTAL_ANALYSIS, project.iteration):
        raise GatingError(
            f"cannot begin iteration {project.iteration + 1}: "
            f"experimental-analysis of iteration {project.iteration} is not complete",
            missing_step=StepId.EXPERIMENTAL_ANALYSIS.value,
        )
    return project._make_event(
        "iteration",
        {"iteration": project.iteration + 1, "operator": operator},
        request_id=request_id,
    )


def _campaign_event(
    project: Project, environment: dict, adapter: Optional[dict] = None, request_id: Optional[str] = None
) -> Event:
    if not project.completed(StepId.EXPERIMENTAL_DESIGN, project.iteration):
        raise GatingError(
            "cannot start a campaign before experimental-design is complete",
            missing_step=StepId.EXPERIMENTAL_DESIGN.value,
        )
    return project._make_event(
        "campaign",
        {"iteration": project.iteration, "environment": environment, "adapter": adapter},
        request_id=request_id,
    )


def _run_event(project: Project, record: dict) -> Event:
    return project._make_event("run", {"iteration": project.iteration, "record": record})


def _note_event(
    project: Project,
    detail: str,
    step: Optional[str] = None,
    action: str = "note",
    attachments: Optional[list[str]] = None,
) -> Event:
    return project._make_event(
        "note",
        {
            "step": step,
            "iteration": project.iteration,
            "action": action,
            "detail": detail,
            "attachments": attachments or [],
        },
    )


# ---------------------------------------------------------------------------
# In-memory convenience API (the journal-backed store wraps the same events)


def create_project(
    bundle: KnowledgeBundle,
    problem_text: str,
    seed: int,
    operator: str = "",
    project_id: Optional[str] = None,
) -> Project:
    return apply_event(None, _creation_event(bundle, problem_text, seed, operator, project_id))


def submit_step_output(
    project: Project,
    step: StepId | str,
    iteration: int,
    payload: dict,
    bundle: KnowledgeBundle,
    operator: str = "",
) -> Project:
    event = _submit_event(project, bundle, step, iteration, payload, operator)
    return apply_event(project, event)


def begin_iteration(project: Project, operator: str = "") -> Project:
    return apply_event(project, _iteration_event(project, operator))


# ---------------------------------------------------------------------------
# Run-to-run repeatability comparison


def _jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _close(x: float, y: float, rtol: float) -> bool:
    if x == y:
        return True
    return abs(x - y) <= rtol * max(abs(x), abs(y))


def _numeric_leaves(value: Any, path: str = "") -> dict[str, float]:
    out: dict[str, float] = {}
    if isinstance(value, bool):
        return out
    if isinstance(value, (int, float)):
        out[path] = float(value)
    elif isinstance(value, dict):
        for key in value:
            out.update(_numeric_leaves(value[key], f"{path}/{key}"))
    elif isinstance(value, list):
        for i, item in enumerate(value):
            out.update(_numeric_leaves(item, f"{path}[{i}]"))
    return out


def _numeric_agreement(a: Any, b: Any, rtol: float) -> float:
    """Mean over the union of numeric leaves: 1 when within tolerance, else 0."""
    la, lb = _numeric_leaves(a), _numeric_leaves(b)
    paths = set(la) | set(lb)
    if not paths:
        return 1.0
    hits = sum(
        1 for p in paths if p in la and p in lb and _close(la[p], lb[p], rtol)
    )
    return hits / len(paths)


def _question_set(payload: dict) -> set:
    return {q["text"] for q in payload["questions"]}


def _listing_set(payload: dict) -> set:
    out = set()
    for c in payload["candidates"]:
        out.add(f"{c['feature']}|{c['metric']}")
        for b in c.get("benchmarks", []):
            out.add(f"{c['feature']}|{c['metric']}|{b}")
    return out


def _selection_set(payload: dict) -> set:
    return {f"metric:{m}" for m in payload["metrics"]} | {
        f"benchmark:{b}" for b in payload["benchmarks"]
    }


def _factor_listing_set(payload: dict) -> set:
    out = set()
    for kind in ("resource", "workload", "quality"):
        out.update(f"{kind}:{name}" for name in payload[kind])
    return out


def _factor_selection_set(payload: dict) -> set:
    return {
        f"{f['kind']}:{f['name']}:{f.get('role', 'design')}:"
        + ",".join(str(l) for l in f.get("levels", []))
        for f in payload["factors"]
    }


def _conclusion_set(payload: dict) -> set:
    out = {f"findings:{payload.get('findings', '')}"}
    for ans in payload["answers"]:
        out.add(f"{ans['question_id']}|{ans['status']}|{ans.get('text', '')}")
    return out


def _measurement_leaves(payload: dict) -> dict[str, float]:
    out: dict[str, float] = {}
    for rec in payload["records"]:
        idx = rec.get("index")
        out[f"run{idx}:status"] = 1.0 if rec.get("status") == "ok" else 0.0
        for metric, cell in sorted(rec.get("measurements", {}).items()):
            out[f"run{idx}:{metric}"] = float(cell["value"])
    return out


def _step_score(step: StepId, a: dict, b: dict, rtol: float) -> tuple[float, str]:
    set_extractors: dict[StepId, Callable[[dict], set]] = {
        StepId.REQUIREMENT_RECOGNITION: _question_set,
        StepId.FEATURE_IDENTIFICATION: lambda p: set(p["features"]),
        StepId.METRICS_BENCHMARKS_LISTING: _listing_set,
        StepId.METRICS_BENCHMARKS_SELECTION: _selection_set,
        StepId.FACTORS_LISTING: _factor_listing_set,
        StepId.FACTORS_SELECTION: _factor_selection_set,
        StepId.CONCLUSION_DOCUMENTATION: _conclusion_set,
    }
    if step in set_extractors:
        sa, sb = set_extractors[step](a), set_extractors[step](b)
        score = _jaccard(sa, sb)
        return score, f"jaccard {len(sa & sb)}/{len(sa | sb) or 1}"
    if step is StepId.EXPERIMENTAL_DESIGN:
        same = canonical_json(a) == canonical_json(b)
        return (1.0 if same else 0.0), "exact structural match" if same else "design differs"
    if step is StepId.EXPERIMENTAL_IMPLEMENTATION:
        la, lb = _measurement_leaves(a), _measurement_leaves(b)
        paths = set(la) | set(lb)
        if not paths:
            return 1.0, "no measurements"
        hits = sum(1 for p in paths if p in la and p in lb and _close(la[p], lb[p], rtol))
        return hits / len(paths), f"tolerance matches {hits}/{len(paths)}"
    # experimental analysis: tolerance agreement over numeric result leaves
    score = _numeric_agreement(a.get("results"), b.get("results"), rtol)
    return score, "numeric leaf agreement"


@dataclass
class StepAgreement:
    step: StepId
    iteration: int
    score: float
    detail: str

    def to_dict(self) -> dict:
        return {
            "step": self.step.value,
            "iteration": self.iteration,
            "score": self.score,
            "detail": self.detail,
        }


@dataclass
class RepeatabilityReport:
    overall: float
    steps: list[StepAgreement]
    numeric_rtol: float

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "numeric_rtol": self.numeric_rtol,
            "steps": [s.to_dict() for s in self.steps],
        }


def compare_runs(a: Project, b: Project, numeric_rtol: float = 0.05) -> RepeatabilityReport:
    """Quantify per-step output agreement of two completed evaluations.

    Set-valued payloads score by Jaccard similarity, the design step by
    exact structural match, and numeric payloads (measurements, analysis
    results) by the fraction of values matching within ``numeric_rtol``
    relative tolerance. The overall score is the arithmetic mean over
    steps; the report is symmetric in its arguments.
    """
    for proj in (a, b):
        if not proj.concluded:
            raise IncompleteProjectError(
                f"project {proj.id} has no conclusion step; complete it before comparing"
            )
    if a.bundle_domain != b.bundle_domain:
        raise DomainMismatchError(
            f"projects reference different bundle domains: "
            f"{a.bundle_domain!r} vs {b.bundle_domain!r}"
        )
    keys = sorted(
        set(a.completed_steps()) | set(b.completed_steps()),
        key=lambda k: (STEP_INDEX[k[0]], k[1]),
    )
    agreements: list[StepAgreement] = []
    for step, iteration in keys:
        ra = a.record_for(step, iteration)
        rb = b.record_for(step, iteration)
        if ra is None or rb is None:
            missing_in = a.id if ra is None else b.id
            agreements.append(
                StepAgreement(step, iteration, 0.0, f"missing in project {missing_in}")
            )
            continue
        score, detail = _step_score(step, ra.payload, rb.payload, numeric_rtol)
        agreements.append(StepAgreement(step, iteration, score, detail))
    overall = sum(s.score for s in agreements) / len(agreements) if agreements else 1.0
    return RepeatabilityReport(overall=overall, steps=agreements, numeric_rtol=numeric_rtol)
