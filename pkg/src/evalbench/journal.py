"""Durable project persistence: an append-only event journal per project.

Layout under the store root::

    <root>/<project_id>/journal.ndjson   one canonical-JSON event per line
    <root>/<project_id>/snapshot.json    derived convenience copy

The journal is the source of truth: loading a project replays its events
through :func:`evalbench.engine.apply_event`, which reconstructs the exact
snapshot (timestamps are stored in the events). A trailing partial line,
as left behind by a hard kill mid-write, is ignored on replay.

Mutations are serialized per project with a lock; reads are lock-free over
immutable snapshots. Mutating calls may carry a client request id; a
request id that was already journaled is not re-applied (the current state
is returned instead), which makes retries safe.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Callable, Optional

from .artefacts import KnowledgeBundle
from .common import canonical_json
from .engine import (
    Event,
    Project,
    _campaign_event,
    _creation_event,
    _iteration_event,
    _note_event,
    _run_event,
    _submit_event,
    apply_event,
)
from .errors import UnknownIdError
from .steps import StepId


class ProjectStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._request_ids: dict[str, set[str]] = {}
        self._create_requests: dict[str, str] = {}  # request_id -> project_id

    # -- infrastructure ------------------------------------------------------

    def _lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def _dir(self, project_id: str) -> Path:
        return self.root / project_id

    def _journal_path(self, project_id: str) -> Path:
        return self._dir(project_id) / "journal.ndjson"

    def list_projects(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if (p / "journal.ndjson").is_file()
        )

    def exists(self, project_id: str) -> bool:
        return self._journal_path(project_id).is_file()

    def read_events(self, project_id: str) -> list[Event]:
        path = self._journal_path(project_id)
        if not path.is_file():
            raise UnknownIdError(f"unknown project: {project_id!r}")
        events: list[Event] = []
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                stripped = line.strip()
                if not stripped:
                    continue
                if not line.endswith("\n"):
                    break  # torn tail from an interrupted write
                try:
                    events.append(Event.from_dict(json.loads(stripped)))
                except json.JSONDecodeError:
                    break
        return events

    def replay(self, project_id: str) -> Project:
        """Rebuild the project snapshot purely from its journal."""
        project: Optional[Project] = None
        for event in self.read_events(project_id):
            project = apply_event(project, event)
            if event.request_id:
                self._request_ids.setdefault(project_id, set()).add(event.request_id)
                if event.kind == "created":
                    self._create_requests[event.request_id] = project_id
        if project is None:
            raise UnknownIdError(f"project {project_id!r} has an empty journal")
        return project

    def load(self, project_id: str) -> Project:
        return self.replay(project_id)

    def _append(self, project_id: str, event: Event) -> None:
        path = self._journal_path(project_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(event.to_dict()) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        if event.request_id:
            self._request_ids.setdefault(project_id, set()).add(event.request_id)

    def _write_snapshot(self, project: Project) -> None:
        path = self._dir(project.id) / "snapshot.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(canonical_json(project.to_dict()) + "\n", encoding="utf-8")
        tmp.replace(path)

    def _seen_request(self, project_id: str, request_id: Optional[str]) -> bool:
        if not request_id:
            return False
        if project_id not in self._request_ids and self.exists(project_id):
            self.replay(project_id)  # warm the request-id cache
        return request_id in self._request_ids.get(project_id, set())

    def seen_request(self, project_id: str, request_id: Optional[str]) -> bool:
        """True when a mutation with this request id was already journaled."""
        return self._seen_request(project_id, request_id)

    def _commit(self, project: Project, event: Event) -> Project:
        self._append(project.id, event)
        project = apply_event(project, event)
        self._write_snapshot(project)
        return project

    # -- mutations ------------------------------------------------------------

    def create_project(
        self,
        bundle: KnowledgeBundle,
        problem_text: str,
        seed: int,
        operator: str = "",
        project_id: Optional[str] = None,
        request_id: Optional[str] = None,
    ) -> Project:
        if request_id and request_id in self._create_requests:
            return self.load(self._create_requests[request_id])
        event = _creation_event(bundle, problem_text, seed, operator, project_id, request_id)
        pid = event.data["project_id"]
        with self._lock(pid):
            if self.exists(pid):
                raise UnknownIdError(f"project id {pid!r} already exists")
            self._append(pid, event)
            project = apply_event(None, event)
            self._write_snapshot(project)
        if request_id:
            self._create_requests[request_id] = pid
        return project

    def submit(
        self,
        bundle: KnowledgeBundle,
        project_id: str,
        step: StepId | str,
        iteration: int,
        payload: dict,
        operator: str = "",
        request_id: Optional[str] = None,
    ) -> Project:
        with self._lock(project_id):
            project = self.load(project_id)
            if self._seen_request(project_id, request_id):
                return project
            event = _submit_event(project, bundle, step, iteration, payload, operator, request_id)
            return self._commit(project, event)

    def begin_iteration(
        self, project_id: str, operator: str = "", request_id: Optional[str] = None
    ) -> Project:
        with self._lock(project_id):
            project = self.load(project_id)
            if self._seen_request(project_id, request_id):
                return project
            event = _iteration_event(project, operator, request_id)
            return self._commit(project, event)

    def start_campaign(
        self,
        project_id: str,
        environment: dict,
        adapter: Optional[dict] = None,
        request_id: Optional[str] = None,
    ) -> Project:
        with self._lock(project_id):
            project = self.load(project_id)
            if self._seen_request(project_id, request_id):
                return project
            event = _campaign_event(project, environment, adapter, request_id)
            return self._commit(project, event)

    def record_run(self, project_id: str, record: dict) -> Project:
        with self._lock(project_id):
            project = self.load(project_id)
            event = _run_event(project, record)
            return self._commit(project, event)

    def add_note(
        self,
        project_id: str,
        detail: str,
        step: Optional[str] = None,
        action: str = "note",
        attachments: Optional[list[str]] = None,
    ) -> Project:
        with self._lock(project_id):
            project = self.load(project_id)
            event = _note_event(project, detail, step, action, attachments)
            return self._commit(project, event)

    def mutate(self, project_id: str, fn: Callable[[Project], Event]) -> Project:
        """Run a custom validated-event builder under the project lock."""
        with self._lock(project_id):
            project = self.load(project_id)
            event = fn(project)
            return self._commit(project, event)
