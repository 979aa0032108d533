"""Benchmark adapter execution: run a plan strictly in order, one process
per run, capturing raw output and parsed measurements.

Adapters are external commands described by a small JSON file: a command
template with ``{factor:NAME}`` placeholders filled from each run's
level combination, a timeout, and extraction rules that pull numeric
metric values out of standard output. Runs execute sequentially (parallel
runs would confound measurements); individual failures are recorded, not
raised, until the configured failure budget is exceeded.

Environment capture is two-tier: a full snapshot once per campaign, plus
cheap per-run timestamps on every record.
"""

from __future__ import annotations

import json
import os
import platform
import re
import shlex
import socket
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .common import bytes_digest, utc_now_iso
from .doe import RunSpec
from .errors import AdapterMismatchError, BundleParseError, FailureBudgetError

_PLACEHOLDER = re.compile(r"\{factor:([^{}]+)\}")


@dataclass(frozen=True)
class ExtractionRule:
    metric: str
    unit: str = ""
    pattern: Optional[str] = None  # regex; first match wins, group 1 (or 0) is the value
    field_index: Optional[int] = None  # 0-based token index after splitting
    delimiter: Optional[str] = None  # token delimiter for field_index rules (default whitespace)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "unit": self.unit,
            "pattern": self.pattern,
            "field_index": self.field_index,
            "delimiter": self.delimiter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionRule":
        return cls(
            metric=data["metric"],
            unit=data.get("unit", ""),
            pattern=data.get("pattern"),
            field_index=data.get("field_index"),
            delimiter=data.get("delimiter"),
        )


@dataclass(frozen=True)
class BenchmarkAdapter:
    name: str
    command: str
    timeout: float = 60.0
    rules: tuple[ExtractionRule, ...] = ()
    version: str = ""

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER.findall(self.command))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "command": self.command,
            "timeout": self.timeout,
            "rules": [r.to_dict() for r in self.rules],
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkAdapter":
        return cls(
            name=data["name"],
            command=data["command"],
            timeout=float(data.get("timeout", 60.0)),
            rules=tuple(ExtractionRule.from_dict(r) for r in data.get("rules", [])),
            version=data.get("version", ""),
        )


def load_adapter(path: str | Path) -> BenchmarkAdapter:
    file = Path(path)
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleParseError(f"cannot read adapter file {file}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"malformed adapter JSON in {file}: {exc}") from exc
    try:
        return BenchmarkAdapter.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleParseError(f"malformed adapter definition in {file}: {exc}") from exc


@dataclass
class EnvironmentSnapshot:
    timestamp: str
    host: str
    os_description: str
    hardware: dict[str, str] = field(default_factory=dict)
    adapter_versions: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "host": self.host,
            "os": self.os_description,
            "hardware": dict(self.hardware),
            "adapter_versions": dict(self.adapter_versions),
        }


@dataclass
class RunRecord:
    index: int
    combination: dict
    block: Optional[str]
    replicate: int
    started_at: str
    finished_at: str
    raw_digest: str
    measurements: dict[str, dict]  # metric -> {"value": float, "unit": str}
    status: str  # ok | failed | timeout
    failure: str = ""
    exit_code: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "combination": dict(self.combination),
            "block": self.block,
            "replicate": self.replicate,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "raw_digest": self.raw_digest,
            "measurements": {k: dict(v) for k, v in self.measurements.items()},
            "status": self.status,
            "failure": self.failure,
            "exit_code": self.exit_code,
        }


@dataclass
class ExecutionResult:
    records: list[RunRecord]
    environment: Optional[EnvironmentSnapshot]

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "environment": self.environment.to_dict() if self.environment else None,
        }


def _read_meminfo() -> str:
    try:
        with open("/proc/meminfo", encoding="ascii") as fh:
            for line in fh:
                if line.startswith("MemTotal"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return "unavailable"


def capture_environment(adapter: Optional[BenchmarkAdapter] = None) -> EnvironmentSnapshot:
    """Best-effort snapshot of the execution environment; never fails.

    Fields that cannot be determined are recorded as "unavailable".
    """
    def safe(fn: Callable[[], str]) -> str:
        try:
            value = fn()
            return value if value else "unavailable"
        except Exception:
            return "unavailable"

    hardware = {
        "machine": safe(platform.machine),
        "processor": safe(platform.processor),
        "cpu_count": safe(lambda: str(os.cpu_count() or "")),
        "memory_total": safe(_read_meminfo),
        "python": safe(platform.python_version),
    }
    adapter_versions = {"evalbench": __version__}
    if adapter is not None:
        adapter_versions[adapter.name] = adapter.version or "unversioned"
    return EnvironmentSnapshot(
        timestamp=utc_now_iso(),
        host=safe(socket.gethostname),
        os_description=safe(platform.platform),
        hardware=hardware,
        adapter_versions=adapter_versions,
    )


def parse_output(text: str, rules: Sequence[ExtractionRule]) -> tuple[dict, dict]:
    """Apply extraction rules independently; first match wins per rule.

    Returns (measurements, errors) where measurements maps metric name to
    {"value": float, "unit": unit} and errors maps metric name to a reason
    for every rule that matched nothing.
    """
    measurements: dict[str, dict] = {}
    errors: dict[str, str] = {}
    for rule in rules:
        try:
            if rule.pattern is not None:
                match = re.search(rule.pattern, text, flags=re.MULTILINE)
                if match is None:
                    raise ValueError("pattern matched nothing")
                raw = match.group(1) if match.groups() else match.group(0)
            elif rule.field_index is not None:
                tokens = text.split(rule.delimiter) if rule.delimiter else text.split()
                if rule.field_index >= len(tokens):
                    raise ValueError(
                        f"field index {rule.field_index} out of range "
                        f"({len(tokens)} fields)"
                    )
                raw = tokens[rule.field_index]
            else:
                raise ValueError("rule has neither pattern nor field_index")
            measurements[rule.metric] = {"value": float(raw.strip()), "unit": rule.unit}
        except ValueError as exc:
            errors[rule.metric] = str(exc)
    return measurements, errors


def _build_argv(adapter: BenchmarkAdapter, combination: dict) -> list[str]:
    """Tokenize the template first, then substitute placeholders per token,
    so level values containing spaces stay single arguments."""
    argv = []
    for token in shlex.split(adapter.command):
        argv.append(_PLACEHOLDER.sub(lambda m: str(combination[m.group(1)]), token))
    return argv


def execute_plan(
    plan: Sequence[RunSpec] | Sequence[dict],
    adapter: BenchmarkAdapter,
    capture_env: bool = True,
    failure_budget: float = 0.2,
    response_metrics: Optional[Sequence[str]] = None,
    on_record: Optional[Callable[[RunRecord], None]] = None,
    cwd: Optional[str] = None,
) -> ExecutionResult:
    """Execute every run of the plan sequentially, strictly in plan order.

    Individual run failures are recorded and execution continues, until
    more than ``failure_budget`` (a fraction of the plan size) have failed,
    at which point a :class:`FailureBudgetError` carrying the partial
    result is raised. ``on_record`` is invoked after each completed run
    (the journal hook).
    """
    runs = [RunSpec.from_dict(r) if isinstance(r, dict) else r for r in plan]
    if not runs:
        raise AdapterMismatchError("plan is empty")
    factor_names = set(runs[0].combination)
    unknown = adapter.placeholders() - factor_names
    if unknown:
        raise AdapterMismatchError(
            f"adapter {adapter.name!r} references factors not in the plan: {sorted(unknown)}"
        )
    metrics = list(response_metrics) if response_metrics else [r.metric for r in adapter.rules]
    rule_metrics = [r.metric for r in adapter.rules]
    for metric in metrics:
        if rule_metrics.count(metric) != 1:
            raise AdapterMismatchError(
                f"adapter {adapter.name!r} needs exactly one extraction rule for "
                f"metric {metric!r} (found {rule_metrics.count(metric)})"
            )

    environment = capture_environment(adapter) if capture_env else None
    allowed_failures = failure_budget * len(runs)
    records: list[RunRecord] = []
    failures = 0
    for run in runs:
        argv = _build_argv(adapter, run.combination)
        started = utc_now_iso()
        status = "ok"
        failure = ""
        exit_code: Optional[int] = None
        stdout_b = b""
        stderr_b = b""
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                timeout=adapter.timeout,
                cwd=cwd,
            )
            stdout_b, stderr_b = proc.stdout, proc.stderr
            exit_code = proc.returncode
            if proc.returncode != 0:
                status = "failed"
                failure = f"exit code {proc.returncode}"
        except subprocess.TimeoutExpired as exc:
            status = "timeout"
            failure = f"timed out after {adapter.timeout}s"
            stdout_b = exc.stdout or b""
            stderr_b = exc.stderr or b""
        except OSError as exc:
            status = "failed"
            failure = f"spawn error: {exc}"
        finished = utc_now_iso()

        measurements: dict[str, dict] = {}
        if status == "ok":
            text = stdout_b.decode("utf-8", errors="replace")
            measurements, errors = parse_output(text, adapter.rules)
            missing = [m for m in metrics if m not in measurements]
            if missing:
                status = "failed"
                details = "; ".join(f"{m}: {errors.get(m, 'not extracted')}" for m in missing)
                failure = f"extraction failed ({details})"
        record = RunRecord(
            index=run.index,
            combination=dict(run.combination),
            block=run.block,
            replicate=run.replicate,
            started_at=started,
            finished_at=finished,
            raw_digest=bytes_digest(stdout_b + b"\x00" + stderr_b),
            measurements=measurements,
            status=status,
            failure=failure,
            exit_code=exit_code,
        )
        records.append(record)
        if on_record is not None:
            on_record(record)
        if record.status != "ok":
            failures += 1
            if failures > allowed_failures:
                raise FailureBudgetError(
                    f"{failures} of {len(runs)} runs failed, exceeding the "
                    f"failure budget of {failure_budget:.0%}",
                    ExecutionResult(records=records, environment=environment),
                )
    return ExecutionResult(records=records, environment=environment)
