"""Knowledge bundle: domain artefacts loaded from a directory of JSON files.

A bundle packages five artefact kinds for one system domain:

- taxonomy elements (performance features, setup scenes, properties,
  capacities) with keyword lists used for term matching,
- a metrics catalogue keyed by performance feature,
- an experimental factor framework (resource / workload / quality trees),
- experiment blueprints (capacity + resource + workload + operation slots),
- evaluation templates (see :mod:`evalbench.reporting`).

Directory layout (all JSON, UTF-8, LF line endings)::

    bundle.json        {"schema_version": 1, "domain": ..., "version": ...}
    taxonomy.json      [TaxonomyElement...]
    catalogue.json     [CatalogueEntry...]
    factors.json       [FactorNode...]
    blueprints.json    [Blueprint...]
    templates/*.json   one evaluation template per file

Bundles are immutable after load and safe for concurrent reads; mutation
happens only by editing files and reloading.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import BundleParseError, BundleValidationError, UnknownIdError

TAXONOMY_KINDS = frozenset(
    {"performance-feature", "setup-scene", "physical-property", "capacity"}
)
FACTOR_KINDS = frozenset({"resource", "workload", "quality"})
WORKLOAD_SUB_KINDS = frozenset({"terminal", "activity", "object"})
VALUE_DOMAINS = frozenset({"nominal", "ordinal", "numeric-range"})
METRIC_DIRECTIONS = frozenset({"higher-better", "lower-better"})

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TaxonomyElement:
    id: str
    kind: str
    name: str
    definition: str
    parent: Optional[str] = None
    keywords: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "name": self.name,
            "definition": self.definition,
            "parent": self.parent,
            "keywords": list(self.keywords),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaxonomyElement":
        return cls(
            id=data["id"],
            kind=data["kind"],
            name=data["name"],
            definition=data.get("definition", ""),
            parent=data.get("parent"),
            keywords=tuple(data.get("keywords", [])),
        )


@dataclass(frozen=True)
class Metric:
    name: str
    unit: str
    direction: str

    def to_dict(self) -> dict:
        return {"name": self.name, "unit": self.unit, "direction": self.direction}

    @classmethod
    def from_dict(cls, data: dict) -> "Metric":
        return cls(name=data["name"], unit=data.get("unit", ""), direction=data["direction"])


@dataclass(frozen=True)
class BenchmarkRef:
    name: str
    source: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "source": self.source}

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkRef":
        return cls(name=data["name"], source=data.get("source", ""))


@dataclass(frozen=True)
class CatalogueEntry:
    feature_id: str
    metric: Metric
    benchmarks: tuple[BenchmarkRef, ...] = ()
    metric_only: bool = False

    def to_dict(self) -> dict:
        return {
            "feature_id": self.feature_id,
            "metric": self.metric.to_dict(),
            "benchmarks": [b.to_dict() for b in self.benchmarks],
            "metric_only": self.metric_only,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CatalogueEntry":
        return cls(
            feature_id=data["feature_id"],
            metric=Metric.from_dict(data["metric"]),
            benchmarks=tuple(BenchmarkRef.from_dict(b) for b in data.get("benchmarks", [])),
            metric_only=bool(data.get("metric_only", False)),
        )


@dataclass(frozen=True)
class FactorNode:
    id: str
    kind: str
    name: str
    sub_kind: Optional[str] = None
    children: tuple[str, ...] = ()
    value_domain: str = "nominal"
    applies_to: tuple[str, ...] = ()  # feature ids (resource) or benchmark names (workload)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "name": self.name,
            "sub_kind": self.sub_kind,
            "children": list(self.children),
            "value_domain": self.value_domain,
            "applies_to": list(self.applies_to),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactorNode":
        return cls(
            id=data["id"],
            kind=data["kind"],
            name=data["name"],
            sub_kind=data.get("sub_kind"),
            children=tuple(data.get("children", [])),
            value_domain=data.get("value_domain", "nominal"),
            applies_to=tuple(data.get("applies_to", [])),
        )


@dataclass(frozen=True)
class Blueprint:
    id: str
    capacity_slot: str
    resource_slots: tuple[str, ...] = ()
    workload_slots: tuple[str, ...] = ()
    operation_slots: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "capacity_slot": self.capacity_slot,
            "resource_slots": list(self.resource_slots),
            "workload_slots": list(self.workload_slots),
            "operation_slots": list(self.operation_slots),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Blueprint":
        return cls(
            id=data["id"],
            capacity_slot=data["capacity_slot"],
            resource_slots=tuple(data.get("resource_slots", [])),
            workload_slots=tuple(data.get("workload_slots", [])),
            operation_slots=tuple(data.get("operation_slots", [])),
        )


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    code: str
    message: str
    element_id: Optional[str] = None
    location: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "element_id": self.element_id,
            "location": self.location,
        }


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"ok": self.ok, "issues": [i.to_dict() for i in self.issues]}


@dataclass(frozen=True)
class KnowledgeBundle:
    domain: str
    version: str
    taxonomy: tuple[TaxonomyElement, ...] = ()
    catalogue: tuple[CatalogueEntry, ...] = ()
    factors: tuple[FactorNode, ...] = ()
    blueprints: tuple[Blueprint, ...] = ()
    templates: tuple[dict, ...] = ()  # raw template dicts; see reporting module

    def element(self, element_id: str) -> Optional[TaxonomyElement]:
        for el in self.taxonomy:
            if el.id == element_id:
                return el
        return None

    def factor(self, factor_id: str) -> Optional[FactorNode]:
        for node in self.factors:
            if node.id == factor_id:
                return node
        return None

    def resolve_feature(self, key: str) -> TaxonomyElement:
        """Resolve a performance feature by id, or by exact name (case-insensitive)."""
        el = self.element(key)
        if el is None:
            lowered = key.strip().lower()
            for cand in self.taxonomy:
                if cand.kind == "performance-feature" and cand.name.lower() == lowered:
                    el = cand
                    break
        if el is None or el.kind != "performance-feature":
            raise UnknownIdError(f"unknown performance feature: {key!r}")
        return el

    def benchmark_names(self) -> list[str]:
        names: list[str] = []
        for entry in self.catalogue:
            for bench in entry.benchmarks:
                if bench.name not in names:
                    names.append(bench.name)
        return names

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "domain": self.domain,
            "version": self.version,
            "taxonomy": [e.to_dict() for e in self.taxonomy],
            "catalogue": [c.to_dict() for c in self.catalogue],
            "factors": [f.to_dict() for f in self.factors],
            "blueprints": [b.to_dict() for b in self.blueprints],
            "templates": list(self.templates),
        }


@dataclass(frozen=True)
class TermMatch:
    element: TaxonomyElement
    keyword: str
    span: tuple[int, int]  # [start, end) character offsets into the input text


@dataclass(frozen=True)
class FactorCandidates:
    resource: tuple[FactorNode, ...]
    workload: tuple[FactorNode, ...]
    quality: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "resource": [n.to_dict() for n in self.resource],
            "workload": [n.to_dict() for n in self.workload],
            "quality": list(self.quality),
        }


# ---------------------------------------------------------------------------
# Validation


def _check_forest(nodes: dict[str, FactorNode], report: ValidationReport) -> None:
    parent_of: dict[str, str] = {}
    for node in nodes.values():
        for child_id in node.children:
            child = nodes.get(child_id)
            if child is None:
                report.issues.append(
                    ValidationIssue(
                        "error",
                        "dangling-child",
                        f"factor {node.id!r} references missing child {child_id!r}",
                        element_id=node.id,
                        location="factors",
                    )
                )
                continue
            if child.kind != node.kind:
                report.issues.append(
                    ValidationIssue(
                        "error",
                        "kind-mismatch",
                        f"factor {node.id!r} ({node.kind}) has child {child_id!r} of kind {child.kind}",
                        element_id=node.id,
                        location="factors",
                    )
                )
            if child_id in parent_of:
                report.issues.append(
                    ValidationIssue(
                        "error",
                        "multiple-parents",
                        f"factor {child_id!r} has multiple parents "
                        f"({parent_of[child_id]!r} and {node.id!r})",
                        element_id=child_id,
                        location="factors",
                    )
                )
            else:
                parent_of[child_id] = node.id
    # cycle check per kind by walking parent chains
    for start in nodes:
        seen = {start}
        cur = start
        while cur in parent_of:
            cur = parent_of[cur]
            if cur in seen:
                report.issues.append(
                    ValidationIssue(
                        "error",
                        "factor-cycle",
                        f"factor tree contains a cycle through {cur!r}",
                        element_id=cur,
                        location="factors",
                    )
                )
                break
            seen.add(cur)


def validate_bundle(bundle: KnowledgeBundle) -> ValidationReport:
    """Check every structural invariant; always returns a report."""
    report = ValidationReport()
    err = report.issues.append

    ids: dict[str, TaxonomyElement] = {}
    for el in bundle.taxonomy:
        if el.id in ids:
            err(
                ValidationIssue(
                    "error",
                    "duplicate-id",
                    f"duplicate taxonomy id {el.id!r}",
                    element_id=el.id,
                    location="taxonomy",
                )
            )
            continue
        ids[el.id] = el
        if el.kind not in TAXONOMY_KINDS:
            err(
                ValidationIssue(
                    "error",
                    "invalid-kind",
                    f"taxonomy element {el.id!r} has invalid kind {el.kind!r}",
                    element_id=el.id,
                    location="taxonomy",
                )
            )
        if el.kind == "performance-feature" and not el.keywords:
            err(
                ValidationIssue(
                    "error",
                    "missing-keywords",
                    f"performance feature {el.id!r} has no keywords",
                    element_id=el.id,
                    location="taxonomy",
                )
            )
        for kw in el.keywords:
            if kw != kw.lower():
                err(
                    ValidationIssue(
                        "error",
                        "keyword-case",
                        f"keyword {kw!r} of element {el.id!r} is not lowercase",
                        element_id=el.id,
                        location="taxonomy",
                    )
                )

    for el in bundle.taxonomy:
        if el.parent is not None and el.parent not in ids:
            err(
                ValidationIssue(
                    "error",
                    "dangling-parent",
                    f"taxonomy element {el.id!r} references missing parent {el.parent!r}",
                    element_id=el.id,
                    location="taxonomy",
                )
            )
    # parent acyclicity
    parent_map = {el.id: el.parent for el in bundle.taxonomy}
    for start in parent_map:
        seen = {start}
        cur = parent_map.get(start)
        while cur is not None:
            if cur in seen:
                err(
                    ValidationIssue(
                        "error",
                        "taxonomy-cycle",
                        f"taxonomy parent chain contains a cycle through {cur!r}",
                        element_id=cur,
                        location="taxonomy",
                    )
                )
                break
            seen.add(cur)
            cur = parent_map.get(cur)

    metrics_per_feature: dict[str, set[str]] = {}
    for pos, entry in enumerate(bundle.catalogue):
        loc = f"catalogue[{pos}]"
        target = ids.get(entry.feature_id)
        if target is None:
            err(
                ValidationIssue(
                    "error",
                    "dangling-feature",
                    f"catalogue entry references missing feature {entry.feature_id!r}",
                    element_id=entry.feature_id,
                    location=loc,
                )
            )
        elif target.kind != "performance-feature":
            err(
                ValidationIssue(
                    "error",
                    "not-a-feature",
                    f"catalogue entry references {entry.feature_id!r} "
                    f"which is a {target.kind}, not a performance-feature",
                    element_id=entry.feature_id,
                    location=loc,
                )
            )
        seen_metrics = metrics_per_feature.setdefault(entry.feature_id, set())
        if entry.metric.name in seen_metrics:
            err(
                ValidationIssue(
                    "error",
                    "duplicate-metric",
                    f"feature {entry.feature_id!r} lists metric {entry.metric.name!r} twice",
                    element_id=entry.feature_id,
                    location=loc,
                )
            )
        seen_metrics.add(entry.metric.name)
        if entry.metric.direction not in METRIC_DIRECTIONS:
            err(
                ValidationIssue(
                    "error",
                    "invalid-direction",
                    f"metric {entry.metric.name!r} has invalid direction "
                    f"{entry.metric.direction!r}",
                    element_id=entry.feature_id,
                    location=loc,
                )
            )
        if not entry.benchmarks and not entry.metric_only:
            err(
                ValidationIssue(
                    "error",
                    "no-benchmarks",
                    f"metric {entry.metric.name!r} has no benchmarks and is not "
                    "flagged metric-only",
                    element_id=entry.feature_id,
                    location=loc,
                )
            )

    factor_ids: dict[str, FactorNode] = {}
    for node in bundle.factors:
        if node.id in factor_ids:
            err(
                ValidationIssue(
                    "error",
                    "duplicate-id",
                    f"duplicate factor id {node.id!r}",
                    element_id=node.id,
                    location="factors",
                )
            )
            continue
        factor_ids[node.id] = node
        if node.kind not in FACTOR_KINDS:
            err(
                ValidationIssue(
                    "error",
                    "invalid-kind",
                    f"factor {node.id!r} has invalid kind {node.kind!r}",
                    element_id=node.id,
                    location="factors",
                )
            )
        if node.kind == "workload" and node.sub_kind is not None:
            if node.sub_kind not in WORKLOAD_SUB_KINDS:
                err(
                    ValidationIssue(
                        "error",
                        "invalid-sub-kind",
                        f"workload factor {node.id!r} has invalid sub-kind "
                        f"{node.sub_kind!r} (allowed: terminal, activity, object)",
                        element_id=node.id,
                        location="factors",
                    )
                )
        if node.value_domain not in VALUE_DOMAINS:
            err(
                ValidationIssue(
                    "error",
                    "invalid-value-domain",
                    f"factor {node.id!r} has invalid value domain {node.value_domain!r}",
                    element_id=node.id,
                    location="factors",
                )
            )
    _check_forest(factor_ids, report)

    for bp in bundle.blueprints:
        loc = f"blueprint {bp.id!r}"
        capacity = ids.get(bp.capacity_slot)
        if capacity is None or capacity.kind != "performance-feature":
            err(
                ValidationIssue(
                    "error",
                    "bad-capacity-slot",
                    f"{loc}: capacity slot {bp.capacity_slot!r} does not resolve "
                    "to a performance feature",
                    element_id=bp.id,
                    location="blueprints",
                )
            )
        for slot_name, slot_ids, want_kind in (
            ("resource", bp.resource_slots, "resource"),
            ("workload", bp.workload_slots, "workload"),
        ):
            for fid in slot_ids:
                node = factor_ids.get(fid)
                if node is None or node.kind != want_kind:
                    err(
                        ValidationIssue(
                            "error",
                            f"bad-{slot_name}-slot",
                            f"{loc}: {slot_name} slot {fid!r} does not resolve to a "
                            f"{want_kind} factor",
                            element_id=bp.id,
                            location="blueprints",
                        )
                    )
        for op in bp.operation_slots:
            if not op or not op.strip():
                err(
                    ValidationIssue(
                        "error",
                        "empty-operation",
                        f"{loc}: empty operation slot",
                        element_id=bp.id,
                        location="blueprints",
                    )
                )

    for pos, tpl in enumerate(bundle.templates):
        if not isinstance(tpl, dict) or "feature_id" not in tpl:
            err(
                ValidationIssue(
                    "error",
                    "malformed-template",
                    f"template #{pos} is missing a feature_id",
                    location=f"templates[{pos}]",
                )
            )

    return report


# ---------------------------------------------------------------------------
# Loading / saving


def _read_json(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BundleParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"malformed JSON in {path}: {exc}") from exc


def load_bundle(path: str | Path) -> KnowledgeBundle:
    """Load and validate a bundle directory; raises on any error."""
    root = Path(path)
    if not root.is_dir():
        raise BundleParseError(f"bundle directory not found: {root}")
    meta = _read_json(root / "bundle.json")
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise BundleParseError(
            f"unsupported bundle schema_version {meta.get('schema_version')!r} "
            f"in {root / 'bundle.json'} (expected {SCHEMA_VERSION})"
        )

    def load_list(name: str, ctor):
        file = root / name
        if not file.exists():
            return ()
        data = _read_json(file)
        if not isinstance(data, list):
            raise BundleParseError(f"{file} must contain a JSON list")
        try:
            return tuple(ctor(item) for item in data)
        except (KeyError, TypeError) as exc:
            raise BundleParseError(f"malformed record in {file}: {exc}") from exc

    templates: list[dict] = []
    tdir = root / "templates"
    if tdir.is_dir():
        for tfile in sorted(tdir.glob("*.json")):
            templates.append(_read_json(tfile))

    bundle = KnowledgeBundle(
        domain=meta["domain"],
        version=meta["version"],
        taxonomy=load_list("taxonomy.json", TaxonomyElement.from_dict),
        catalogue=load_list("catalogue.json", CatalogueEntry.from_dict),
        factors=load_list("factors.json", FactorNode.from_dict),
        blueprints=load_list("blueprints.json", Blueprint.from_dict),
        templates=tuple(templates),
    )
    report = validate_bundle(bundle)
    if not report.ok:
        raise BundleValidationError(report)
    return bundle


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def save_bundle(bundle: KnowledgeBundle, path: str | Path) -> None:
    """Write a bundle directory; load_bundle(save_bundle(b)) preserves content."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    _write_json(
        root / "bundle.json",
        {"schema_version": SCHEMA_VERSION, "domain": bundle.domain, "version": bundle.version},
    )
    _write_json(root / "taxonomy.json", [e.to_dict() for e in bundle.taxonomy])
    _write_json(root / "catalogue.json", [c.to_dict() for c in bundle.catalogue])
    _write_json(root / "factors.json", [f.to_dict() for f in bundle.factors])
    _write_json(root / "blueprints.json", [b.to_dict() for b in bundle.blueprints])
    tdir = root / "templates"
    tdir.mkdir(exist_ok=True)
    for tpl in bundle.templates:
        name = tpl.get("template_id") or tpl["feature_id"]
        _write_json(tdir / f"{name}.json", tpl)


def sample_bundle_path() -> Path:
    """Path of the sample bundle shipped with the package."""
    from importlib.resources import files

    return Path(str(files("evalbench").joinpath("data/sample_bundle")))


# ---------------------------------------------------------------------------
# Lookups


def lookup_metrics(bundle: KnowledgeBundle, feature: str) -> list[CatalogueEntry]:
    """Catalogue entries for one performance feature, in definition order."""
    el = bundle.resolve_feature(feature)
    return [entry for entry in bundle.catalogue if entry.feature_id == el.id]


def lookup_factors(
    bundle: KnowledgeBundle,
    feature_ids: Iterable[str] = (),
    benchmark_names: Iterable[str] = (),
    metric_names: Iterable[str] = (),
) -> FactorCandidates:
    """Candidate experimental factors for the given features/benchmarks/metrics.

    Resource factors are looked up by feature links, workload factors by
    benchmark links; when no node of a kind carries link metadata the whole
    tree of that kind is returned. Quality factors are exactly the supplied
    metric names (the selected metrics act as the output-side factors).
    """
    features = [bundle.resolve_feature(f).id for f in feature_ids]
    benchmarks = list(benchmark_names)
    metrics = list(metric_names)

    def select(kind: str, keys: list[str]) -> tuple[FactorNode, ...]:
        nodes = [n for n in bundle.factors if n.kind == kind]
        if not keys:
            return ()
        if not any(n.applies_to for n in nodes):
            return tuple(nodes)
        return tuple(n for n in nodes if set(n.applies_to) & set(keys))

    return FactorCandidates(
        resource=select("resource", features),
        workload=select("workload", benchmarks),
        quality=tuple(metrics),
    )


_WS_RUN = re.compile(r"\s+")


def _normalize_keyword(keyword: str) -> str:
    return _WS_RUN.sub(" ", keyword.strip().lower())


def match_taxonomy_terms(bundle: KnowledgeBundle, text: str) -> list[TermMatch]:
    """Match taxonomy keywords in free text.

    Case-insensitive substring matching (no stemming): every occurrence of
    every keyword is a candidate; candidates are kept longest-match-first
    with non-overlapping spans, ordered by span start. When two elements
    share a keyword the element with the smaller id wins the span.
    """
    if not text:
        return []
    lowered = text.lower()
    candidates: list[tuple[int, int, str, TaxonomyElement]] = []
    for el in bundle.taxonomy:
        for raw in el.keywords:
            kw = _normalize_keyword(raw)
            if not kw:
                continue
            start = lowered.find(kw)
            while start != -1:
                candidates.append((start, len(kw), kw, el))
                start = lowered.find(kw, start + 1)
    # longest match first at each position; deterministic tie-break
    candidates.sort(key=lambda c: (c[0], -c[1], c[2], c[3].id))
    matches: list[TermMatch] = []
    taken_until = -1
    for start, length, kw, el in candidates:
        if start <= taken_until:
            continue
        end = start + length
        matches.append(TermMatch(element=el, keyword=kw, span=(start, end)))
        taken_until = end - 1
    return matches
