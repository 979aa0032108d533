"""HTTP surface of the workbench (FastAPI).

Every CLI capability has an HTTP equivalent over the same engine: bundle
lookups, project lifecycle, design generation, campaign execution,
analysis, reports, and templates. JSON bodies mirror the library's
``to_dict`` forms.

Error mapping: 404 unknown resource, 409 workflow gating violation,
422 payload contract violation, 400 other domain errors. Mutating
endpoints accept a client-supplied ``request_id`` (body field or
``X-Request-Id`` header); a request id that was already journaled is not
re-applied, so retries are safe. Mutations are serialized per project by
the store; bundle reads are lock-free.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import __version__, analysis, artefacts, doe, reporting, runner
from .engine import Project, compare_runs
from .errors import (
    GatingError,
    PayloadError,
    UnknownIdError,
    WorkbenchError,
)
from .journal import ProjectStore
from .steps import StepId


def _project_view(project: Project) -> dict:
    data = project.to_dict()
    data["content_digest"] = project.content_digest()
    return data


def _request_id(request: Request, body: Optional[dict]) -> Optional[str]:
    if body and body.get("request_id"):
        return str(body["request_id"])
    return request.headers.get("X-Request-Id")


def create_app(
    bundle_path: str | Path,
    store_path: str | Path,
    ui_path: str | Path | None = None,
) -> FastAPI:
    bundle = artefacts.load_bundle(bundle_path)
    store = ProjectStore(store_path)
    app = FastAPI(title="evalbench", version=__version__)
    app.state.bundle = bundle
    app.state.bundle_path = Path(bundle_path)
    app.state.store = store

    if ui_path and Path(ui_path).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    def reload_bundle() -> artefacts.KnowledgeBundle:
        app.state.bundle = artefacts.load_bundle(app.state.bundle_path)
        return app.state.bundle

    @app.exception_handler(WorkbenchError)
    def on_domain_error(request: Request, exc: WorkbenchError):
        status = 400
        if isinstance(exc, UnknownIdError):
            status = 404
        elif isinstance(exc, GatingError):
            status = 409
        elif isinstance(exc, PayloadError):
            status = 422
        detail = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, GatingError) and exc.missing_step:
            detail["missing_step"] = exc.missing_step
        return JSONResponse(status_code=status, content=detail)

    # -- bundle ---------------------------------------------------------------

    @app.get("/bundle")
    def bundle_meta():
        b = app.state.bundle
        return {
            "domain": b.domain,
            "version": b.version,
            "taxonomy": len(b.taxonomy),
            "catalogue": len(b.catalogue),
            "factors": len(b.factors),
            "blueprints": len(b.blueprints),
            "templates": len(b.templates),
            "validation": artefacts.validate_bundle(b).to_dict(),
        }

    @app.get("/bundle/taxonomy")
    def bundle_taxonomy(kind: Optional[str] = None):
        elements = app.state.bundle.taxonomy
        if kind:
            elements = [e for e in elements if e.kind == kind]
        return {"elements": [e.to_dict() for e in elements]}

    @app.get("/bundle/catalogue")
    def bundle_catalogue():
        return {"entries": [e.to_dict() for e in app.state.bundle.catalogue]}

    @app.get("/bundle/metrics")
    def bundle_metrics(feature: str):
        entries = artefacts.lookup_metrics(app.state.bundle, feature)
        return {"feature": feature, "entries": [e.to_dict() for e in entries]}

    @app.get("/bundle/factors")
    def bundle_factors(features: str = "", benchmarks: str = "", metrics: str = ""):
        split = lambda s: [x for x in s.split(",") if x]
        candidates = artefacts.lookup_factors(
            app.state.bundle, split(features), split(benchmarks), split(metrics)
        )
        return candidates.to_dict()

    @app.get("/bundle/match")
    def bundle_match(text: str = ""):
        matches = artefacts.match_taxonomy_terms(app.state.bundle, text)
        return {
            "matches": [
                {"element": m.element.to_dict(), "keyword": m.keyword, "span": list(m.span)}
                for m in matches
            ]
        }

    @app.get("/bundle/blueprints")
    def bundle_blueprints():
        return {"blueprints": [b.to_dict() for b in app.state.bundle.blueprints]}

    # -- templates --------------------------------------------------------------

    @app.get("/templates")
    def list_templates():
        return {"templates": list(app.state.bundle.templates)}

    @app.post("/templates")
    def make_template(request: Request, body: dict = Body(...)):
        project = store.load(body["project_id"])
        template = reporting.generate_template(project, body["feature_id"], app.state.bundle)
        reporting.save_template(template, app.state.bundle_path)
        reload_bundle()
        return template.to_dict()

    # -- projects ---------------------------------------------------------------

    @app.get("/projects")
    def list_projects():
        return {"projects": store.list_projects()}

    @app.post("/projects", status_code=201)
    def create_project(request: Request, body: dict = Body(...)):
        rid = _request_id(request, body)
        if body.get("template_id") or body.get("template"):
            if body.get("template"):
                template = reporting.EvaluationTemplate.from_dict(body["template"])
            else:
                template = reporting.find_template(app.state.bundle, body["template_id"])
            project = reporting.instantiate_template(
                template,
                app.state.bundle,
                seed=body.get("seed"),
                operator=body.get("operator", ""),
                project_id=body.get("id"),
                store=store,
            )
            return _project_view(project)
        if "problem" not in body:
            raise PayloadError("body must contain 'problem' (or a template reference)")
        import secrets

        seed = body.get("seed")
        seed = int(seed) if seed is not None else secrets.randbits(63)
        project = store.create_project(
            app.state.bundle,
            body["problem"],
            seed,
            operator=body.get("operator", ""),
            project_id=body.get("id"),
            request_id=rid,
        )
        return _project_view(project)

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return _project_view(store.load(project_id))

    @app.get("/projects/{project_id}/steps/{step}")
    def get_step(project_id: str, step: str, iteration: Optional[int] = None):
        project = store.load(project_id)
        step_id = StepId.parse(step)
        it = iteration if iteration is not None else project.iteration
        record = project.record_for(step_id, it)
        if record is None and iteration is None:
            record = project.record_for(step_id, 0)
        if record is None:
            raise UnknownIdError(
                f"step {step_id.value} has no record for iteration {it} in {project_id}"
            )
        return record.to_dict()

    @app.post("/projects/{project_id}/steps/{step}")
    def post_step(project_id: str, step: str, request: Request, body: dict = Body(default={})):
        rid = _request_id(request, body)
        step_id = StepId.parse(step)
        project = store.load(project_id)
        iteration = body.get("iteration")
        if iteration is None:
            iteration = project.iteration if (
                step_id in {StepId.EXPERIMENTAL_DESIGN, StepId.EXPERIMENTAL_IMPLEMENTATION,
                            StepId.EXPERIMENTAL_ANALYSIS, StepId.CONCLUSION_DOCUMENTATION}
            ) else 0
        payload = body.get("payload")
        if payload is None and body.get("auto"):
            if step_id is StepId.EXPERIMENTAL_ANALYSIS:
                payload = _auto_analysis_payload(project)
            elif step_id is StepId.CONCLUSION_DOCUMENTATION:
                payload = reporting.build_conclusion_payload(
                    project, findings=body.get("findings", "")
                )
            else:
                raise PayloadError(
                    "auto payloads exist only for experimental-analysis and "
                    "conclusion-documentation"
                )
        if payload is None:
            raise PayloadError("body must contain 'payload' (or 'auto': true)")
        project = store.submit(
            app.state.bundle,
            project_id,
            step_id,
            int(iteration),
            payload,
            operator=body.get("operator", ""),
            request_id=rid,
        )
        return _project_view(project)

    @app.post("/projects/{project_id}/iterations")
    def post_iteration(project_id: str, request: Request, body: dict = Body(default={})):
        rid = _request_id(request, body)
        project = store.begin_iteration(
            project_id, operator=body.get("operator", ""), request_id=rid
        )
        return _project_view(project)

    def _campaign_inputs(project: Project):
        design = project.record_for(StepId.EXPERIMENTAL_DESIGN, project.iteration)
        if design is None:
            raise GatingError(
                "experimental-design is not complete for the current iteration",
                missing_step=StepId.EXPERIMENTAL_DESIGN.value,
            )
        spec = doe.DesignSpec.from_dict(design.payload["design"])
        return spec, design.payload["plan"]

    def _auto_analysis_payload(project: Project) -> dict:
        spec, plan = _campaign_inputs(project)
        impl = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, project.iteration)
        if impl is None:
            raise GatingError(
                "experimental-implementation is not complete for the current iteration",
                missing_step=StepId.EXPERIMENTAL_IMPLEMENTATION.value,
            )
        return analysis.build_analysis_payload(
            spec.factors, plan, impl.payload["records"], spec.response_metrics
        )

    @app.post("/projects/{project_id}/design")
    def post_design(project_id: str, request: Request, body: dict = Body(...)):
        rid = _request_id(request, body)
        if "design" in body:
            spec = doe.DesignSpec.from_dict(body["design"])
        else:
            factors = tuple(doe.Factor.from_dict(f) for f in body["factors"])
            blocking = doe.Factor.from_dict(body["blocking"]) if body.get("blocking") else None
            project = store.load(project_id)
            seed = int(body.get("seed", project.seed))
            spec = doe.DesignSpec(
                factors=factors,
                replicates=int(body.get("replicates", 1)),
                seed=seed,
                response_metrics=tuple(body.get("response_metrics", [])),
                blocking=blocking,
            )
        plan = [r.to_dict() for r in doe.full_factorial(spec)]
        payload = {"design": spec.to_dict(), "plan": plan}
        project = store.load(project_id)
        project = store.submit(
            app.state.bundle,
            project_id,
            StepId.EXPERIMENTAL_DESIGN,
            project.iteration,
            payload,
            operator=body.get("operator", ""),
            request_id=rid,
        )
        view = _project_view(project)
        view["plan"] = plan
        return view

    @app.post("/projects/{project_id}/execute")
    def post_execute(project_id: str, request: Request, body: dict = Body(...)):
        rid = _request_id(request, body)
        if rid and store.seen_request(project_id, rid):
            return _project_view(store.load(project_id))
        adapter = runner.BenchmarkAdapter.from_dict(body["adapter"])
        project = store.load(project_id)
        spec, plan = _campaign_inputs(project)
        environment = runner.capture_environment(adapter)
        store.start_campaign(project_id, environment.to_dict(), adapter.to_dict(), request_id=rid)
        result = runner.execute_plan(
            plan,
            adapter,
            capture_env=False,
            failure_budget=float(body.get("failure_budget", 0.2)),
            response_metrics=spec.response_metrics,
            on_record=lambda rec: store.record_run(project_id, rec.to_dict()),
        )
        payload = {
            "records": [r.to_dict() for r in result.records],
            "environment": environment.to_dict(),
            "adapter": adapter.to_dict(),
        }
        project = store.submit(
            app.state.bundle,
            project_id,
            StepId.EXPERIMENTAL_IMPLEMENTATION,
            project.iteration,
            payload,
            operator=body.get("operator", ""),
        )
        return _project_view(project)

    @app.get("/projects/{project_id}/runs")
    def get_runs(project_id: str):
        project = store.load(project_id)
        record = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, project.iteration)
        sealed = record.payload["records"] if record else []
        return {
            "iteration": project.iteration,
            "pending": list(project.pending_runs),
            "sealed": sealed,
            "environment": project.campaign_environment,
        }

    # -- analysis over the current iteration's campaign -------------------------

    def _campaign_records(project: Project):
        impl = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, project.iteration)
        if impl is None:
            raise GatingError(
                "experimental-implementation is not complete for the current iteration",
                missing_step=StepId.EXPERIMENTAL_IMPLEMENTATION.value,
            )
        return impl.payload["records"]

    @app.get("/projects/{project_id}/analysis/payload")
    def analysis_payload(project_id: str):
        return _auto_analysis_payload(store.load(project_id))

    @app.get("/projects/{project_id}/analysis/anova")
    def analysis_anova(project_id: str, metric: Optional[str] = None, factor: Optional[str] = None):
        project = store.load(project_id)
        spec, plan = _campaign_inputs(project)
        records = _campaign_records(project)
        metric = metric or (spec.response_metrics[0] if spec.response_metrics else None)
        if metric is None:
            raise PayloadError("no response metric available")
        factor_name = factor or spec.factors[0].name
        observations = analysis.runs_to_observations(plan, records, metric)
        groups: dict[str, list[float]] = {}
        for combo, value in observations:
            groups.setdefault(str(combo.get(factor_name)), []).append(value)
        usable = {k: v for k, v in groups.items() if len(v) >= 2}
        table = analysis.anova_oneway(usable)
        return {"metric": metric, "factor": factor_name, "anova": table.to_dict()}

    def _effects_for(project: Project, metric: Optional[str]):
        spec, plan = _campaign_inputs(project)
        records = _campaign_records(project)
        metric = metric or (spec.response_metrics[0] if spec.response_metrics else None)
        if metric is None:
            raise PayloadError("no response metric available")
        observations = analysis.runs_to_observations(plan, records, metric)
        return metric, analysis.factorial_effects(spec.factors, observations)

    @app.get("/projects/{project_id}/analysis/effects")
    def analysis_effects(project_id: str, metric: Optional[str] = None):
        metric, effects = _effects_for(store.load(project_id), metric)
        return {"metric": metric, "effects": [e.to_dict() for e in effects]}

    @app.get("/projects/{project_id}/analysis/pareto")
    def analysis_pareto(project_id: str, metric: Optional[str] = None):
        metric, effects = _effects_for(store.load(project_id), metric)
        return {"metric": metric, "pareto": analysis.pareto_ranking(effects).to_dict()}

    @app.get("/projects/{project_id}/analysis/chart")
    def analysis_chart(
        project_id: str,
        kind: str,
        metric: Optional[str] = None,
        factor: Optional[str] = None,
    ):
        project = store.load(project_id)
        if kind == "pareto":
            metric, effects = _effects_for(project, metric)
            chart = analysis.chart_data(effects, "pareto", title=f"{metric}: effect ranking")
            return chart.to_dict()
        if kind in {"column", "line", "scatter"}:
            spec, plan = _campaign_inputs(project)
            records = _campaign_records(project)
            metric = metric or (spec.response_metrics[0] if spec.response_metrics else None)
            factor_name = factor or spec.factors[0].name
            observations = analysis.runs_to_observations(plan, records, metric)
            groups: dict[str, list[float]] = {}
            for combo, value in observations:
                groups.setdefault(str(combo.get(factor_name)), []).append(value)
            chart = analysis.chart_data(
                groups, kind, title=f"{metric} by {factor_name}", x_label=factor_name,
                y_label=metric,
            )
            return chart.to_dict()
        raise PayloadError(
            f"chart kind {kind!r} is not derivable from campaign records; "
            "radar charts come from POST /analysis/boost data"
        )

    @app.get("/projects/{project_id}/report", response_class=PlainTextResponse)
    def project_report(project_id: str, format: str = "markdown", redact: bool = False):
        project = store.load(project_id)
        return reporting.generate_report(project, format, redact_volatile=redact)

    @app.get("/projects/{project_id}/compare/{other_id}")
    def project_compare(project_id: str, other_id: str, rtol: float = 0.05):
        a = store.load(project_id)
        b = store.load(other_id)
        return compare_runs(a, b, numeric_rtol=rtol).to_dict()

    # -- stateless mirrors of the CLI analysis/design commands ------------------

    @app.post("/design/generate")
    def design_generate(body: dict = Body(...)):
        spec = doe.DesignSpec.from_dict(body["design"]) if "design" in body else doe.DesignSpec(
            factors=tuple(doe.Factor.from_dict(f) for f in body["factors"]),
            replicates=int(body.get("replicates", 1)),
            seed=int(body.get("seed", 0)),
            response_metrics=tuple(body.get("response_metrics", [])),
            blocking=doe.Factor.from_dict(body["blocking"]) if body.get("blocking") else None,
        )
        plan = doe.full_factorial(spec)
        return {"design": spec.to_dict(), "plan": [r.to_dict() for r in plan]}

    @app.post("/design/power")
    def design_power(body: dict = Body(...)):
        means = [float(x) for x in body["means"]]
        k = int(body.get("groups", len(means)))
        common = dict(
            sigma=float(body["sigma"]),
            alpha=float(body.get("alpha", 0.05)),
            trials=int(body.get("trials", 20000)),
            seed=int(body.get("seed", 0)),
        )
        if "target_power" in body:
            n = doe.estimate_replicates(
                k=k, means=means, target_power=float(body["target_power"]),
                n_max=int(body.get("n_max", 50)), **common,
            )
            power = doe.simulate_power(k, n, means, **common)
            return {"n": n, "power": power}
        n = int(body["n"])
        return {"n": n, "power": doe.simulate_power(k, n, means, **common)}

    @app.post("/analysis/anova")
    def stateless_anova(body: dict = Body(...)):
        groups = body.get("groups", body)
        return analysis.anova_oneway(groups).to_dict()

    @app.post("/analysis/effects")
    def stateless_effects(body: dict = Body(...)):
        factors = [doe.Factor.from_dict(f) for f in body["factors"]]
        observations = [(r["combination"], float(r["value"])) for r in body["runs"]]
        return {"effects": [e.to_dict() for e in analysis.factorial_effects(factors, observations)]}

    @app.post("/analysis/pareto")
    def stateless_pareto(body: dict = Body(...)):
        raw = body["effects"] if isinstance(body, dict) else body
        effects = [analysis.EffectEstimate.from_dict(e) for e in raw]
        return analysis.pareto_ranking(effects).to_dict()

    @app.post("/analysis/boost")
    def stateless_boost(body: dict = Body(...)):
        result = analysis.boosting_index(
            body["alternatives"], body["directions"], body.get("weights")
        )
        return result.to_dict()

    @app.post("/analysis/chart")
    def stateless_chart(body: dict = Body(...)):
        kind = body["kind"]
        if kind == "pareto":
            effects = [analysis.EffectEstimate.from_dict(e) for e in body["effects"]]
            return analysis.chart_data(effects, "pareto").to_dict()
        if kind == "radar":
            result = analysis.boosting_index(
                body["alternatives"], body["directions"], body.get("weights")
            )
            return analysis.chart_data(result, "radar").to_dict()
        return analysis.chart_data(body["groups"], kind).to_dict()

    return app


def serve(
    host: str,
    port: int,
    bundle_path: str | Path,
    store_path: str | Path,
    ui_path: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(bundle_path, store_path, ui_path=ui_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")
