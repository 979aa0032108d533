"""Command-line surface of the workbench.

Exit codes: 0 success, 1 domain error, 2 usage error. The recurring flags
``--bundle``, ``--store``, ``--seed``, ``--format``, and ``--output`` fall
back to the environment variables ``EVALBENCH_BUNDLE``, ``EVALBENCH_STORE``,
``EVALBENCH_SEED``, ``EVALBENCH_FORMAT``, and ``EVALBENCH_OUTPUT``.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

from . import analysis, artefacts, doe, reporting, runner
from .engine import compare_runs
from .errors import WorkbenchError
from .journal import ProjectStore
from .steps import StepId


def _env(name: str, fallback=None):
    return os.environ.get(f"EVALBENCH_{name}", fallback)


def _default_bundle() -> str:
    return _env("BUNDLE") or str(artefacts.sample_bundle_path())


def _default_store() -> str:
    return _env("STORE") or "evalbench-store"


def _default_seed():
    raw = _env("SEED")
    return int(raw) if raw is not None else None


def _read_json_arg(value: str):
    if value == "-":
        return json.load(sys.stdin)
    return json.loads(Path(value).read_text(encoding="utf-8"))


def _emit(payload, args, text_renderer=None) -> None:
    fmt = getattr(args, "format", None) or _env("FORMAT") or "text"
    out = getattr(args, "output", None) or _env("OUTPUT")
    if fmt == "json" or text_renderer is None:
        rendered = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    else:
        rendered = text_renderer(payload)
    if out:
        Path(out).write_text(rendered + "\n", encoding="utf-8")
    else:
        print(rendered)


def _load_design_file(path: str) -> tuple[list[doe.Factor], doe.Factor | None]:
    data = _read_json_arg(path)
    raw = data["factors"] if isinstance(data, dict) else data
    blocking_raw = data.get("blocking") if isinstance(data, dict) else None
    factors = []
    blocking = doe.Factor.from_dict(blocking_raw) if blocking_raw else None
    for item in raw:
        factor = doe.Factor.from_dict(item)
        if factor.role == "blocking":
            blocking = factor
        elif factor.role == "design":
            factors.append(factor)
    return factors, blocking


# ---------------------------------------------------------------------------
# bundle


def _cmd_bundle_validate(args) -> int:
    try:
        bundle = artefacts.load_bundle(args.bundle)
    except WorkbenchError as exc:
        report = getattr(exc, "report", None)
        if report is not None:
            for issue in report.issues:
                print(f"{issue.severity}: [{issue.code}] {issue.message}", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = artefacts.validate_bundle(bundle)
    for issue in report.warnings:
        print(f"warning: [{issue.code}] {issue.message}")
    print(
        f"ok: bundle {bundle.domain!r} version {bundle.version} "
        f"({len(bundle.taxonomy)} taxonomy elements, {len(bundle.catalogue)} catalogue "
        f"entries, {len(bundle.factors)} factors, {len(bundle.blueprints)} blueprints, "
        f"{len(bundle.templates)} templates)"
    )
    return 0


def _cmd_bundle_show(args) -> int:
    bundle = artefacts.load_bundle(args.bundle)
    if args.feature:
        entries = artefacts.lookup_metrics(bundle, args.feature)
        payload = [e.to_dict() for e in entries]

        def render(data) -> str:
            lines = []
            for entry in data:
                metric = entry["metric"]
                lines.append(f"{metric['name']} [{metric['unit']}] ({metric['direction']})")
                for bench in entry["benchmarks"]:
                    lines.append(f"  - {bench['name']}")
            return "\n".join(lines) if lines else "(no catalogue entries)"

        _emit(payload, args, render)
        return 0
    if args.match:
        matches = artefacts.match_taxonomy_terms(bundle, args.match)
        payload = [
            {"element": m.element.id, "keyword": m.keyword, "span": list(m.span)}
            for m in matches
        ]
        _emit(payload, args, lambda data: "\n".join(
            f"{m['element']}: {m['keyword']!r} at {m['span']}" for m in data) or "(no matches)")
        return 0
    payload = {
        "domain": bundle.domain,
        "version": bundle.version,
        "features": [e.id for e in bundle.taxonomy if e.kind == "performance-feature"],
        "taxonomy": len(bundle.taxonomy),
        "catalogue": len(bundle.catalogue),
        "factors": len(bundle.factors),
        "blueprints": len(bundle.blueprints),
        "templates": len(bundle.templates),
    }
    _emit(payload, args, lambda d: "\n".join(f"{k}: {v}" for k, v in d.items()))
    return 0


# ---------------------------------------------------------------------------
# project


def _cmd_project_new(args) -> int:
    bundle = artefacts.load_bundle(args.bundle)
    store = ProjectStore(args.store)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    project = store.create_project(
        bundle, args.problem, seed, operator=args.operator, project_id=args.id
    )
    _emit(
        {"project_id": project.id, "seed": project.seed},
        args,
        lambda d: d["project_id"],
    )
    return 0


def _cmd_project_status(args) -> int:
    store = ProjectStore(args.store)
    project = store.load(args.id)
    payload = project.to_dict()
    payload["content_digest"] = project.content_digest()

    def render(d) -> str:
        done = ", ".join(f"{r['step']}@{r['iteration']}" for r in d["records"]) or "(none)"
        return (
            f"project {d['id']} (domain {d['bundle_domain']}, seed {d['seed']})\n"
            f"iteration: {d['iteration']}  concluded: {d['concluded']}\n"
            f"completed steps: {done}\n"
            f"log entries: {len(d['log'])}  pending runs: {len(d['pending_runs'])}\n"
            f"content digest: {d['content_digest']}"
        )

    _emit(payload, args, render)
    return 0


def _cmd_project_submit(args) -> int:
    bundle = artefacts.load_bundle(args.bundle)
    store = ProjectStore(args.store)
    step = StepId.parse(args.step)
    if args.auto:
        project = store.load(args.id)
        if step is StepId.EXPERIMENTAL_ANALYSIS:
            design = project.record_for(StepId.EXPERIMENTAL_DESIGN, project.iteration)
            impl = project.record_for(StepId.EXPERIMENTAL_IMPLEMENTATION, project.iteration)
            if design is None or impl is None:
                raise WorkbenchError("cannot auto-build analysis before design and implementation")
            spec = doe.DesignSpec.from_dict(design.payload["design"])
            payload = analysis.build_analysis_payload(
                spec.factors,
                design.payload["plan"],
                impl.payload["records"],
                spec.response_metrics,
            )
        elif step is StepId.CONCLUSION_DOCUMENTATION:
            payload = reporting.build_conclusion_payload(project, findings=args.findings or "")
        else:
            raise WorkbenchError(
                "--auto builds payloads only for experimental-analysis and "
                "conclusion-documentation"
            )
    else:
        if not args.payload:
            raise WorkbenchError("provide --payload FILE (or '-' for stdin), or --auto")
        payload = _read_json_arg(args.payload)
    iteration = args.iteration
    if iteration is None:
        iteration = store.load(args.id).iteration if (
            step in {StepId.EXPERIMENTAL_DESIGN, StepId.EXPERIMENTAL_IMPLEMENTATION,
                     StepId.EXPERIMENTAL_ANALYSIS, StepId.CONCLUSION_DOCUMENTATION}
        ) else 0
    project = store.submit(bundle, args.id, step, iteration, payload, operator=args.operator)
    print(f"recorded {step.value} (iteration {iteration}) for {project.id}")
    return 0


def _cmd_project_iterate(args) -> int:
    store = ProjectStore(args.store)
    project = store.begin_iteration(args.id, operator=args.operator)
    print(f"iteration {project.iteration} begun for {project.id}")
    return 0


def _cmd_project_compare(args) -> int:
    store = ProjectStore(args.store)
    a = store.load(args.project_a)
    b = store.load(args.project_b)
    report = compare_runs(a, b, numeric_rtol=args.rtol)
    _emit(
        report.to_dict(),
        args,
        lambda d: "\n".join(
            [f"overall: {d['overall']:.4f} (numeric rtol {d['numeric_rtol']})"]
            + [
                f"  {s['step']}@{s['iteration']}: {s['score']:.4f} ({s['detail']})"
                for s in d["steps"]
            ]
        ),
    )
    return 0


# ---------------------------------------------------------------------------
# design


def _cmd_design_generate(args) -> int:
    factors, blocking = _load_design_file(args.factors)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    spec = doe.DesignSpec(
        factors=tuple(factors),
        replicates=args.replicates,
        seed=seed,
        response_metrics=tuple(args.metrics.split(",")) if args.metrics else (),
        blocking=blocking,
    )
    plan = doe.full_factorial(spec)
    fmt = args.format or _env("FORMAT") or "json"
    out = args.output or _env("OUTPUT")
    if fmt == "csv":
        rendered = doe.plan_to_csv(plan, [f.name for f in spec.factors])
    else:
        rendered = json.dumps(
            {"design": spec.to_dict(), "plan": [r.to_dict() for r in plan]},
            indent=2,
            sort_keys=True,
            ensure_ascii=False,
        ) + "\n"
    if out:
        Path(out).write_text(rendered, encoding="utf-8")
        print(f"wrote {len(plan)} runs to {out}")
    else:
        sys.stdout.write(rendered)
    return 0


def _cmd_design_power(args) -> int:
    means = [float(x) for x in args.means.split(",")]
    seed = args.seed if args.seed is not None else 0
    if args.target_power is not None:
        n = doe.estimate_replicates(
            k=args.groups,
            means=means,
            sigma=args.sigma,
            alpha=args.alpha,
            target_power=args.target_power,
            n_max=args.n_max,
            trials=args.trials,
            seed=seed,
        )
        power = doe.simulate_power(args.groups, n, means, args.sigma, args.alpha, args.trials, seed)
        _emit({"n": n, "power": power}, args, lambda d: f"n={d['n']} power={d['power']:.4f}")
    else:
        if args.n is None:
            raise WorkbenchError("provide --n for a power estimate or --target-power for sizing")
        power = doe.simulate_power(
            args.groups, args.n, means, args.sigma, args.alpha, args.trials, seed
        )
        _emit({"n": args.n, "power": power}, args, lambda d: f"power={d['power']:.4f}")
    return 0


# ---------------------------------------------------------------------------
# run


def _cmd_run_execute(args) -> int:
    adapter = runner.load_adapter(args.adapter)
    if args.id:
        bundle = artefacts.load_bundle(args.bundle)
        store = ProjectStore(args.store)
        project = store.load(args.id)
        design = project.record_for(StepId.EXPERIMENTAL_DESIGN, project.iteration)
        if design is None:
            raise WorkbenchError("experimental-design is not complete for the current iteration")
        spec = doe.DesignSpec.from_dict(design.payload["design"])
        environment = runner.capture_environment(adapter)
        store.start_campaign(args.id, environment.to_dict(), adapter.to_dict())
        result = runner.execute_plan(
            design.payload["plan"],
            adapter,
            capture_env=False,
            failure_budget=args.budget,
            response_metrics=spec.response_metrics,
            on_record=lambda rec: store.record_run(args.id, rec.to_dict()),
        )
        payload = {
            "records": [r.to_dict() for r in result.records],
            "environment": environment.to_dict(),
            "adapter": adapter.to_dict(),
        }
        store.submit(bundle, args.id, StepId.EXPERIMENTAL_IMPLEMENTATION,
                     project.iteration, payload, operator=args.operator)
        ok = sum(1 for r in result.records if r.status == "ok")
        print(f"executed {len(result.records)} runs ({ok} ok) for {args.id}")
        return 0
    if not args.plan:
        raise WorkbenchError("provide --id (project mode) or --plan (standalone mode)")
    plan_data = _read_json_arg(args.plan)
    plan = plan_data["plan"] if isinstance(plan_data, dict) else plan_data
    result = runner.execute_plan(plan, adapter, failure_budget=args.budget)
    _emit(result.to_dict(), args, None)
    return 0


# ---------------------------------------------------------------------------
# analyze


def _samples_from_input(data) -> dict:
    if isinstance(data, dict) and "groups" in data:
        return data["groups"]
    if isinstance(data, dict):
        return data
    raise WorkbenchError("samples input must be an object mapping group -> observations")


def _cmd_analyze_anova(args) -> int:
    data = _read_json_arg(args.input)
    table = analysis.anova_oneway(_samples_from_input(data))
    _emit(
        table.to_dict(),
        args,
        lambda d: (
            f"SS_between={d['ss_between']:.6g} SS_within={d['ss_within']:.6g} "
            f"df=({d['df_between']},{d['df_within']}) F={d['f']} p={d['p']:.6g}"
            + (" [degenerate]" if d["degenerate"] else "")
        ),
    )
    return 0


def _cmd_analyze_effects(args) -> int:
    data = _read_json_arg(args.input)
    factors = [doe.Factor.from_dict(f) for f in data["factors"]]
    observations = [(r["combination"], float(r["value"])) for r in data["runs"]]
    effects = analysis.factorial_effects(factors, observations)
    _emit(
        [e.to_dict() for e in effects],
        args,
        lambda d: "\n".join(f"{e['term']}: {e['effect']:.6g} (share {e['share']:.3f})" for e in d),
    )
    return 0


def _cmd_analyze_pareto(args) -> int:
    data = _read_json_arg(args.input)
    raw = data["effects"] if isinstance(data, dict) else data
    effects = [analysis.EffectEstimate.from_dict(e) for e in raw]
    ranking = analysis.pareto_ranking(effects)
    _emit(
        ranking.to_dict(),
        args,
        lambda d: "\n".join(
            f"{e['term']}: |{abs(e['effect']):.6g}| cum {pct:.2f}%"
            for e, pct in zip(d["effects"], d["cumulative_pct"])
        )
        + ("\n(no dominant factor)" if d["no_dominant"] else ""),
    )
    return 0


def _cmd_analyze_boost(args) -> int:
    data = _read_json_arg(args.input)
    result = analysis.boosting_index(
        data["alternatives"], data["directions"], data.get("weights")
    )
    _emit(
        result.to_dict(),
        args,
        lambda d: "\n".join(
            f"{ix['alternative']}: aggregate {ix['aggregate']:.4f}" for ix in d["indices"]
        )
        + "\nranking: "
        + " > ".join(d["ranking"]),
    )
    return 0


def _cmd_analyze_chart(args) -> int:
    data = _read_json_arg(args.input)
    kind = args.kind
    if kind == "pareto":
        raw = data["effects"] if isinstance(data, dict) else data
        payload = analysis.chart_data(
            [analysis.EffectEstimate.from_dict(e) for e in raw], "pareto"
        )
    elif kind == "radar":
        result = analysis.boosting_index(
            data["alternatives"], data["directions"], data.get("weights")
        )
        payload = analysis.chart_data(result, "radar")
    else:
        payload = analysis.chart_data(_samples_from_input(data), kind)
    _emit(payload.to_dict(), args, None)
    return 0


# ---------------------------------------------------------------------------
# report


def _cmd_report_generate(args) -> int:
    store = ProjectStore(args.store)
    project = store.load(args.id)
    fmt = args.format or _env("FORMAT") or "markdown"
    document = reporting.generate_report(project, fmt, redact_volatile=args.redact_volatile)
    out = args.output or _env("OUTPUT")
    if out:
        Path(out).write_text(document, encoding="utf-8")
        print(f"wrote report to {out}")
    else:
        sys.stdout.write(document)
    return 0


def _cmd_template_make(args) -> int:
    bundle = artefacts.load_bundle(args.bundle)
    store = ProjectStore(args.store)
    project = store.load(args.id)
    template = reporting.generate_template(project, args.feature, bundle)
    if args.into_bundle:
        path = reporting.save_template(template, args.bundle)
        print(f"saved template {template.template_id} to {path}")
    else:
        out = args.output or _env("OUTPUT")
        rendered = json.dumps(template.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        if out:
            Path(out).write_text(rendered + "\n", encoding="utf-8")
            print(f"wrote template {template.template_id} to {out}")
        else:
            print(rendered)
    return 0


def _cmd_template_apply(args) -> int:
    bundle = artefacts.load_bundle(args.bundle)
    store = ProjectStore(args.store)
    if Path(args.template).exists():
        template = reporting.load_template(args.template)
    else:
        template = reporting.find_template(bundle, args.template)
    project = reporting.instantiate_template(
        template, bundle, seed=args.seed, operator=args.operator, store=store
    )
    _emit(
        {"project_id": project.id, "template_id": template.template_id},
        args,
        lambda d: d["project_id"],
    )
    return 0


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    from .service import serve

    host, _, port = args.address.rpartition(":")
    serve(
        host or "127.0.0.1",
        int(port),
        bundle_path=args.bundle,
        store_path=args.store,
        ui_path=args.ui,
    )
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(parser, bundle=False, store=False, fmt=False, output=False, operator=False):
    if bundle:
        parser.add_argument("--bundle", default=_default_bundle(), help="bundle directory")
    if store:
        parser.add_argument("--store", default=_default_store(), help="project store directory")
    if fmt:
        parser.add_argument("--format", choices=["text", "json", "markdown", "csv"], default=None)
    if output:
        parser.add_argument("--output", default=None, help="write output to this path")
    if operator:
        parser.add_argument("--operator", default=_env("OPERATOR", ""), help="operator identity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evalbench",
        description="Knowledge-driven performance evaluation workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bundle = sub.add_parser("bundle", help="knowledge bundle operations")
    bundle_sub = p_bundle.add_subparsers(dest="subcommand", required=True)
    p = bundle_sub.add_parser("validate", help="validate a bundle directory")
    _add_common(p, bundle=True)
    p.set_defaults(func=_cmd_bundle_validate)
    p = bundle_sub.add_parser("show", help="summarize a bundle or look up a feature")
    _add_common(p, bundle=True, fmt=True, output=True)
    p.add_argument("--feature", help="show catalogue entries for this feature")
    p.add_argument("--match", help="match taxonomy keywords in this text")
    p.set_defaults(func=_cmd_bundle_show)

    p_project = sub.add_parser("project", help="evaluation project lifecycle")
    project_sub = p_project.add_subparsers(dest="subcommand", required=True)
    p = project_sub.add_parser("new", help="create a project")
    _add_common(p, bundle=True, store=True, fmt=True, output=True, operator=True)
    p.add_argument("--problem", required=True, help="natural-language problem statement")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--id", default=None, help="explicit project id")
    p.set_defaults(func=_cmd_project_new)
    p = project_sub.add_parser("status", help="show a project snapshot")
    _add_common(p, store=True, fmt=True, output=True)
    p.add_argument("--id", required=True)
    p.set_defaults(func=_cmd_project_status)
    p = project_sub.add_parser("submit", help="submit a step output")
    _add_common(p, bundle=True, store=True, operator=True)
    p.add_argument("--id", required=True)
    p.add_argument("--step", required=True, help="step name, e.g. requirement-recognition")
    p.add_argument("--iteration", type=int, default=None)
    p.add_argument("--payload", help="JSON file with the step payload ('-' for stdin)")
    p.add_argument("--auto", action="store_true",
                   help="build the payload from project state (analysis/conclusion only)")
    p.add_argument("--findings", default="", help="findings text for --auto conclusion")
    p.set_defaults(func=_cmd_project_submit)
    p = project_sub.add_parser("iterate", help="reopen the experimental chain")
    _add_common(p, store=True, operator=True)
    p.add_argument("--id", required=True)
    p.set_defaults(func=_cmd_project_iterate)
    p = project_sub.add_parser("compare", help="repeatability comparison of two projects")
    _add_common(p, store=True, fmt=True, output=True)
    p.add_argument("project_a")
    p.add_argument("project_b")
    p.add_argument("--rtol", type=float, default=0.05)
    p.set_defaults(func=_cmd_project_compare)

    p_design = sub.add_parser("design", help="experiment design")
    design_sub = p_design.add_subparsers(dest="subcommand", required=True)
    p = design_sub.add_parser("generate", help="full factorial run plan")
    p.add_argument("--factors", required=True, help="JSON file with factor definitions")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--metrics", default="", help="comma-separated response metrics")
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_design_generate)
    p = design_sub.add_parser("power", help="simulated power / replicate sizing")
    _add_common(p, fmt=True, output=True)
    p.add_argument("--groups", type=int, required=True)
    p.add_argument("--means", required=True, help="comma-separated group means")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, default=None, help="per-group size for a power estimate")
    p.add_argument("--target-power", type=float, default=None)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=_cmd_design_power)

    p_run = sub.add_parser("run", help="benchmark execution")
    run_sub = p_run.add_subparsers(dest="subcommand", required=True)
    p = run_sub.add_parser("execute", help="execute a run plan with an adapter")
    _add_common(p, bundle=True, store=True, fmt=True, output=True, operator=True)
    p.add_argument("--id", default=None, help="project id (journaled campaign mode)")
    p.add_argument("--plan", default=None, help="plan JSON file (standalone mode)")
    p.add_argument("--adapter", required=True, help="adapter definition JSON file")
    p.add_argument("--budget", type=float, default=0.2, help="failure budget fraction")
    p.set_defaults(func=_cmd_run_execute)

    p_analyze = sub.add_parser("analyze", help="statistical analysis")
    analyze_sub = p_analyze.add_subparsers(dest="subcommand", required=True)
    for name, fn, extra in (
        ("anova", _cmd_analyze_anova, ()),
        ("effects", _cmd_analyze_effects, ()),
        ("pareto", _cmd_analyze_pareto, ()),
        ("boost", _cmd_analyze_boost, ()),
        ("chart", _cmd_analyze_chart, ("kind",)),
    ):
        p = analyze_sub.add_parser(name)
        _add_common(p, fmt=True, output=True)
        p.add_argument("--input", required=True, help="JSON input file ('-' for stdin)")
        if "kind" in extra:
            p.add_argument("--kind", required=True,
                           choices=sorted(analysis.CHART_KINDS))
        p.set_defaults(func=fn)

    p_report = sub.add_parser("report", help="reports and templates")
    report_sub = p_report.add_subparsers(dest="subcommand", required=True)
    p = report_sub.add_parser("generate", help="render an evaluation report")
    _add_common(p, store=True, fmt=True, output=True)
    p.add_argument("--id", required=True)
    p.add_argument("--redact-volatile", action="store_true",
                   help="blank timestamps/ids for replay comparison")
    p.set_defaults(func=_cmd_report_generate)
    p_template = report_sub.add_parser("template", help="evaluation templates")
    template_sub = p_template.add_subparsers(dest="subsubcommand", required=True)
    p = template_sub.add_parser("make", help="freeze a project into a template")
    _add_common(p, bundle=True, store=True, output=True)
    p.add_argument("--id", required=True)
    p.add_argument("--feature", required=True)
    p.add_argument("--into-bundle", action="store_true",
                   help="save into the bundle's templates directory")
    p.set_defaults(func=_cmd_template_make)
    p = template_sub.add_parser("apply", help="instantiate a template as a new project")
    _add_common(p, bundle=True, store=True, fmt=True, output=True, operator=True)
    p.add_argument("--template", required=True, help="template file or template id")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=_cmd_template_apply)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_common(p, bundle=True, store=True)
    p.add_argument("--address", default="127.0.0.1:8642", help="host:port to bind")
    p.add_argument("--ui", default=_env("UI"),
                   help="serve a built web UI directory at /ui (frontend/dist)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
