/** Small DOM helpers and per-step form prefills for the wizard UI. */

import {
  CatalogueEntryView,
  FactorCandidatesView,
  ProjectView,
  StepName,
  TaxonomyElementView,
} from "./types.js";
import { recordFor, WizardController } from "./wizard.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

/** A reasonable editable starting payload for the current step, derived
 * from the server-fetched candidates (prefill only; the evaluator edits). */
export function suggestedPayload(wizard: WizardController): Record<string, unknown> | null {
  const step = wizard.state.currentStep;
  const candidates = wizard.state.candidates;
  const view: ProjectView = wizard.view;
  switch (step) {
    case "requirement-recognition": {
      const matches =
        (candidates as { matches?: { element: TaxonomyElementView }[] })?.matches ?? [];
      const seen = new Set<string>();
      const questions = matches
        .filter((m) => {
          if (seen.has(m.element.id)) return false;
          seen.add(m.element.id);
          return m.element.kind === "performance-feature";
        })
        .map((m, i) => ({
          id: `q${i + 1}`,
          text: `How does the system perform with respect to ${m.element.name}?`,
          elements: [m.element.id],
          status: "open",
        }));
      return { questions };
    }
    case "feature-identification": {
      const elements = (candidates as { elements?: TaxonomyElementView[] })?.elements ?? [];
      return { features: elements.slice(0, 2).map((e) => e.id) };
    }
    case "metrics-benchmarks-listing": {
      const perFeature = (candidates ?? {}) as Record<string, { entries: CatalogueEntryView[] }>;
      const list = Object.entries(perFeature).flatMap(([feature, data]) =>
        data.entries.map((entry) => ({
          feature,
          metric: entry.metric.name,
          benchmarks: entry.benchmarks.map((b) => b.name),
        })),
      );
      return { candidates: list };
    }
    case "metrics-benchmarks-selection": {
      const listing = (candidates as { candidates?: { metric: string; benchmarks: string[] }[] })
        ?.candidates ?? [];
      const first = listing[0];
      return {
        metrics: first ? [first.metric] : [],
        benchmarks: first?.benchmarks.slice(0, 1) ?? [],
      };
    }
    case "factors-listing": {
      const found = candidates as FactorCandidatesView;
      return {
        resource: found.resource.map((n) => n.name),
        workload: found.workload.map((n) => n.name),
        quality: found.quality,
      };
    }
    case "factors-selection": {
      const listing = candidates as { resource: string[]; workload: string[] };
      const factors = [
        ...listing.resource.slice(0, 1).map((name) => ({
          name,
          kind: "resource",
          levels: ["level-a", "level-b"],
          role: "design",
        })),
        ...listing.workload.slice(0, 1).map((name) => ({
          name,
          kind: "workload",
          levels: ["level-a", "level-b"],
          role: "design",
        })),
      ];
      return { factors };
    }
    case "experimental-design": {
      const selection = candidates as { factors?: Record<string, unknown>[] };
      const chosen = recordFor(view, "metrics-benchmarks-selection");
      return {
        factors: (selection.factors ?? []).filter((f) => f["role"] === "design"),
        replicates: 2,
        seed: view.seed,
        response_metrics: (chosen?.payload["metrics"] as string[]) ?? [],
      };
    }
    case "experimental-implementation":
      return {
        name: "my-benchmark",
        command: "benchmark-tool --size {factor:example}",
        timeout: 60,
        rules: [{ metric: "example", unit: "", pattern: "value=([0-9.]+)" }],
      };
    default:
      return null;
  }
}
