/** Browser entry point: wizard, artefact browser, run monitor, chart views.
 *
 * All state shown here is reconstructed from server responses; refreshing
 * the page at any point rebuilds the same view. Charts render ChartSeries
 * payloads verbatim (no client-side statistics).
 */

import { ApiClient } from "./api.js";
import { buildChart, toSvg } from "./charts.js";
import { clear, el, suggestedPayload } from "./render.js";
import {
  CatalogueEntryView,
  ProjectView,
  STEP_NAMES,
  STEP_TITLES,
  StepName,
  TaxonomyElementView,
} from "./types.js";
import { WizardController } from "./wizard.js";

const api = new ApiClient(localStorage.getItem("evalbench-base") ?? "");

let wizard: WizardController | null = null;
let runMonitorTimer: number | null = null;

function statusLine(text: string, kind: "info" | "error" = "info"): HTMLElement {
  return el("p", { class: `status ${kind}` }, text);
}

// ---------------------------------------------------------------------------
// Wizard tab

async function renderWizard(root: HTMLElement): Promise<void> {
  clear(root);
  if (!wizard) {
    root.append(renderProjectPicker());
    return;
  }
  const state = wizard.state;
  const nav = el("ol", { class: "steps" });
  for (const step of STEP_NAMES) {
    const done = state.completedSteps.some((s) => s.startsWith(`${step}@`));
    const active = state.currentStep === step;
    nav.append(
      el(
        "li",
        { class: active ? "active" : done ? "done" : "pending" },
        STEP_TITLES[step],
      ),
    );
  }
  root.append(
    el("h2", {}, `Project ${state.projectId}`),
    el(
      "p",
      {},
      `iteration ${state.iteration} - ${
        state.concluded ? "concluded" : `next: ${state.currentStep}`
      }`,
    ),
    nav,
  );
  for (const message of state.messages) {
    root.append(statusLine(message, "error"));
  }
  if (state.currentStep === "done") {
    const reportLink = el("button", {}, "View report");
    reportLink.addEventListener("click", async () => {
      const text = await api.getText(`/projects/${state.projectId}/report`);
      const pre = el("pre", { class: "report" }, text);
      clear(root);
      root.append(pre);
    });
    root.append(statusLine("Evaluation concluded."), reportLink);
    return;
  }
  root.append(renderStepForm(state.currentStep as StepName));
}

function renderProjectPicker(): HTMLElement {
  const panel = el("div", { class: "panel" });
  const problem = el("textarea", { rows: "3", placeholder: "Problem statement..." });
  const existing = el("input", { placeholder: "...or an existing project id" });
  const createButton = el("button", {}, "Create project");
  const openButton = el("button", {}, "Open project");
  createButton.addEventListener("click", async () => {
    const view = await api.post<ProjectView>("/projects", {
      problem: problem.value,
      seed: Math.floor(Math.random() * 2 ** 31),
    });
    wizard = await WizardController.load(api, view.id);
    await refreshAll();
  });
  openButton.addEventListener("click", async () => {
    wizard = await WizardController.load(api, existing.value.trim());
    await refreshAll();
  });
  panel.append(
    el("h2", {}, "Start an evaluation"),
    problem,
    createButton,
    el("hr"),
    existing,
    openButton,
  );
  return panel;
}

function renderStepForm(step: StepName): HTMLElement {
  const controller = wizard!;
  const panel = el("div", { class: "panel" });
  panel.append(el("h3", {}, STEP_TITLES[step]));
  if (!controller.canSubmit(step)) {
    panel.append(statusLine("This step is not yet open; the server decides the order."));
    return panel;
  }
  const prefill = suggestedPayload(controller);
  const editor = el("textarea", { rows: "14", class: "payload" });
  editor.value = prefill ? JSON.stringify(prefill, null, 2) : "{}";
  const candidateView = el(
    "details",
    {},
    el("summary", {}, "Candidates fetched from the knowledge bundle"),
    el("pre", {}, JSON.stringify(controller.state.candidates, null, 2) ?? "null"),
  );

  const submit = el("button", {}, "Submit step");
  submit.addEventListener("click", async () => {
    let accepted = false;
    if (step === "experimental-design") {
      const spec = JSON.parse(editor.value);
      await controller.previewDesign(spec);
      accepted = await controller.submitCurrent({});
    } else if (step === "experimental-implementation") {
      const adapter = JSON.parse(editor.value);
      startRunMonitor();
      accepted = await controller.submitCurrent({ adapter });
      stopRunMonitor();
    } else if (step === "experimental-analysis" || step === "conclusion-documentation") {
      accepted = await controller.submitCurrent({});
    } else {
      accepted = await controller.submitCurrent({ payload: JSON.parse(editor.value) });
    }
    if (accepted && step === "experimental-analysis") {
      await renderConcludeOrIterate();
      return;
    }
    await refreshAll();
  });

  if (step === "experimental-analysis" || step === "conclusion-documentation") {
    panel.append(
      statusLine(
        "The server assembles this payload from the recorded campaign (submit as-is).",
      ),
    );
    editor.value = JSON.stringify(controller.state.candidates, null, 2) ?? "{}";
    editor.setAttribute("readonly", "true");
  }
  panel.append(candidateView, editor, submit);
  return panel;
}

async function renderConcludeOrIterate(): Promise<void> {
  const controller = wizard!;
  const root = document.getElementById("wizard")!;
  await refreshAll();
  if (!controller.offersConcludeOrIterate()) {
    return;
  }
  const choice = el("div", { class: "panel" });
  const conclude = el("button", {}, "Conclude the evaluation");
  const iterate = el("button", {}, "Iterate: refine the design");
  conclude.addEventListener("click", async () => {
    await controller.submitCurrent({});
    await refreshAll();
  });
  iterate.addEventListener("click", async () => {
    await controller.iterate();
    await refreshAll();
  });
  choice.append(
    el("h3", {}, "Analysis recorded"),
    statusLine("Conclude now, or loop back to experimental design for another iteration."),
    conclude,
    iterate,
  );
  root.append(choice);
}

// ---------------------------------------------------------------------------
// Artefact browser tab

async function renderArtefacts(root: HTMLElement): Promise<void> {
  clear(root);
  const taxonomy = await api.get<{ elements: TaxonomyElementView[] }>("/bundle/taxonomy");
  const list = el("ul", {});
  for (const element of taxonomy.elements) {
    const item = el(
      "li",
      {},
      el("strong", {}, element.name),
      ` (${element.kind}) - ${element.definition}`,
    );
    if (element.kind === "performance-feature") {
      const button = el("button", { class: "small" }, "metrics");
      button.addEventListener("click", async () => {
        const entries = await api.get<{ entries: CatalogueEntryView[] }>("/bundle/metrics", {
          feature: element.id,
        });
        const sub = el("ul", {});
        for (const entry of entries.entries) {
          sub.append(
            el(
              "li",
              {},
              `${entry.metric.name} [${entry.metric.unit}] - benchmarks: ` +
                entry.benchmarks.map((b) => b.name).join(", "),
            ),
          );
        }
        item.append(sub);
        button.remove();
      });
      item.append(" ", button);
    }
    list.append(item);
  }
  root.append(el("h2", {}, "Taxonomy & catalogue"), list);
}

// ---------------------------------------------------------------------------
// Run monitor tab

function startRunMonitor(): void {
  if (runMonitorTimer === null) {
    runMonitorTimer = window.setInterval(() => void renderRuns(), 700);
  }
}

function stopRunMonitor(): void {
  if (runMonitorTimer !== null) {
    window.clearInterval(runMonitorTimer);
    runMonitorTimer = null;
  }
}

async function renderRuns(): Promise<void> {
  const root = document.getElementById("runs")!;
  clear(root);
  if (!wizard) {
    root.append(statusLine("Open a project first."));
    return;
  }
  const runs = await api.get<{
    iteration: number;
    pending: Record<string, unknown>[];
    sealed: Record<string, unknown>[];
  }>(`/projects/${wizard.projectId}/runs`);
  const records = runs.sealed.length > 0 ? runs.sealed : runs.pending;
  const table = el("table", {});
  table.append(
    el(
      "tr",
      {},
      ...["run", "status", "combination", "measurements"].map((h) => el("th", {}, h)),
    ),
  );
  for (const record of records) {
    table.append(
      el(
        "tr",
        {},
        el("td", {}, String(record["index"])),
        el("td", {}, String(record["status"])),
        el("td", {}, JSON.stringify(record["combination"])),
        el("td", {}, JSON.stringify(record["measurements"])),
      ),
    );
  }
  root.append(
    el("h2", {}, `Runs (iteration ${runs.iteration})`),
    statusLine(
      runs.sealed.length > 0
        ? `${runs.sealed.length} sealed records`
        : `${runs.pending.length} records so far (campaign in flight)`,
    ),
    table,
  );
}

// ---------------------------------------------------------------------------
// Charts tab

async function renderCharts(root: HTMLElement): Promise<void> {
  clear(root);
  root.append(el("h2", {}, "Charts"));
  if (!wizard) {
    root.append(statusLine("Open a project first."));
    return;
  }
  const host = el("div", { class: "chart-host" });
  const buttons = el("div", {});
  for (const kind of ["pareto", "column", "line", "scatter"]) {
    const button = el("button", {}, kind);
    button.addEventListener("click", async () => {
      try {
        const payload = await api.get(`/projects/${wizard!.projectId}/analysis/chart`, {
          kind,
        });
        host.innerHTML = toSvg(buildChart(payload));
      } catch (failure) {
        clear(host);
        host.append(statusLine(String(failure), "error"));
      }
    });
    buttons.append(button);
  }
  const radarInput = el("textarea", { rows: "6" });
  radarInput.value = JSON.stringify(
    {
      kind: "radar",
      alternatives: { X: { m1: 10, m2: 1 }, Y: { m1: 20, m2: 2 } },
      directions: { m1: "higher-better", m2: "higher-better" },
    },
    null,
    2,
  );
  const radarButton = el("button", {}, "radar (from boosting data)");
  radarButton.addEventListener("click", async () => {
    const body = JSON.parse(radarInput.value);
    const payload = await api.post("/analysis/chart", body);
    host.innerHTML = toSvg(buildChart(payload));
  });
  root.append(buttons, host, el("h3", {}, "Composite-index radar"), radarInput, radarButton);
}

// ---------------------------------------------------------------------------
// Shell

async function refreshAll(): Promise<void> {
  if (wizard) {
    await wizard.refresh();
    localStorage.setItem("evalbench-project", wizard.projectId);
  }
  await renderWizard(document.getElementById("wizard")!);
}

function wireTabs(): void {
  const panes: Record<string, (root: HTMLElement) => Promise<void> | void> = {
    wizard: (root) => renderWizard(root),
    artefacts: (root) => renderArtefacts(root),
    runs: () => renderRuns(),
    charts: (root) => renderCharts(root),
  };
  for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
    button.addEventListener("click", () => {
      for (const pane of document.querySelectorAll<HTMLElement>(".pane")) {
        pane.hidden = pane.id !== button.dataset.pane;
      }
      void panes[button.dataset.pane!]!(document.getElementById(button.dataset.pane!)!);
    });
  }
}

async function boot(): Promise<void> {
  wireTabs();
  const remembered = localStorage.getItem("evalbench-project");
  if (remembered) {
    try {
      wizard = await WizardController.load(api, remembered);
    } catch {
      localStorage.removeItem("evalbench-project");
    }
  }
  await renderWizard(document.getElementById("wizard")!);
}

void boot();
