/** Server-authoritative wizard over the evaluation workflow.
 *
 * The controller holds no state of its own beyond transient form scratch
 * and surfaced error messages: the current step, completed steps, and the
 * per-step candidate data are always recomputed from server responses, so
 * reloading the page (or constructing a fresh controller) reconstructs the
 * wizard exactly. Submissions map 1:1 to service mutations; a 409 answer
 * resets navigation to the server's truth.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  AdapterInput,
  CatalogueEntryView,
  DesignSpecInput,
  FactorCandidatesView,
  ITERATION_STEPS,
  ProjectView,
  STEP_NAMES,
  StepName,
  StepRecordView,
} from "./types.js";

export type WizardStep = StepName | "done";

export interface WizardServerState {
  projectId: string;
  iteration: number;
  concluded: boolean;
  currentStep: WizardStep;
  completedSteps: string[]; // "step@iteration", workflow order
  candidates: unknown; // server-derived helper data for the current step
}

export interface WizardState extends WizardServerState {
  messages: string[]; // surfaced 409/422 messages (local, transient)
}

export interface DesignPreview {
  design: Record<string, unknown>;
  plan: Record<string, unknown>[];
}

export function stepIteration(step: StepName, view: ProjectView): number {
  if (ITERATION_STEPS.has(step) || step === "conclusion-documentation") {
    return view.iteration;
  }
  return 0;
}

export function recordFor(
  view: ProjectView,
  step: StepName,
  iteration?: number,
): StepRecordView | undefined {
  const wanted = iteration ?? stepIteration(step, view);
  return view.records.find((r) => r.step === step && r.iteration === wanted);
}

export function currentStepOf(view: ProjectView): WizardStep {
  if (view.concluded) {
    return "done";
  }
  for (const step of STEP_NAMES) {
    if (!recordFor(view, step)) {
      return step;
    }
  }
  return "done";
}

function payloadOf(view: ProjectView, step: StepName): Record<string, unknown> {
  const record = recordFor(view, step);
  if (!record) {
    throw new Error(`step ${step} has no record yet`);
  }
  return record.payload;
}

export class WizardController {
  readonly api: ApiClient;
  readonly projectId: string;
  state: WizardState;
  view: ProjectView;
  designPreview: DesignPreview | null = null;

  private constructor(api: ApiClient, view: ProjectView) {
    this.api = api;
    this.projectId = view.id;
    this.view = view;
    this.state = {
      projectId: view.id,
      iteration: view.iteration,
      concluded: view.concluded,
      currentStep: currentStepOf(view),
      completedSteps: [],
      candidates: null,
      messages: [],
    };
  }

  static async load(api: ApiClient, projectId: string): Promise<WizardController> {
    const view = await api.get<ProjectView>(`/projects/${projectId}`);
    const controller = new WizardController(api, view);
    await controller.syncFromView(view);
    return controller;
  }

  /** Server truth only; what a page refresh must reconstruct identically. */
  serverState(): WizardServerState {
    const { projectId, iteration, concluded, currentStep, completedSteps, candidates } =
      this.state;
    return JSON.parse(
      JSON.stringify({ projectId, iteration, concluded, currentStep, completedSteps, candidates }),
    ) as WizardServerState;
  }

  /** Only the step the server would accept next is submittable. */
  canSubmit(step: StepName): boolean {
    return this.state.currentStep === step;
  }

  /** After analysis the evaluator decides: conclude, or loop back to design. */
  offersConcludeOrIterate(): boolean {
    return this.state.currentStep === "conclusion-documentation";
  }

  async refresh(): Promise<void> {
    const view = await this.api.get<ProjectView>(`/projects/${this.projectId}`);
    await this.syncFromView(view);
  }

  private async syncFromView(view: ProjectView): Promise<void> {
    this.view = view;
    const currentStep = currentStepOf(view);
    const completedSteps = view.records
      .map((r) => ({ key: `${r.step}@${r.iteration}`, order: STEP_NAMES.indexOf(r.step), it: r.iteration }))
      .sort((a, b) => a.order - b.order || a.it - b.it)
      .map((r) => r.key);
    this.state = {
      ...this.state,
      projectId: view.id,
      iteration: view.iteration,
      concluded: view.concluded,
      currentStep,
      completedSteps,
      candidates: currentStep === "done" ? null : await this.fetchCandidates(view, currentStep),
    };
  }

  private async fetchCandidates(view: ProjectView, step: StepName): Promise<unknown> {
    switch (step) {
      case "requirement-recognition":
        return this.api.get(`/bundle/match`, { text: view.problem });
      case "feature-identification":
        return this.api.get(`/bundle/taxonomy`, { kind: "performance-feature" });
      case "metrics-benchmarks-listing": {
        const features = payloadOf(view, "feature-identification")["features"] as string[];
        const perFeature: Record<string, { entries: CatalogueEntryView[] }> = {};
        for (const feature of features) {
          perFeature[feature] = await this.api.get(`/bundle/metrics`, { feature });
        }
        return perFeature;
      }
      case "metrics-benchmarks-selection":
        return payloadOf(view, "metrics-benchmarks-listing");
      case "factors-listing": {
        const features = payloadOf(view, "feature-identification")["features"] as string[];
        const selection = payloadOf(view, "metrics-benchmarks-selection");
        return this.api.get<FactorCandidatesView>(`/bundle/factors`, {
          features: features.join(","),
          benchmarks: (selection["benchmarks"] as string[]).join(","),
          metrics: (selection["metrics"] as string[]).join(","),
        });
      }
      case "factors-selection":
        return payloadOf(view, "factors-listing");
      case "experimental-design":
        return payloadOf(view, "factors-selection");
      case "experimental-implementation": {
        const design = payloadOf(view, "experimental-design");
        const plan = design["plan"] as unknown[];
        return { runs: plan.length, design: design["design"] };
      }
      case "experimental-analysis":
        return this.api.get(`/projects/${view.id}/analysis/payload`);
      case "conclusion-documentation":
        return null;
    }
  }

  /** Ask the server to expand a design spec into a reviewable seeded plan. */
  async previewDesign(spec: DesignSpecInput): Promise<DesignPreview> {
    const preview = await this.api.post<DesignPreview>(`/design/generate`, {
      factors: spec.factors,
      replicates: spec.replicates,
      seed: spec.seed,
      response_metrics: spec.response_metrics,
      blocking: spec.blocking ?? null,
    });
    this.designPreview = preview;
    return preview;
  }

  private async postSubmission(input: SubmissionInput): Promise<void> {
    const step = this.state.currentStep;
    if (step === "done") {
      throw new Error("the evaluation is already concluded");
    }
    if (step === "experimental-design") {
      const preview = this.designPreview;
      if (!preview) {
        throw new Error("preview the design before submitting it");
      }
      await this.api.post(`/projects/${this.projectId}/steps/${step}`, {
        payload: { design: preview.design, plan: preview.plan },
        operator: input.operator ?? "",
      });
      return;
    }
    if (step === "experimental-implementation") {
      if (!input.adapter) {
        throw new Error("an adapter definition is required to launch runs");
      }
      await this.api.post(`/projects/${this.projectId}/execute`, {
        adapter: input.adapter as unknown as Record<string, unknown>,
        failure_budget: input.failureBudget ?? 0.2,
        operator: input.operator ?? "",
      });
      return;
    }
    if (step === "experimental-analysis" || step === "conclusion-documentation") {
      const body: Record<string, unknown> = input.payload
        ? { payload: input.payload }
        : { auto: true, findings: input.findings ?? "" };
      body["operator"] = input.operator ?? "";
      await this.api.post(`/projects/${this.projectId}/steps/${step}`, body);
      return;
    }
    await this.api.post(`/projects/${this.projectId}/steps/${step}`, {
      payload: input.payload ?? {},
      operator: input.operator ?? "",
    });
  }

  /**
   * Submit the current step. Exactly one mutating call per invocation;
   * returns true on acceptance. Contract errors (422) surface inline;
   * gating conflicts (409) also reset navigation to the server's state.
   */
  async submitCurrent(input: SubmissionInput = {}): Promise<boolean> {
    try {
      await this.postSubmission(input);
    } catch (failure) {
      if (failure instanceof ApiError) {
        this.state.messages = [failure.message];
        if (failure.status === 409) {
          await this.refresh();
        }
        return false;
      }
      throw failure;
    }
    this.state.messages = [];
    this.designPreview = null;
    await this.refresh();
    return true;
  }

  async iterate(): Promise<boolean> {
    try {
      await this.api.post(`/projects/${this.projectId}/iterations`, {});
    } catch (failure) {
      if (failure instanceof ApiError) {
        this.state.messages = [failure.message];
        if (failure.status === 409) {
          await this.refresh();
        }
        return false;
      }
      throw failure;
    }
    this.state.messages = [];
    await this.refresh();
    return true;
  }
}

export interface SubmissionInput {
  payload?: Record<string, unknown>;
  adapter?: AdapterInput;
  failureBudget?: number;
  findings?: string;
  operator?: string;
}
