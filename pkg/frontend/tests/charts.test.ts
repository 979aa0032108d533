/** Chart rendering: pareto and radar series from the service render with
 * correct bar order, a cumulative terminus at 100%, and full spoke counts. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  buildChart,
  GroupedChartModel,
  ParetoChartModel,
  RadarChartModel,
  toSvg,
} from "../src/charts.js";
import { LiveService, startService } from "./service.js";

let service: LiveService;
let api: ApiClient;

beforeAll(async () => {
  service = await startService();
  api = new ApiClient(service.base);
});

afterAll(() => {
  service?.stop();
});

describe("chart rendering (criterion 12)", () => {
  it("renders the pareto payload with descending bars ending at 100%", async () => {
    const payload = await api.post("/analysis/chart", {
      kind: "pareto",
      effects: [
        { term: "A", effect: 4.0 },
        { term: "B", effect: 1.0 },
        { term: "AB", effect: 0.5 },
      ],
    });
    const model = buildChart(payload) as ParetoChartModel;
    expect(model.kind).toBe("pareto");
    expect(model.bars.map((b) => b.label)).toEqual(["A", "B", "AB"]);
    const values = model.bars.map((b) => b.value);
    expect(values).toEqual([4.0, 1.0, 0.5]);
    expect([...values].sort((x, y) => y - x)).toEqual(values);
    const pcts = model.cumulative.map((c) => c.pct);
    expect(pcts[0]).toBeCloseTo(72.72, 1);
    expect(pcts[1]).toBeCloseTo(90.9, 1);
    expect(pcts[pcts.length - 1]).toBe(100.0);
    // bar heights mirror the magnitudes; cumulative line rises
    expect(model.bars[0]!.height).toBeGreaterThan(model.bars[1]!.height);
    const ys = model.cumulative.map((c) => c.y);
    expect([...ys].sort((a, b) => b - a)).toEqual(ys); // screen y decreases upward

    const svg = toSvg(model);
    expect(svg).toContain("<svg");
    expect((svg.match(/<rect /g) ?? []).length).toBe(3);
    expect(svg).toContain("<path");
  });

  it("renders the radar payload with one polygon per alternative and all spokes", async () => {
    const payload = await api.post("/analysis/chart", {
      kind: "radar",
      alternatives: {
        X: { m1: 10, m2: 1, m3: 5 },
        Y: { m1: 20, m2: 2, m3: 3 },
      },
      directions: {
        m1: "higher-better",
        m2: "higher-better",
        m3: "lower-better",
      },
    });
    const model = buildChart(payload) as RadarChartModel;
    expect(model.kind).toBe("radar");
    expect(model.spokes.map((s) => s.label)).toEqual(["m1", "m2", "m3"]);
    expect(model.polygons).toHaveLength(2);
    for (const polygon of model.polygons) {
      expect(polygon.vertices).toHaveLength(3);
      for (const vertex of polygon.vertices) {
        const distance = Math.hypot(vertex.x - model.center.x, vertex.y - model.center.y);
        expect(distance).toBeLessThanOrEqual(model.radius + 1e-9);
      }
    }
    const svg = toSvg(model);
    expect((svg.match(/<polygon /g) ?? []).length).toBe(2);
    expect((svg.match(/<line /g) ?? []).length).toBe(3);
  });

  it("renders grouped samples as column, line, and scatter", async () => {
    for (const kind of ["column", "line", "scatter"] as const) {
      const payload = await api.post("/analysis/chart", {
        kind,
        groups: { small: [3.0, 4.0], large: [8.0, 9.0] },
      });
      const model = buildChart(payload) as GroupedChartModel;
      expect(model.kind).toBe(kind);
      if (kind === "scatter") {
        expect(model.series).toHaveLength(2);
        expect(model.series[0]!.points).toHaveLength(2);
      } else {
        expect(model.series[0]!.points.map((p) => p.label)).toEqual(["small", "large"]);
        expect(model.series[0]!.points.map((p) => p.value)).toEqual([3.5, 8.5]);
      }
      expect(toSvg(model)).toContain("<svg");
    }
  });

  it("falls back to a raw view on malformed payloads instead of crashing", () => {
    for (const payload of [null, 42, "nope", {}, { kind: "mystery", series: [] },
                           { kind: "pareto", series: [] }]) {
      const model = buildChart(payload);
      expect(model.kind).toBe("fallback");
      expect(toSvg(model)).toContain("unrecognized chart payload");
    }
  });
});
