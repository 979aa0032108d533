/** Chart construction from ChartSeries payloads.
 *
 * Every chart is derived purely from a payload the service computed; this
 * module does layout only, never statistics. buildChart is total: an
 * unrecognized or malformed payload yields a fallback model that renders
 * the raw payload instead of crashing.
 */

import { ChartSeriesPayload } from "./types.js";

export const CHART_WIDTH = 520;
export const CHART_HEIGHT = 300;
const MARGIN = { top: 28, right: 56, bottom: 42, left: 56 };

export interface ParetoBar {
  label: string;
  value: number;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface ParetoChartModel {
  kind: "pareto";
  title: string;
  yLabel: string;
  bars: ParetoBar[];
  cumulative: { label: string; pct: number; x: number; y: number }[];
  noDominant: boolean;
}

export interface RadarChartModel {
  kind: "radar";
  title: string;
  spokes: { label: string; angle: number; x: number; y: number }[];
  polygons: { name: string; vertices: { x: number; y: number }[]; points: string }[];
  center: { x: number; y: number };
  radius: number;
}

export interface GroupedPoint {
  label: string;
  x: number;
  y: number;
  value: number;
}

export interface GroupedChartModel {
  kind: "column" | "line" | "scatter";
  title: string;
  xLabel: string;
  yLabel: string;
  series: { name: string; points: GroupedPoint[] }[];
  yMax: number;
  yMin: number;
}

export interface FallbackChartModel {
  kind: "fallback";
  reason: string;
  payload: unknown;
}

export type ChartModel =
  | ParetoChartModel
  | RadarChartModel
  | GroupedChartModel
  | FallbackChartModel;

const PLOT_WIDTH = CHART_WIDTH - MARGIN.left - MARGIN.right;
const PLOT_HEIGHT = CHART_HEIGHT - MARGIN.top - MARGIN.bottom;

function fallback(reason: string, payload: unknown): FallbackChartModel {
  return { kind: "fallback", reason, payload };
}

function isSeriesPayload(payload: unknown): payload is ChartSeriesPayload {
  return (
    typeof payload === "object" &&
    payload !== null &&
    typeof (payload as ChartSeriesPayload).kind === "string" &&
    Array.isArray((payload as ChartSeriesPayload).series)
  );
}

function buildPareto(payload: ChartSeriesPayload): ChartModel {
  const bars = payload.series.find((s) => s.name === "effects");
  const cumulative = payload.series.find((s) => s.name === "cumulative");
  if (!bars || !cumulative || bars.points.length === 0) {
    return fallback("pareto payload lacks effects/cumulative series", payload);
  }
  const values = bars.points.map(([, v]) => v);
  const maxValue = Math.max(...values, 1e-12);
  const slot = PLOT_WIDTH / bars.points.length;
  const barWidth = slot * 0.6;
  const model: ParetoChartModel = {
    kind: "pareto",
    title: payload.title || "effect ranking",
    yLabel: payload.y_label || "absolute effect",
    bars: bars.points.map(([label, value], i) => {
      const height = (value / maxValue) * PLOT_HEIGHT;
      return {
        label: String(label),
        value,
        x: MARGIN.left + i * slot + (slot - barWidth) / 2,
        y: MARGIN.top + PLOT_HEIGHT - height,
        width: barWidth,
        height,
      };
    }),
    cumulative: cumulative.points.map(([label, pct], i) => ({
      label: String(label),
      pct,
      x: MARGIN.left + i * slot + slot / 2,
      y: MARGIN.top + PLOT_HEIGHT - (pct / 100) * PLOT_HEIGHT,
    })),
    noDominant: Boolean(payload.meta["no_dominant"]),
  };
  return model;
}

function buildRadar(payload: ChartSeriesPayload): ChartModel {
  const spokes = payload.meta["spokes"];
  if (!Array.isArray(spokes) || spokes.length === 0 || payload.series.length === 0) {
    return fallback("radar payload lacks spokes", payload);
  }
  const center = { x: CHART_WIDTH / 2, y: CHART_HEIGHT / 2 + 8 };
  const radius = Math.min(PLOT_WIDTH, PLOT_HEIGHT) / 2;
  const angleOf = (i: number) => (2 * Math.PI * i) / spokes.length - Math.PI / 2;
  const model: RadarChartModel = {
    kind: "radar",
    title: payload.title || "composite index profile",
    spokes: spokes.map((label, i) => ({
      label: String(label),
      angle: angleOf(i),
      x: center.x + radius * Math.cos(angleOf(i)),
      y: center.y + radius * Math.sin(angleOf(i)),
    })),
    polygons: payload.series.map((entry) => {
      const byLabel = new Map(entry.points.map(([label, v]) => [String(label), v]));
      const vertices = spokes.map((label, i) => {
        const value = Math.max(0, Math.min(1, byLabel.get(String(label)) ?? 0));
        return {
          x: center.x + radius * value * Math.cos(angleOf(i)),
          y: center.y + radius * value * Math.sin(angleOf(i)),
        };
      });
      return {
        name: entry.name,
        vertices,
        points: vertices.map((v) => `${v.x.toFixed(2)},${v.y.toFixed(2)}`).join(" "),
      };
    }),
    center,
    radius,
  };
  return model;
}

function buildGrouped(payload: ChartSeriesPayload): ChartModel {
  if (payload.series.length === 0 || payload.series.every((s) => s.points.length === 0)) {
    return fallback(`${payload.kind} payload has no points`, payload);
  }
  const values = payload.series.flatMap((s) => s.points.map(([, v]) => v));
  const yMax = Math.max(...values);
  const yMin = Math.min(...values, 0);
  const span = yMax - yMin || 1;
  const maxCount = Math.max(...payload.series.map((s) => s.points.length));
  const slot = PLOT_WIDTH / Math.max(maxCount, 1);
  const model: GroupedChartModel = {
    kind: payload.kind as "column" | "line" | "scatter",
    title: payload.title,
    xLabel: payload.x_label,
    yLabel: payload.y_label + (payload.unit ? ` [${payload.unit}]` : ""),
    series: payload.series.map((entry) => ({
      name: entry.name,
      points: entry.points.map(([label, value], i) => ({
        label: String(label),
        value,
        x: MARGIN.left + i * slot + slot / 2,
        y: MARGIN.top + PLOT_HEIGHT - ((value - yMin) / span) * PLOT_HEIGHT,
      })),
    })),
    yMax,
    yMin,
  };
  return model;
}

export function buildChart(payload: unknown): ChartModel {
  if (!isSeriesPayload(payload)) {
    return fallback("not a chart-series payload", payload);
  }
  try {
    switch (payload.kind) {
      case "pareto":
        return buildPareto(payload);
      case "radar":
        return buildRadar(payload);
      case "column":
      case "line":
      case "scatter":
        return buildGrouped(payload);
      default:
        return fallback(`unknown chart kind ${payload.kind}`, payload);
    }
  } catch (failure) {
    return fallback(`chart construction failed: ${String(failure)}`, payload);
  }
}

function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const PALETTE = ["#3567b5", "#c2562f", "#3f8f4f", "#8457a8", "#a8872f", "#478f8f"];

export function toSvg(model: ChartModel): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}" ` +
      `width="${CHART_WIDTH}" height="${CHART_HEIGHT}" role="img">`,
  ];
  const title = (text: string) =>
    `<text x="${CHART_WIDTH / 2}" y="18" text-anchor="middle" font-size="13" ` +
    `font-weight="bold">${escapeXml(text)}</text>`;

  if (model.kind === "fallback") {
    const raw = escapeXml(JSON.stringify(model.payload, null, 2) ?? "null").slice(0, 2000);
    parts.push(title("unrecognized chart payload"));
    parts.push(
      `<text x="12" y="40" font-size="10">${escapeXml(model.reason)}</text>`,
      `<foreignObject x="12" y="52" width="${CHART_WIDTH - 24}" height="${CHART_HEIGHT - 64}">` +
        `<pre xmlns="http://www.w3.org/1999/xhtml" style="font-size:9px">${raw}</pre>` +
        `</foreignObject>`,
    );
  } else if (model.kind === "pareto") {
    parts.push(title(model.title));
    for (const bar of model.bars) {
      parts.push(
        `<rect x="${bar.x.toFixed(2)}" y="${bar.y.toFixed(2)}" width="${bar.width.toFixed(2)}" ` +
          `height="${bar.height.toFixed(2)}" fill="${PALETTE[0]}"/>`,
        `<text x="${(bar.x + bar.width / 2).toFixed(2)}" y="${CHART_HEIGHT - 24}" ` +
          `text-anchor="middle" font-size="10">${escapeXml(bar.label)}</text>`,
      );
    }
    const path = model.cumulative
      .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
      .join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${PALETTE[1]}" stroke-width="2"/>`);
    for (const point of model.cumulative) {
      parts.push(
        `<circle cx="${point.x.toFixed(2)}" cy="${point.y.toFixed(2)}" r="3" fill="${PALETTE[1]}"/>`,
      );
    }
    if (model.noDominant) {
      parts.push(
        `<text x="${CHART_WIDTH / 2}" y="${CHART_HEIGHT - 6}" text-anchor="middle" ` +
          `font-size="10" fill="#888">no dominant factor</text>`,
      );
    }
  } else if (model.kind === "radar") {
    parts.push(title(model.title));
    for (const spoke of model.spokes) {
      parts.push(
        `<line x1="${model.center.x}" y1="${model.center.y}" x2="${spoke.x.toFixed(2)}" ` +
          `y2="${spoke.y.toFixed(2)}" stroke="#ccc"/>`,
        `<text x="${spoke.x.toFixed(2)}" y="${spoke.y.toFixed(2)}" font-size="10" ` +
          `text-anchor="middle">${escapeXml(spoke.label)}</text>`,
      );
    }
    model.polygons.forEach((polygon, i) => {
      const color = PALETTE[i % PALETTE.length];
      parts.push(
        `<polygon points="${polygon.points}" fill="${color}22" stroke="${color}" ` +
          `stroke-width="2"><title>${escapeXml(polygon.name)}</title></polygon>`,
      );
    });
  } else {
    parts.push(title(model.title || model.kind));
    model.series.forEach((entry, seriesIndex) => {
      const color = PALETTE[seriesIndex % PALETTE.length];
      if (model.kind === "column") {
        for (const point of entry.points) {
          const base = CHART_HEIGHT - MARGIN.bottom;
          parts.push(
            `<rect x="${(point.x - 14).toFixed(2)}" y="${point.y.toFixed(2)}" width="28" ` +
              `height="${(base - point.y).toFixed(2)}" fill="${color}"/>`,
            `<text x="${point.x.toFixed(2)}" y="${CHART_HEIGHT - 24}" text-anchor="middle" ` +
              `font-size="10">${escapeXml(point.label)}</text>`,
          );
        }
      } else if (model.kind === "line") {
        const path = entry.points
          .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
          .join(" ");
        parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="2"/>`);
      } else {
        for (const point of entry.points) {
          parts.push(
            `<circle cx="${point.x.toFixed(2)}" cy="${point.y.toFixed(2)}" r="3.5" ` +
              `fill="${color}"><title>${escapeXml(entry.name)}</title></circle>`,
          );
        }
      }
    });
  }
  parts.push("</svg>");
  return parts.join("");
}
