// Energy dashboards: one chart per workload level, one line per
// (pattern, namespace). Chart models carry the fetched y-values verbatim;
// rendering maps them to pixels but never rescales the data itself.

import type { SeriesEntry } from "./types.js";

export type ChartLine = {
  label: string;
  pattern: string;
  namespace: string;
  points: [number, number][];
};

export type Chart = {
  workload: string;
  windowSeconds: number;
  lines: ChartLine[];
};

export function groupSeries(series: SeriesEntry[]): Chart[] {
  const byWorkload = new Map<string, SeriesEntry[]>();
  for (const entry of series) {
    const bucket = byWorkload.get(entry.workload) ?? [];
    bucket.push(entry);
    byWorkload.set(entry.workload, bucket);
  }
  const charts: Chart[] = [];
  for (const workload of [...byWorkload.keys()].sort()) {
    const entries = byWorkload.get(workload)!;
    entries.sort((a, b) =>
      a.pattern === b.pattern
        ? a.namespace.localeCompare(b.namespace)
        : a.pattern.localeCompare(b.pattern));
    const first = entries[0];
    const windowSeconds =
      first && first.points.length > 1
        ? Math.round(first.points[1]![0] - first.points[0]![0])
        : 10;
    charts.push({
      workload,
      windowSeconds,
      lines: entries.map((entry) => ({
        label: `${entry.pattern} / ${entry.namespace}`,
        pattern: entry.pattern,
        namespace: entry.namespace,
        points: entry.points.map((p) => [p[0], p[1]] as [number, number]),
      })),
    });
  }
  return charts;
}

const LINE_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

export function renderChartSvg(chart: Chart, width = 640, height = 320): string {
  const margin = { top: 28, right: 16, bottom: 36, left: 56 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const allPoints = chart.lines.flatMap((line) => line.points);
  if (allPoints.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle">no data</text></svg>`;
  }
  const xs = allPoints.map((p) => p[0]);
  const ys = allPoints.map((p) => p[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = Math.max(...ys, 1e-9);

  const sx = (x: number) =>
    margin.left + (xMax === xMin ? 0 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) => margin.top + plotH - (y / yMax) * plotH;

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `role="img" aria-label="energy chart ${chart.workload}">`);
  parts.push(`<text x="${margin.left}" y="16" font-size="13" font-weight="bold">` +
    `workload: ${chart.workload}</text>`);
  parts.push(`<text x="12" y="${margin.top + plotH / 2}" font-size="11" ` +
    `transform="rotate(-90 12 ${margin.top + plotH / 2})" text-anchor="middle">` +
    `joules per ${chart.windowSeconds} s</text>`);
  parts.push(`<line x1="${margin.left}" y1="${margin.top + plotH}" ` +
    `x2="${margin.left + plotW}" y2="${margin.top + plotH}" stroke="#333"/>`);
  parts.push(`<line x1="${margin.left}" y1="${margin.top}" ` +
    `x2="${margin.left}" y2="${margin.top + plotH}" stroke="#333"/>`);

  chart.lines.forEach((line, index) => {
    const color = LINE_COLORS[index % LINE_COLORS.length];
    const path = line.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p[0]).toFixed(1)},${sy(p[1]).toFixed(1)}`)
      .join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5" ` +
      `data-label="${line.label}" data-values="${line.points.map((p) => p[1]).join(";")}"/>`);
    parts.push(`<text x="${margin.left + plotW - 4}" y="${margin.top + 14 + index * 14}" ` +
      `font-size="11" text-anchor="end" fill="${color}">${line.label}</text>`);
  });
  parts.push("</svg>");
  return parts.join("");
}

export const EMPTY_SERIES_MESSAGE =
  "No series recorded for this run yet. Collect metrics after the run finishes.";
