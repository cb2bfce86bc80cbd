/**
 * Convergence curves and standalone SVG rendering.
 *
 * Pure with respect to its inputs: the same rows and options always produce
 * the same SVG string. Points keep the row order of the input file.
 */

import type { HistoryRow } from "./csv.js";

export type XColumn = "iter" | "elapsed_s";
export type YColumn = "gap_beta0" | "gap_betak";

export const X_COLUMNS: readonly XColumn[] = ["iter", "elapsed_s"];
export const Y_COLUMNS: readonly YColumn[] = ["gap_beta0", "gap_betak"];

/** Terminal iterates can report a gap of exactly 0 (or a tiny negative value
 * from cancellation); the log axis needs a positive floor. */
export const GAP_FLOOR = 1e-16;

export const DEFAULT_LABELS: Record<string, string> = {
  pg: "prox_grad",
  apg: "acc_prox_grad",
  rapg: "restart_acc_prox_grad",
  pdhg: "pdhg",
  rapdhg: "rapdhg",
};

export interface CurvePoint {
  x: number;
  y: number;
  restarted: boolean;
}

export interface Curve {
  id: string;
  label: string;
  points: CurvePoint[];
}

export interface PlotOptions {
  x: XColumn;
  y: YColumn;
  logY: boolean;
  title?: string;
  labels?: Record<string, string>;
  restartMarkers?: boolean;
  width?: number;
  height?: number;
}

/** One curve per algorithm group, in group order, points in row order. */
export function buildCurves(
  groups: Map<string, HistoryRow[]>, opts: PlotOptions,
): Curve[] {
  const curves: Curve[] = [];
  for (const [algo, rows] of groups) {
    const label = opts.labels?.[algo] ?? DEFAULT_LABELS[algo] ?? algo;
    const points = rows.map((row) => ({
      x: row[opts.x],
      y: opts.logY ? Math.max(row[opts.y], GAP_FLOOR) : row[opts.y],
      restarted: row.restarted,
    }));
    curves.push({ id: algo, label, points });
  }
  return curves;
}

const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                 "#8c564b", "#e377c2", "#7f7f7f"];

const X_AXIS_LABEL: Record<XColumn, string> = {
  iter: "iteration",
  elapsed_s: "time (s)",
};

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  if (Number.isInteger(v) && Math.abs(v) < 1e7) return String(v);
  return v.toPrecision(3);
}

function linearTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rough)!;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Decade ticks covering [min, max], thinned to at most `count`. */
function logTicks(min: number, max: number, count: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const stride = Math.max(1, Math.ceil((hi - lo) / count));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e += stride) ticks.push(e);
  return ticks;
}

/** Render curves as a standalone SVG document. */
export function renderSvg(curves: Curve[], opts: PlotOptions): string {
  if (curves.length === 0) {
    throw new Error("nothing to plot: no curves");
  }
  const width = opts.width ?? 720;
  const height = opts.height ?? 440;
  const ml = 74, mr = 16, mt = opts.title ? 40 : 20, mb = 48;
  const pw = width - ml - mr;
  const ph = height - mt - mb;

  const xs = curves.flatMap((c) => c.points.map((p) => p.x));
  const ys = curves.flatMap((c) => c.points.map((p) => p.y));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const xOf = (v: number) => ml + ((v - xMin) / (xMax - xMin || 1)) * pw;

  let yOf: (v: number) => number;
  let yTickValues: number[];
  let yTickLabels: string[];
  if (opts.logY) {
    const yLo = Math.log10(Math.max(Math.min(...ys), GAP_FLOOR));
    const yHi = Math.log10(Math.max(Math.max(...ys), GAP_FLOOR));
    const lo = yLo === yHi ? yLo - 1 : yLo;
    const hi = yLo === yHi ? yHi + 1 : yHi;
    yOf = (v) =>
      mt + ph - ((Math.log10(Math.max(v, GAP_FLOOR)) - lo) / (hi - lo)) * ph;
    const exponents = logTicks(Math.pow(10, lo), Math.pow(10, hi), 9);
    yTickValues = exponents.map((e) => Math.pow(10, e));
    yTickLabels = exponents.map((e) => `1e${e}`);
  } else {
    const rawLo = Math.min(...ys);
    const rawHi = Math.max(...ys);
    const lo = rawLo === rawHi ? rawLo - 1 : rawLo;
    const hi = rawLo === rawHi ? rawHi + 1 : rawHi;
    yOf = (v) => mt + ph - ((v - lo) / (hi - lo)) * ph;
    yTickValues = linearTicks(lo, hi, 6);
    yTickLabels = yTickValues.map(fmt);
  }

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" `
    + `font-family="Helvetica, Arial, sans-serif" data-yscale="${opts.logY ? "log" : "linear"}">\n`;
  s += `<rect width="${width}" height="${height}" fill="#fff"/>\n`;
  if (opts.title) {
    s += `<text x="${ml}" y="22" font-size="13" font-weight="600" fill="#222">`
      + `${esc(opts.title)}</text>\n`;
  }

  for (let i = 0; i < yTickValues.length; i++) {
    const y = yOf(yTickValues[i]).toFixed(1);
    s += `<line x1="${ml}" y1="${y}" x2="${ml + pw}" y2="${y}" stroke="#eee"/>\n`;
    s += `<text x="${ml - 6}" y="${(Number(y) + 3.5).toFixed(1)}" text-anchor="end" `
      + `font-size="10" fill="#555">${esc(yTickLabels[i])}</text>\n`;
  }
  for (const v of linearTicks(xMin, xMax, 7)) {
    if (v < xMin - 1e-9 || v > xMax + 1e-9) continue;
    const x = xOf(v).toFixed(1);
    s += `<line x1="${x}" y1="${mt + ph}" x2="${x}" y2="${mt + ph + 4}" stroke="#333"/>\n`;
    s += `<text x="${x}" y="${mt + ph + 16}" text-anchor="middle" font-size="10" `
      + `fill="#555">${esc(fmt(v))}</text>\n`;
  }

  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333"/>\n`;
  s += `<text x="${ml + pw / 2}" y="${height - 10}" text-anchor="middle" font-size="11" `
    + `fill="#333">${esc(X_AXIS_LABEL[opts.x])}</text>\n`;
  s += `<text x="16" y="${mt + ph / 2}" text-anchor="middle" font-size="11" fill="#333" `
    + `transform="rotate(-90,16,${mt + ph / 2})">${esc(opts.y)}</text>\n`;

  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = curve.points
      .map((p) => `${xOf(p.x).toFixed(2)},${yOf(p.y).toFixed(2)}`)
      .join(" ");
    s += `<polyline class="curve" data-algo="${esc(curve.id)}" fill="none" `
      + `stroke="${color}" stroke-width="1.5" points="${pts}"/>\n`;
    if (opts.restartMarkers) {
      for (const p of curve.points) {
        if (!p.restarted) continue;
        s += `<circle class="restart" cx="${xOf(p.x).toFixed(2)}" `
          + `cy="${yOf(p.y).toFixed(2)}" r="2.5" fill="${color}"/>\n`;
      }
    }
  });

  const legendWidth = Math.max(...curves.map((c) => c.label.length)) * 6.2 + 30;
  const legendX = ml + pw - legendWidth - 6;
  const legendY = mt + 8;
  s += `<rect x="${legendX}" y="${legendY}" width="${legendWidth}" `
    + `height="${curves.length * 15 + 8}" rx="3" fill="#fff" fill-opacity="0.88" `
    + `stroke="#ccc" stroke-width="0.5"/>\n`;
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = legendY + 12 + i * 15;
    s += `<line x1="${legendX + 6}" y1="${y - 3.5}" x2="${legendX + 22}" `
      + `y2="${y - 3.5}" stroke="${color}" stroke-width="1.5"/>\n`;
    s += `<text class="legend-label" x="${legendX + 26}" y="${y}" font-size="10" `
      + `fill="#333">${esc(curve.label)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}
