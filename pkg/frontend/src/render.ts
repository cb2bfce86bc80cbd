/** File-level entry point: CSV paths in, SVG file out. */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { groupByAlgo, parseHistory, type HistoryRow } from "./csv.js";
import {
  buildCurves, renderSvg,
  type Curve, type PlotOptions, type XColumn, type YColumn,
} from "./plot.js";

export interface PlotSpec {
  /** History CSVs; a merged file yields one curve per algorithm it contains. */
  inputs: string[];
  output: string;
  x: XColumn;
  y: YColumn;
  logY: boolean;
  title?: string;
  labels?: Record<string, string>;
  restartMarkers?: boolean;
}

export interface RenderResult {
  svg: string;
  curves: Curve[];
}

/** Read, plot, and write. Returns the curves for programmatic inspection. */
export function render(spec: PlotSpec): RenderResult {
  const rows: HistoryRow[] = [];
  for (const path of spec.inputs) {
    rows.push(...parseHistory(readFileSync(path, "utf-8"), basename(path)));
  }
  const opts: PlotOptions = {
    x: spec.x,
    y: spec.y,
    logY: spec.logY,
    title: spec.title,
    labels: spec.labels,
    restartMarkers: spec.restartMarkers,
  };
  const curves = buildCurves(groupByAlgo(rows), opts);
  const svg = renderSvg(curves, opts);
  writeFileSync(spec.output, svg);
  return { svg, curves };
}
