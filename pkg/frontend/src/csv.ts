/**
 * Reader for the solver's convergence-history CSVs.
 *
 * Every history file, per-algorithm or merged, carries the same header:
 *
 *   algo,iter,elapsed_s,gap_beta0,gap_betak,step_norm,restarted,epoch
 *
 * Rows are iteration-ordered within each algorithm and must stay that way:
 * curves are drawn in file order, never sorted.
 */

export const HISTORY_COLUMNS = [
  "algo",
  "iter",
  "elapsed_s",
  "gap_beta0",
  "gap_betak",
  "step_norm",
  "restarted",
  "epoch",
] as const;

export type HistoryColumn = (typeof HISTORY_COLUMNS)[number];

export interface HistoryRow {
  algo: string;
  iter: number;
  elapsed_s: number;
  gap_beta0: number;
  gap_betak: number;
  step_norm: number;
  restarted: boolean;
  epoch: number;
}

export class CsvError extends Error {}

function parseNumber(
  field: string, column: string, source: string, lineNo: number,
): number {
  const trimmed = field.trim();
  const value = Number(trimmed);
  if (trimmed === "" || Number.isNaN(value)) {
    throw new CsvError(
      `${source}: line ${lineNo}: bad number ${JSON.stringify(field)} in column "${column}"`,
    );
  }
  return value;
}

/** Parse one history CSV. `source` names the input in error messages. */
export function parseHistory(text: string, source = "<csv>"): HistoryRow[] {
  const lines = text.split(/\r?\n/);
  let start = 0;
  while (start < lines.length && lines[start].trim() === "") start++;
  if (start === lines.length) {
    throw new CsvError(`${source}: no data rows`);
  }

  const header = lines[start].split(",").map((name) => name.trim());
  const indexOf = new Map<string, number>();
  header.forEach((name, at) => {
    if (!indexOf.has(name)) indexOf.set(name, at);
  });
  for (const column of HISTORY_COLUMNS) {
    if (!indexOf.has(column)) {
      throw new CsvError(`${source}: missing column "${column}"`);
    }
  }

  const rows: HistoryRow[] = [];
  for (let i = start + 1; i < lines.length; i++) {
    if (lines[i].trim() === "") continue;
    const fields = lines[i].split(",");
    const lineNo = i + 1;
    if (fields.length !== header.length) {
      throw new CsvError(
        `${source}: line ${lineNo}: expected ${header.length} fields, got ${fields.length}`,
      );
    }
    const num = (column: HistoryColumn) =>
      parseNumber(fields[indexOf.get(column)!], column, source, lineNo);
    rows.push({
      algo: fields[indexOf.get("algo")!].trim(),
      iter: num("iter"),
      elapsed_s: num("elapsed_s"),
      gap_beta0: num("gap_beta0"),
      gap_betak: num("gap_betak"),
      step_norm: num("step_norm"),
      restarted: num("restarted") !== 0,
      epoch: num("epoch"),
    });
  }
  if (rows.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  return rows;
}

/** Group rows by algorithm id, keeping first-seen group order and row order. */
export function groupByAlgo(rows: HistoryRow[]): Map<string, HistoryRow[]> {
  const groups = new Map<string, HistoryRow[]>();
  for (const row of rows) {
    let bucket = groups.get(row.algo);
    if (bucket === undefined) {
      bucket = [];
      groups.set(row.algo, bucket);
    }
    bucket.push(row);
  }
  return groups;
}
