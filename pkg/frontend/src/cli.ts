/**
 * gapmin-plot: render solver history CSVs as a semilog SVG figure.
 *
 * Usage:
 *   gapmin-plot merged.csv -o fig.svg
 *   gapmin-plot pg.csv pdhg.csv -o fig.svg --x elapsed_s --y gap_betak
 */

import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvError } from "./csv.js";
import { X_COLUMNS, Y_COLUMNS, type XColumn, type YColumn } from "./plot.js";
import { render } from "./render.js";

const USAGE = `usage: gapmin-plot [options] history.csv [more.csv ...]

  -o, --out FILE       output SVG path (default plot.svg)
      --x COL          x column: ${X_COLUMNS.join(" | ")} (default iter)
      --y COL          y column: ${Y_COLUMNS.join(" | ")} (default gap_beta0)
      --linear-y       linear y axis (default log, values floored at 1e-16)
      --label ID=TEXT  override the legend label for one algorithm (repeatable)
      --title TEXT     figure title
      --restart-markers  mark recorded restart iterations
  -h, --help           show this help
`;

class UsageError extends Error {}

function parseLabels(entries: string[]): Record<string, string> {
  const labels: Record<string, string> = {};
  for (const entry of entries) {
    const at = entry.indexOf("=");
    if (at <= 0 || at === entry.length - 1) {
      throw new UsageError(`--label expects ID=TEXT, got ${JSON.stringify(entry)}`);
    }
    labels[entry.slice(0, at)] = entry.slice(at + 1);
  }
  return labels;
}

export function cliMain(argv: string[]): number {
  try {
    const { values, positionals } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string", short: "o", default: "plot.svg" },
        x: { type: "string", default: "iter" },
        y: { type: "string", default: "gap_beta0" },
        "linear-y": { type: "boolean", default: false },
        label: { type: "string", multiple: true, default: [] },
        title: { type: "string" },
        "restart-markers": { type: "boolean", default: false },
        help: { type: "boolean", short: "h", default: false },
      },
    });
    if (values.help) {
      process.stdout.write(USAGE);
      return 0;
    }
    if (positionals.length === 0) {
      throw new UsageError("at least one history CSV is required");
    }
    if (!(X_COLUMNS as readonly string[]).includes(values.x)) {
      throw new UsageError(`--x must be one of ${X_COLUMNS.join(", ")}`);
    }
    if (!(Y_COLUMNS as readonly string[]).includes(values.y)) {
      throw new UsageError(`--y must be one of ${Y_COLUMNS.join(", ")}`);
    }
    const { curves } = render({
      inputs: positionals,
      output: values.out,
      x: values.x as XColumn,
      y: values.y as YColumn,
      logY: !values["linear-y"],
      title: values.title,
      labels: parseLabels(values.label),
      restartMarkers: values["restart-markers"],
    });
    process.stdout.write(
      `${values.out}: ${curves.length} curve${curves.length === 1 ? "" : "s"} `
      + `(${curves.map((c) => c.label).join(", ")})\n`,
    );
    return 0;
  } catch (err) {
    if (err instanceof UsageError
        || (err instanceof TypeError && "code" in err
            && String(err.code).startsWith("ERR_PARSE_ARGS"))) {
      process.stderr.write(`usage error: ${(err as Error).message}\n${USAGE}`);
      return 1;
    }
    if (err instanceof CsvError
        || (err instanceof Error && "code" in err && err.code === "ENOENT")) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(cliMain(process.argv.slice(2)));
}
