#!/usr/bin/env node
/** Render a sweep CSV as an SVG figure plus a byte-stable data-series file.
 *
 * Usage: plot_sr --csv rows.csv --kind vs_M --out fig.svg [--schemes sop,jop]
 */

import { readFileSync, writeFileSync } from "fs";

import { CsvError, parseSweepCsv } from "./csv.js";
import { buildSeries, FigureKind, KIND_PARAM, serializeSeries } from "./series.js";
import { renderSvg } from "./svg.js";

const KINDS = Object.keys(KIND_PARAM) as FigureKind[];

interface Args {
  csv: string;
  kind: FigureKind;
  out: string;
  schemes?: string[];
}

function parseArgs(argv: string[]): Args {
  let csv: string | undefined;
  let kind: string | undefined;
  let out: string | undefined;
  let schemes: string[] | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--csv") csv = argv[++i];
    else if (a === "--kind") kind = argv[++i];
    else if (a === "--out") out = argv[++i];
    else if (a === "--schemes") schemes = argv[++i]?.split(",").map((s) => s.trim());
    else if (a === "--help" || a === "-h") {
      console.log("usage: plot_sr --csv FILE --kind " + KINDS.join("|") +
        " --out FILE.svg [--schemes sop,jop]");
      process.exit(0);
    } else {
      throw new Error(`unknown argument: ${a}`);
    }
  }
  if (!csv || !kind || !out) {
    throw new Error("--csv, --kind and --out are required (see --help)");
  }
  if (!KINDS.includes(kind as FigureKind)) {
    throw new Error(`unknown figure kind '${kind}'; expected one of ${KINDS.join(", ")}`);
  }
  return { csv, kind: kind as FigureKind, out, schemes };
}

export function seriesPath(outPath: string): string {
  return outPath.replace(/\.[^./\\]+$/, "") + ".series.json";
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`plot_sr: ${(err as Error).message}`);
    return 2;
  }
  try {
    const rows = parseSweepCsv(readFileSync(args.csv, "utf-8"));
    const series = buildSeries(rows, args.kind, args.schemes);
    writeFileSync(args.out, renderSvg(args.kind, series));
    writeFileSync(seriesPath(args.out), serializeSeries(args.kind, series));
    console.log(
      `wrote ${args.out} and ${seriesPath(args.out)} ` +
        `(${series.length} scheme line${series.length === 1 ? "" : "s"})`,
    );
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`plot_sr: bad input: ${err.message}`);
    } else if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`plot_sr: ${(err as Error).message}`);
    } else {
      console.error(`plot_sr: ${(err as Error).message}`);
    }
    return 1;
  }
}

const isDirect =
  process.argv[1] !== undefined &&
  import.meta.url === `file://${process.argv[1]}`;
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
