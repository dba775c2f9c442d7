/** Aggregates sweep rows into per-scheme mean lines with seed-spread bands.
 * The serialized form is deterministic: fixed key order, fixed exponential
 * number formatting, schemes and x-values sorted. */

import { SweepRow, CsvError } from "./csv.js";

export type FigureKind = "convergence" | "vs_M" | "vs_PM" | "vs_PA" | "vs_K";

export const KIND_PARAM: Record<FigureKind, string> = {
  convergence: "iter",
  vs_M: "M",
  vs_PM: "P_M",
  vs_PA: "P_A",
  vs_K: "K",
};

export const KIND_XLABEL: Record<FigureKind, string> = {
  convergence: "outer iteration (count)",
  vs_M: "reflecting elements M (count)",
  vs_PM: "attacker transmit power P_M (dBm)",
  vs_PA: "transmit power P_A (dBm)",
  vs_K: "active elements K (count)",
};

export const Y_LABEL = "secrecy rate (bits/s/Hz)";

export interface SeriesPoint {
  x: number;
  mean: number;
  lo: number;
  hi: number;
  seeds: number;
}

export interface Series {
  scheme: string;
  points: SeriesPoint[];
}

export function buildSeries(
  rows: SweepRow[],
  kind: FigureKind,
  schemes?: string[],
): Series[] {
  const param = KIND_PARAM[kind];
  const matching = rows.filter((r) => r.param === param);
  if (matching.length === 0) {
    throw new CsvError(
      `no rows with param '${param}' for figure kind '${kind}'`,
    );
  }
  const wanted = schemes && schemes.length > 0 ? new Set(schemes) : null;
  const bySchemeX = new Map<string, Map<number, number[]>>();
  for (const r of matching) {
    if (wanted && !wanted.has(r.scheme)) continue;
    let xs = bySchemeX.get(r.scheme);
    if (!xs) {
      xs = new Map();
      bySchemeX.set(r.scheme, xs);
    }
    let vals = xs.get(r.value);
    if (!vals) {
      vals = [];
      xs.set(r.value, vals);
    }
    vals.push(r.sr);
  }
  if (bySchemeX.size === 0) {
    throw new CsvError("scheme filter removed every row");
  }
  const out: Series[] = [];
  for (const scheme of [...bySchemeX.keys()].sort()) {
    const xs = bySchemeX.get(scheme)!;
    const points: SeriesPoint[] = [...xs.keys()]
      .sort((a, b) => a - b)
      .map((x) => {
        const vals = xs.get(x)!;
        const mean = vals.reduce((a, b) => a + b, 0) / vals.length;
        return {
          x,
          mean,
          lo: Math.min(...vals),
          hi: Math.max(...vals),
          seeds: vals.length,
        };
      });
    out.push({ scheme, points });
  }
  return out;
}

const fmt = (v: number): string => v.toExponential(12);

/** Byte-stable serialization of the plotted data. */
export function serializeSeries(kind: FigureKind, series: Series[]): string {
  const lines: string[] = [];
  lines.push("{");
  lines.push(`  "kind": "${kind}",`);
  lines.push(`  "x_label": "${KIND_XLABEL[kind]}",`);
  lines.push(`  "y_label": "${Y_LABEL}",`);
  lines.push(`  "series": [`);
  series.forEach((s, i) => {
    const pts = s.points
      .map(
        (p) =>
          `      {"x": ${fmt(p.x)}, "mean": ${fmt(p.mean)}, ` +
          `"lo": ${fmt(p.lo)}, "hi": ${fmt(p.hi)}, "seeds": ${p.seeds}}`,
      )
      .join(",\n");
    const comma = i < series.length - 1 ? "," : "";
    lines.push(`    {"scheme": "${s.scheme}", "points": [\n${pts}\n    ]}${comma}`);
  });
  lines.push("  ]");
  lines.push("}");
  return lines.join("\n") + "\n";
}
