/** Strict reader for the simulator's sweep CSV contract. */

export interface SweepRow {
  scheme: string;
  param: string;
  value: number;
  seed: number;
  sr: number;
  iters: number;
  wall_ms: number;
  feasible: number;
}

export const REQUIRED_COLUMNS = [
  "scheme",
  "param",
  "value",
  "seed",
  "sr",
  "iters",
  "wall_ms",
  "feasible",
] as const;

export class CsvError extends Error {}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new CsvError(`missing column '${col}' in header: ${lines[0]}`);
    }
  }
  const idx = Object.fromEntries(
    REQUIRED_COLUMNS.map((c) => [c, header.indexOf(c)]),
  ) as Record<(typeof REQUIRED_COLUMNS)[number], number>;

  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length < header.length) {
      throw new CsvError(`row ${i + 1} has ${parts.length} fields, expected ${header.length}`);
    }
    const num = (name: (typeof REQUIRED_COLUMNS)[number]): number => {
      const v = Number(parts[idx[name]]);
      if (!Number.isFinite(v)) {
        throw new CsvError(`row ${i + 1}: field '${name}' is not numeric: ${parts[idx[name]]}`);
      }
      return v;
    };
    rows.push({
      scheme: parts[idx.scheme].trim(),
      param: parts[idx.param].trim(),
      value: num("value"),
      seed: num("seed"),
      sr: num("sr"),
      iters: num("iters"),
      wall_ms: num("wall_ms"),
      feasible: num("feasible"),
    });
  }
  if (rows.length === 0) {
    throw new CsvError("CSV contains a header but no data rows");
  }
  return rows;
}
