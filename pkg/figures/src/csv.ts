import * as fs from "node:fs";
import Papa from "papaparse";

/** Column order written by the simulator; renderers accept any order. */
export const CSV_COLUMNS = [
  "scenario_id",
  "policy",
  "B",
  "d",
  "v_or_l",
  "kind",
  "requests",
  "hits",
  "hit_prob",
  "hit_rate",
  "N",
  "seed",
] as const;

const NUMERIC = new Set([
  "B", "d", "v_or_l", "requests", "hits", "hit_prob", "hit_rate", "N", "seed",
]);

export class SchemaError extends Error {}

export interface ResultRow {
  scenario_id: string;
  policy: string;
  B: number;
  d: number | null;
  v_or_l: number | null;
  kind: string;
  requests: number | null;
  hits: number | null;
  hit_prob: number | null;
  hit_rate: number | null;
  N: number | null;
  seed: number | null;
}

function toNumber(column: string, raw: string): number | null {
  if (raw === "") return null;
  const x = Number(raw);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`column ${column}: not a number: "${raw}"`);
  }
  return x;
}

/** Load simulator output rows, failing loudly on any schema drift. */
export function loadRows(path: string): ResultRow[] {
  const text = fs.readFileSync(path, "utf-8").trim();
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  for (const err of parsed.errors) {
    throw new SchemaError(`malformed CSV (row ${err.row}): ${err.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = CSV_COLUMNS.filter((c) => !fields.includes(c));
  const extra = fields.filter((f) => !(CSV_COLUMNS as readonly string[]).includes(f));
  if (missing.length > 0 || extra.length > 0) {
    throw new SchemaError(
      `header mismatch: missing [${missing.join(", ")}] unexpected [${extra.join(", ")}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("no data rows");
  }
  return parsed.data.map((raw) => {
    const row: Record<string, string | number | null> = {};
    for (const c of CSV_COLUMNS) {
      row[c] = NUMERIC.has(c) ? toNumber(c, raw[c]) : raw[c];
    }
    if (row.B === null) {
      throw new SchemaError("column B: must not be empty");
    }
    return row as unknown as ResultRow;
  });
}

/** Group rows by a derived key, preserving first-seen order. */
export function groupBy<T>(items: T[], key: (item: T) => string): Map<string, T[]> {
  const groups = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = groups.get(k);
    if (bucket) {
      bucket.push(item);
    } else {
      groups.set(k, [item]);
    }
  }
  return groups;
}

export function mean(xs: number[]): number {
  let sum = 0;
  for (const x of xs) sum += x;
  return sum / xs.length;
}
