import * as fs from "node:fs";

/** One row of the experiment harness's runs.csv. Cell-identity columns
 * (deployment, algorithm, probe size, ...) stay as strings; measurements
 * are parsed into numbers/booleans. */
export interface RunRow {
  cell: Record<string, string>;
  runIndex: number;
  origin: number;
  steps: number;
  advertisements: number;
  candidateCount: number;
  originInCandidates: boolean;
  successAt: Record<number, boolean>;
  estimatedHours: number;
}

const MEASUREMENT_COLUMNS = new Set([
  "run_index", "origin", "steps", "advertisements", "candidate_count",
  "origin_in_candidates", "estimated_hours",
]);

function parseBool(raw: string): boolean {
  if (raw === "True") return true;
  if (raw === "False") return false;
  throw new Error(`expected True/False, got ${JSON.stringify(raw)}`);
}

function parseNum(raw: string, column: string): number {
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`column ${column}: not a number: ${JSON.stringify(raw)}`);
  }
  return value;
}

/** Parse the harness CSV (plain comma-separated, no quoting needed). */
export function parseRuns(text: string): RunRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) throw new Error("runs csv has no data rows");
  const header = lines[0]!.split(",");
  const rows: RunRow[] = [];
  for (const line of lines.slice(1)) {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new Error(`row has ${fields.length} fields, header has ${header.length}`);
    }
    const cell: Record<string, string> = {};
    const successAt: Record<number, boolean> = {};
    const row: Partial<RunRow> = { cell, successAt };
    header.forEach((column, i) => {
      const raw = fields[i]!;
      if (column.startsWith("success_at_")) {
        successAt[Number(column.slice("success_at_".length))] = parseBool(raw);
      } else if (column === "origin_in_candidates") {
        row.originInCandidates = parseBool(raw);
      } else if (MEASUREMENT_COLUMNS.has(column)) {
        const value = parseNum(raw, column);
        if (column === "run_index") row.runIndex = value;
        else if (column === "origin") row.origin = value;
        else if (column === "steps") row.steps = value;
        else if (column === "advertisements") row.advertisements = value;
        else if (column === "candidate_count") row.candidateCount = value;
        else row.estimatedHours = value;
      } else {
        cell[column] = raw;
      }
    });
    rows.push(row as RunRow);
  }
  return rows;
}

export function loadRuns(path: string): RunRow[] {
  return parseRuns(fs.readFileSync(path, "utf8"));
}

/** Group rows by the value of one cell column, insertion-ordered. */
export function groupBy(rows: readonly RunRow[], column: string): Map<string, RunRow[]> {
  const groups = new Map<string, RunRow[]>();
  for (const row of rows) {
    const key = row.cell[column];
    if (key === undefined) {
      throw new Error(`rows have no cell column ${JSON.stringify(column)}`);
    }
    let bucket = groups.get(key);
    if (!bucket) groups.set(key, (bucket = []));
    bucket.push(row);
  }
  return groups;
}
