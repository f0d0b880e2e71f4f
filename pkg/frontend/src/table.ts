import { RunRow } from "./runs.js";
import { agrestiCoull } from "./stats.js";

export interface SuccessCell {
  threshold: number;
  successes: number;
  trials: number;
  rate: number;
  lo: number;
  hi: number;
}

export interface SuccessRow {
  group: string;
  cells: SuccessCell[];
}

export function successTable(
  groups: Map<string, RunRow[]>,
  confidence = 0.95,
): SuccessRow[] {
  const out: SuccessRow[] = [];
  for (const [group, rows] of groups) {
    const thresholds = Object.keys(rows[0]!.successAt)
      .map(Number)
      .sort((a, b) => a - b);
    const cells = thresholds.map((threshold) => {
      const successes = rows.filter((r) => r.successAt[threshold]).length;
      const trials = rows.length;
      const { lo, hi } = agrestiCoull(successes, trials, confidence);
      return { threshold, successes, trials, rate: successes / trials, lo, hi };
    });
    out.push({ group, cells });
  }
  return out;
}

/** Success rows straight from a harness summary.json, labeled by one
 * cell dimension (falls back to the full cell descriptor on collisions). */
export function successTableFromSummary(summary: unknown, group: string): SuccessRow[] {
  const cells = (summary as { cells?: Record<string, any> }).cells;
  if (!cells || Object.keys(cells).length === 0) {
    throw new Error("summary has no cells");
  }
  const out: SuccessRow[] = [];
  const seen = new Set<string>();
  for (const [desc, cell] of Object.entries(cells)) {
    let label = String(cell.cell?.[group] ?? desc);
    if (seen.has(label)) label = desc;
    seen.add(label);
    const rows: SuccessCell[] = Object.entries(cell.success as Record<string, any>)
      .map(([t, s]) => ({
        threshold: Number(t),
        successes: s.successes,
        trials: s.trials,
        rate: s.rate,
        lo: s.lo,
        hi: s.hi,
      }))
      .sort((a, b) => a.threshold - b.threshold);
    out.push({ group: label, cells: rows });
  }
  return out;
}

function pct(v: number): string {
  return `${(100 * v).toFixed(1)}%`;
}

/** Markdown table: one row per group, one column per success threshold,
 * each cell "rate (lo–hi)" at the given confidence. */
export function renderMarkdown(table: SuccessRow[], groupLabel = "group"): string {
  if (table.length === 0) throw new Error("empty table");
  const thresholds = table[0]!.cells.map((c) => c.threshold);
  const lines = [
    `| ${groupLabel} | runs | ${thresholds.map((t) => `success@${t}`).join(" | ")} |`,
    `|---|---|${thresholds.map(() => "---").join("|")}|`,
  ];
  for (const row of table) {
    const cells = row.cells.map((c) => `${pct(c.rate)} (${pct(c.lo)}–${pct(c.hi)})`);
    lines.push(`| ${row.group} | ${row.cells[0]!.trials} | ${cells.join(" | ")} |`);
  }
  return lines.join("\n") + "\n";
}
