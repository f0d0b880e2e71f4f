import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { renderBoxPlot } from "../src/boxplot.js";
import { groupBy, loadRuns, parseRuns } from "../src/runs.js";
import { renderMarkdown, successTable, successTableFromSummary } from "../src/table.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const fixture = path.join(here, "fixtures", "runs.csv");
const summaryFixture = path.join(here, "fixtures", "summary.json");

describe("runs csv", () => {
  it("parses the committed fixture", () => {
    const rows = loadRuns(fixture);
    expect(rows.length).toBeGreaterThan(0);
    const first = rows[0]!;
    expect(first.cell.algorithm).toBeTypeOf("string");
    expect(first.steps).toBeGreaterThan(0);
    expect(Object.keys(first.successAt)).toEqual(["1", "8"]);
  });

  it("rejects malformed input", () => {
    expect(() => parseRuns("steps\n")).toThrow(/no data rows/);
    expect(() => parseRuns("a,steps\n1\n")).toThrow(/fields/);
    expect(() => parseRuns("steps,origin_in_candidates\n1,maybe\n")).toThrow(/True\/False/);
  });

  it("groups by a cell column", () => {
    const rows = loadRuns(fixture);
    const groups = groupBy(rows, "algorithm");
    expect(groups.size).toBeGreaterThanOrEqual(2);
    const total = [...groups.values()].reduce((n, g) => n + g.length, 0);
    expect(total).toBe(rows.length);
    expect(() => groupBy(rows, "flavor")).toThrow(/no cell column/);
  });
});

describe("success table", () => {
  it("reproduces the harness's interval to 4 decimals", () => {
    const summary = JSON.parse(fs.readFileSync(summaryFixture, "utf8"));
    const rows = loadRuns(fixture);
    const table = successTable(groupBy(rows, "algorithm"));
    for (const row of table) {
      const key = Object.keys(summary.cells).find((k: string) =>
        k.includes(`algorithm=${row.group},`),
      )!;
      const expected = summary.cells[key].success;
      for (const cell of row.cells) {
        const ref = expected[String(cell.threshold)];
        expect(cell.successes).toBe(ref.successes);
        expect(cell.trials).toBe(ref.trials);
        expect(cell.rate).toBeCloseTo(ref.rate, 10);
        expect(cell.lo).toBeCloseTo(ref.lo, 4);
        expect(cell.hi).toBeCloseTo(ref.hi, 4);
      }
    }
  });

  it("agrees with rows computed from the raw runs when fed the summary", () => {
    const summary = JSON.parse(fs.readFileSync(summaryFixture, "utf8"));
    const fromSummary = successTableFromSummary(summary, "algorithm");
    const fromRuns = successTable(groupBy(loadRuns(fixture), "algorithm"));
    const byGroup = new Map(fromRuns.map((r) => [r.group, r]));
    expect(fromSummary.length).toBe(fromRuns.length);
    for (const row of fromSummary) {
      const other = byGroup.get(row.group)!;
      row.cells.forEach((cell, i) => {
        expect(cell.successes).toBe(other.cells[i]!.successes);
        expect(cell.lo).toBeCloseTo(other.cells[i]!.lo, 4);
        expect(cell.hi).toBeCloseTo(other.cells[i]!.hi, 4);
      });
    }
  });

  it("renders markdown with one row per group", () => {
    const rows = loadRuns(fixture);
    const groups = groupBy(rows, "algorithm");
    const md = renderMarkdown(successTable(groups), "algorithm");
    const lines = md.trim().split("\n");
    expect(lines.length).toBe(2 + groups.size);
    expect(lines[0]).toContain("success@1");
    expect(md).toMatch(/\d+\.\d% \(\d+\.\d%–\d+\.\d%\)/);
  });
});

describe("box plot", () => {
  it("draws a notched box with a dashed mean per group", () => {
    const rows = loadRuns(fixture);
    const groups = groupBy(rows, "algorithm");
    const numeric = new Map<string, number[]>();
    for (const [name, bucket] of groups) {
      numeric.set(name, bucket.map((r) => r.steps));
    }
    const svg = renderBoxPlot(numeric, { title: "steps", yLabel: "steps" });
    expect(svg).toContain("<svg");
    expect((svg.match(/class="box"/g) ?? []).length).toBe(groups.size);
    expect((svg.match(/class="median"/g) ?? []).length).toBe(groups.size);
    const means = svg.match(/class="mean"[^/]*stroke-dasharray="5 3"/g) ?? [];
    expect(means.length).toBe(groups.size);
  });

  it("rejects empty input", () => {
    expect(() => renderBoxPlot(new Map())).toThrow(/no groups/);
    expect(() => renderBoxPlot(new Map([["a", []]]))).toThrow(/empty/);
  });
});
