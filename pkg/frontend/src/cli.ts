#!/usr/bin/env node
import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { renderBoxPlot } from "./boxplot.js";
import { groupBy, loadRuns, RunRow } from "./runs.js";
import { renderMarkdown, successTable, successTableFromSummary } from "./table.js";

function usage(): never {
  process.stderr.write(
    "usage: bgptrace-figures --runs runs.csv [--summary summary.json] " +
      "[--group algorithm] [--value steps] [--out figures/]\n",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        runs: { type: "string" },
        summary: { type: "string" },
        group: { type: "string", default: "algorithm" },
        value: { type: "string", default: "steps" },
        out: { type: "string", default: "figures" },
        title: { type: "string" },
      },
    });
  } catch {
    usage();
  }
  const opts = parsed.values;
  if (!opts.runs) usage();

  const rows = loadRuns(opts.runs);
  const groups = groupBy(rows, opts.group!);

  const valueOf: Record<string, (r: RunRow) => number> = {
    steps: (r) => r.steps,
    advertisements: (r) => r.advertisements,
    candidate_count: (r) => r.candidateCount,
    estimated_hours: (r) => r.estimatedHours,
  };
  const getter = valueOf[opts.value!];
  if (!getter) {
    process.stderr.write(`unknown --value ${opts.value}; use one of ${Object.keys(valueOf).join(", ")}\n`);
    return 2;
  }

  const numeric = new Map<string, number[]>();
  for (const [name, bucket] of groups) numeric.set(name, bucket.map(getter));

  fs.mkdirSync(opts.out!, { recursive: true });
  const svg = renderBoxPlot(numeric, {
    title: opts.title ?? `${opts.value} by ${opts.group}`,
    yLabel: opts.value,
  });
  const svgPath = path.join(opts.out!, `${opts.value}_by_${opts.group}.svg`);
  fs.writeFileSync(svgPath, svg);

  // prefer the harness's own summary when given; recompute otherwise
  const rowsForTable = opts.summary
    ? successTableFromSummary(JSON.parse(fs.readFileSync(opts.summary, "utf8")), opts.group!)
    : successTable(groups);
  const table = renderMarkdown(rowsForTable, opts.group);
  const tablePath = path.join(opts.out!, `success_by_${opts.group}.md`);
  fs.writeFileSync(tablePath, table);

  process.stderr.write(`wrote ${svgPath} and ${tablePath}\n`);
  return 0;
}

if (process.argv[1] && import.meta.url.endsWith(path.basename(process.argv[1]))) {
  process.exit(main(process.argv.slice(2)));
}
