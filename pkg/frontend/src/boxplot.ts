import { BoxStats, boxStats } from "./stats.js";

export interface BoxPlotOptions {
  title?: string;
  yLabel?: string;
  width?: number;
  height?: number;
  logScale?: boolean;
}

interface Layout {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

const NOTCH_DEPTH = 0.45; // how far the notch cuts into the box, as a fraction of its half-width

function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-9; v += s) ticks.push(v);
  return ticks;
}

/** One box per group: whiskers to min/max, notched median line, and the
 * group mean as a dashed horizontal line across the box. */
export function renderBoxPlot(
  groups: Map<string, readonly number[]>,
  options: BoxPlotOptions = {},
): string {
  if (groups.size === 0) throw new Error("no groups to plot");
  const layout: Layout = {
    width: options.width ?? 640,
    height: options.height ?? 420,
    left: 64,
    right: 16,
    top: options.title ? 40 : 16,
    bottom: 48,
  };
  const stats = new Map<string, BoxStats>();
  for (const [name, values] of groups) {
    if (values.length === 0) throw new Error(`group ${name} is empty`);
    stats.set(name, boxStats(values));
  }
  const all = [...stats.values()];
  let lo = Math.min(...all.map((s) => s.min));
  let hi = Math.max(...all.map((s) => s.max));
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = (hi - lo) * 0.05;
  lo -= pad;
  hi += pad;
  if (options.logScale) lo = Math.max(lo, 0.5);

  const plotW = layout.width - layout.left - layout.right;
  const plotH = layout.height - layout.top - layout.bottom;
  const toY = (v: number): number => {
    const t = options.logScale
      ? (Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo))
      : (v - lo) / (hi - lo);
    return layout.top + plotH * (1 - t);
  };

  const names = [...stats.keys()];
  const slot = plotW / names.length;
  const boxW = Math.min(slot * 0.5, 90);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" ` +
      `height="${layout.height}" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${layout.width}" height="${layout.height}" fill="white"/>`);
  if (options.title) {
    parts.push(
      `<text x="${layout.width / 2}" y="22" text-anchor="middle" font-size="15">` +
        `${options.title}</text>`,
    );
  }

  for (const tick of niceTicks(lo, hi)) {
    const y = toY(tick);
    parts.push(
      `<line x1="${layout.left}" y1="${y}" x2="${layout.width - layout.right}" y2="${y}" ` +
        `stroke="#ddd"/>`,
      `<text x="${layout.left - 6}" y="${y + 4}" text-anchor="end">${fmt(tick)}</text>`,
    );
  }
  if (options.yLabel) {
    const cy = layout.top + plotH / 2;
    parts.push(
      `<text x="14" y="${cy}" text-anchor="middle" transform="rotate(-90 14 ${cy})">` +
        `${options.yLabel}</text>`,
    );
  }

  names.forEach((name, i) => {
    const s = stats.get(name)!;
    const cx = layout.left + slot * (i + 0.5);
    const x0 = cx - boxW / 2;
    const x1 = cx + boxW / 2;
    const notch = boxW * NOTCH_DEPTH * 0.5;
    const yQ1 = toY(s.q1);
    const yQ3 = toY(s.q3);
    const yMed = toY(s.median);

    // whiskers
    parts.push(
      `<line x1="${cx}" y1="${toY(s.min)}" x2="${cx}" y2="${yQ1}" stroke="black"/>`,
      `<line x1="${cx}" y1="${yQ3}" x2="${cx}" y2="${toY(s.max)}" stroke="black"/>`,
      `<line x1="${cx - boxW / 4}" y1="${toY(s.min)}" x2="${cx + boxW / 4}" y2="${toY(s.min)}" stroke="black"/>`,
      `<line x1="${cx - boxW / 4}" y1="${toY(s.max)}" x2="${cx + boxW / 4}" y2="${toY(s.max)}" stroke="black"/>`,
    );
    // notched box: the outline pinches toward the median on both sides
    const notchHalf = Math.min((yQ1 - yQ3) * 0.2, 8);
    parts.push(
      `<path class="box" fill="#9ecae1" stroke="black" d="` +
        `M ${x0} ${yQ3} L ${x1} ${yQ3} L ${x1} ${yMed - notchHalf} ` +
        `L ${x1 - notch} ${yMed} L ${x1} ${yMed + notchHalf} L ${x1} ${yQ1} ` +
        `L ${x0} ${yQ1} L ${x0} ${yMed + notchHalf} L ${x0 + notch} ${yMed} ` +
        `L ${x0} ${yMed - notchHalf} Z"/>`,
    );
    // median across the notch waist
    parts.push(
      `<line class="median" x1="${x0 + notch}" y1="${yMed}" x2="${x1 - notch}" y2="${yMed}" ` +
        `stroke="black" stroke-width="2"/>`,
    );
    // dashed mean marker
    parts.push(
      `<line class="mean" x1="${x0}" y1="${toY(s.mean)}" x2="${x1}" y2="${toY(s.mean)}" ` +
        `stroke="#d62728" stroke-width="1.5" stroke-dasharray="5 3"/>`,
    );
    parts.push(
      `<text x="${cx}" y="${layout.height - layout.bottom + 18}" text-anchor="middle">` +
        `${name}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

export function boxPlotFromValues(
  grouped: Map<string, readonly number[]>,
  options?: BoxPlotOptions,
): string {
  return renderBoxPlot(grouped, options);
}
