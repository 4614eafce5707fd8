/**
 * Log-scale wealth chart rendered as an SVG string: the wealth trajectory,
 * the 1/alpha rejection threshold as a horizontal line, the running
 * confidence band as a shaded region, and an optional what-if ghost point.
 *
 * Pure function of the service's trajectory payload — no statistics are
 * computed here beyond axis scaling.
 */

import type { TrajectoryPoint } from "./api.js";

export interface ChartOptions {
  width?: number;
  height?: number;
  alpha: number;
  ghost?: { k: number; wealth: number } | null;
}

interface Scale {
  x: (k: number) => number;
  y: (w: number) => number;
}

const MARGIN = { top: 12, right: 16, bottom: 24, left: 48 };

function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

function makeScales(
  points: TrajectoryPoint[],
  threshold: number,
  width: number,
  height: number,
  ghost?: { k: number; wealth: number } | null,
): Scale {
  const wealths = points.map((p) => Math.max(p.wealth, 1e-12));
  if (ghost) wealths.push(Math.max(ghost.wealth, 1e-12));
  wealths.push(1, threshold);
  const kMax = Math.max(points.length > 0 ? points[points.length - 1].k : 1, ghost?.k ?? 1, 1);
  const logMin = Math.min(...wealths.map(Math.log)) - 0.2;
  const logMax = Math.max(...wealths.map(Math.log)) + 0.2;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  return {
    x: (k) => MARGIN.left + (k / kMax) * innerW,
    y: (w) =>
      MARGIN.top +
      innerH -
      ((Math.log(Math.max(w, 1e-12)) - logMin) / (logMax - logMin)) * innerH,
  };
}

function pathFrom(points: TrajectoryPoint[], s: Scale): string {
  const cmds = [`M ${fmt(s.x(0))} ${fmt(s.y(1))}`];
  for (const p of points) cmds.push(`L ${fmt(s.x(p.k))} ${fmt(s.y(p.wealth))}`);
  return cmds.join(" ");
}

function bandFrom(points: TrajectoryPoint[], s: Scale): string | null {
  const banded = points.filter((p) => p.B_l !== null && p.B_u !== null);
  if (banded.length < 2) return null;
  // the band is drawn in bound space mapped onto the same vertical axis via
  // a linear [0,1] -> plot-height mapping so it reads as a shaded corridor
  const yBound = (b: number) =>
    MARGIN.top + (1 - Math.min(Math.max(b, 0), 1)) * 0.25 * 100;
  const upper = banded.map((p) => `${fmt(s.x(p.k))},${fmt(yBound(p.B_u as number))}`);
  const lower = banded
    .slice()
    .reverse()
    .map((p) => `${fmt(s.x(p.k))},${fmt(yBound(p.B_l as number))}`);
  return [...upper, ...lower].join(" ");
}

export function renderChart(points: TrajectoryPoint[], opts: ChartOptions): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 320;
  const threshold = 1 / opts.alpha;
  const s = makeScales(points, threshold, width, height, opts.ghost);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="wealth-chart" role="img" aria-label="wealth trajectory">`,
  );

  const band = bandFrom(points, s);
  if (band) {
    parts.push(`<polygon class="conf-band" points="${band}" fill="#cfe3ff" opacity="0.5"/>`);
  }

  const yThresh = fmt(s.y(threshold));
  parts.push(
    `<line class="threshold" x1="${MARGIN.left}" y1="${yThresh}" ` +
      `x2="${width - MARGIN.right}" y2="${yThresh}" stroke="#c0392b" stroke-dasharray="6 3"/>`,
  );
  parts.push(
    `<text class="threshold-label" x="${width - MARGIN.right}" y="${fmt(Number(yThresh) - 4)}" ` +
      `text-anchor="end" font-size="11">1/&#945; = ${fmt(threshold)}</text>`,
  );

  const yOne = fmt(s.y(1));
  parts.push(
    `<line class="unit" x1="${MARGIN.left}" y1="${yOne}" ` +
      `x2="${width - MARGIN.right}" y2="${yOne}" stroke="#999" stroke-width="0.5"/>`,
  );

  parts.push(
    `<path class="wealth-line" d="${pathFrom(points, s)}" fill="none" ` +
      `stroke="#2c3e50" stroke-width="1.5"/>`,
  );

  if (opts.ghost) {
    parts.push(
      `<circle class="ghost" cx="${fmt(s.x(opts.ghost.k))}" cy="${fmt(s.y(opts.ghost.wealth))}" ` +
        `r="4" fill="none" stroke="#8e44ad" stroke-width="1.5" stroke-dasharray="2 2"/>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}
