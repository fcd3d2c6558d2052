/** Per-direction bearing box plots, drawn from the API's five-number
 * summaries verbatim (no client-side quantiles). */

import type { DirectionSummary } from "../types.js";
import { directionColor, esc, linearScale, raw, svgOpen } from "./common.js";

const W = 420;
const ROW = 34;
const PAD = 40;

export function renderBoxPlots(directions: DirectionSummary[]): string {
  if (directions.length === 0) {
    return `<div class="placeholder">Set k to see angle distributions</div>`;
  }
  const lo = Math.min(...directions.map((d) => d.angle_stats.min));
  const hi = Math.max(...directions.map((d) => d.angle_stats.max));
  const x = linearScale(lo, hi, PAD, W - 12);
  const height = directions.length * ROW + 24;

  const rows = directions
    .map((d, i) => {
      const s = d.angle_stats;
      const cy = 18 + i * ROW + ROW / 2;
      const color = directionColor(d.direction_id);
      const box =
        `<g class="box-row" data-direction="${d.direction_id}" data-action="select-direction">` +
        `<text class="dir-label" x="4" y="${cy + 4}">d${d.direction_id}</text>` +
        `<line class="whisker" x1="${x(s.min)}" x2="${x(s.q1)}" y1="${cy}" y2="${cy}" stroke="${color}"/>` +
        `<line class="whisker" x1="${x(s.q3)}" x2="${x(s.max)}" y1="${cy}" y2="${cy}" stroke="${color}"/>` +
        `<rect class="box" data-value-q1="${raw(s.q1)}" data-value-q3="${raw(s.q3)}" ` +
        `x="${x(s.q1)}" y="${cy - 9}" width="${Math.max(1, x(s.q3) - x(s.q1))}" height="18" fill="${color}"/>` +
        `<line class="median" data-value="${raw(s.median)}" x1="${x(s.median)}" x2="${x(s.median)}" ` +
        `y1="${cy - 11}" y2="${cy + 11}"/>` +
        `<line class="cap" data-value="${raw(s.min)}" x1="${x(s.min)}" x2="${x(s.min)}" y1="${cy - 6}" y2="${cy + 6}" stroke="${color}"/>` +
        `<line class="cap" data-value="${raw(s.max)}" x1="${x(s.max)}" x2="${x(s.max)}" y1="${cy - 6}" y2="${cy + 6}" stroke="${color}"/>` +
        `<text class="count" data-value="${raw(d.order_total)}" x="${W - 8}" y="${cy + 4}" text-anchor="end">` +
        `${d.n_spots} spots / ${d.order_total} orders</text>` +
        `<title>${esc(`direction ${d.direction_id}: median ${s.median.toFixed(1)} deg, ${d.order_total} orders`)}</title>` +
        `</g>`;
      return box;
    })
    .join("");

  return svgOpen(W, height, "angle-boxplots") + rows + `</svg>`;
}
