/** Radar comparison of up to three candidate routes over the six route
 * metrics. Polygon radii are the engine's min-max normalized values; a
 * degenerate axis (every candidate equal, engine emits all 1.0) is marked
 * with a "tied" badge. The legend lists the raw metric values. */

import type { ComparePayload } from "../types.js";
import { CANDIDATE_COLORS, esc, raw, svgOpen } from "./common.js";

const W = 420;
const H = 360;
const CX = W / 2;
const CY = 170;
const R = 120;

const AXIS_LABELS: Record<string, string> = {
  driving_dura: "driving_dura",
  driving_dist: "driving_dist",
  walk_reach800: "walk_reach800",
  walk_avg_dura: "walk_avg_dura",
  walk_avg_dist: "walk_avg_dist",
  nums: "nums",
};

export function renderRadar(payload: ComparePayload | null): string {
  if (!payload || payload.entries.length === 0) {
    return `<div class="placeholder">Add candidate routes to compare</div>`;
  }
  const entries = payload.entries.slice(0, 3); // hard cap: never more than 3 polygons
  const axes = payload.axes;
  const n = axes.length;
  const angle = (i: number) => (Math.PI * 2 * i) / n - Math.PI / 2;
  const px = (i: number, frac: number) => CX + Math.cos(angle(i)) * R * frac;
  const py = (i: number, frac: number) => CY + Math.sin(angle(i)) * R * frac;

  const pieces: string[] = [svgOpen(W, H, "radar-view")];

  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const ring = axes
      .map((_, i) => `${i === 0 ? "M" : "L"}${px(i, frac).toFixed(1)},${py(i, frac).toFixed(1)}`)
      .join(" ");
    pieces.push(`<path class="grid-ring" d="${ring} Z" fill="none"/>`);
  }

  axes.forEach((axis, i) => {
    const tied = entries.length > 1 && entries.every((e) => e.normalized[axis.key] === 1.0);
    pieces.push(
      `<line class="axis-line" x1="${CX}" y1="${CY}" x2="${px(i, 1).toFixed(1)}" y2="${py(i, 1).toFixed(1)}"/>`,
      `<text class="axis-label${tied ? " tied" : ""}" x="${px(i, 1.18).toFixed(1)}" y="${py(i, 1.18).toFixed(1)}" ` +
        `text-anchor="middle">${esc(AXIS_LABELS[axis.key] ?? axis.key)}` +
        `${axis.lower_is_better ? " ↓" : ""}${tied ? " (tied)" : ""}</text>`,
    );
  });

  entries.forEach((entry, ci) => {
    const color = CANDIDATE_COLORS[ci % CANDIDATE_COLORS.length];
    const d = axes
      .map((axis, i) => {
        const v = entry.normalized[axis.key];
        return `${i === 0 ? "M" : "L"}${px(i, v).toFixed(1)},${py(i, v).toFixed(1)}`;
      })
      .join(" ");
    pieces.push(
      `<path class="radar-polygon candidate-${ci}" data-label="${esc(entry.label)}" d="${d} Z" ` +
        `stroke="${color}" fill="${color}" fill-opacity="0.18"/>`,
    );
  });

  entries.forEach((entry, ci) => {
    const y0 = H - 44 + ci * 14;
    const m = entry.metrics;
    pieces.push(
      `<g class="legend-row" data-label="${esc(entry.label)}">` +
        `<rect x="8" y="${y0 - 9}" width="10" height="10" fill="${CANDIDATE_COLORS[ci % CANDIDATE_COLORS.length]}"/>` +
        `<text x="24" y="${y0}" class="legend-text">` +
        `${esc(entry.label)}: ` +
        `<tspan data-metric="driving_dura" data-value="${raw(m.driving_dura)}">${(m.driving_dura / 60).toFixed(1)}min</tspan> ` +
        `<tspan data-metric="driving_dist" data-value="${raw(m.driving_dist)}">${(m.driving_dist / 1000).toFixed(2)}km</tspan> ` +
        `<tspan data-metric="walk_reach800" data-value="${raw(m.walk_reach800)}">${(m.walk_reach800 * 100).toFixed(0)}%</tspan> ` +
        `<tspan data-metric="nums" data-value="${raw(m.nums)}">${m.nums} trips</tspan>` +
        `</text></g>`,
    );
  });

  pieces.push("</svg>");
  return pieces.join("");
}
