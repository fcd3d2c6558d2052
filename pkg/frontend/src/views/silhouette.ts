/** Silhouette-vs-k line chart. Clicking a point sets k (data-action). */

import type { SilhouetteCurve } from "../types.js";
import { linearScale, raw, svgOpen } from "./common.js";

const W = 420;
const H = 180;
const PAD = 32;

export function renderSilhouette(curve: SilhouetteCurve | null, chosenK: number | null): string {
  if (!curve || curve.points.length === 0) {
    return `<div class="placeholder">No silhouette curve yet</div>`;
  }
  const ks = curve.points.map((p) => p.k);
  const vals = curve.points.map((p) => p.silhouette);
  const x = linearScale(Math.min(...ks), Math.max(...ks), PAD, W - PAD);
  const y = linearScale(Math.min(0, ...vals), Math.max(...vals), H - PAD, PAD);

  const path = curve.points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.k).toFixed(1)},${y(p.silhouette).toFixed(1)}`)
    .join(" ");

  const dots = curve.points
    .map((p) => {
      const cls = [
        "sil-point",
        p.k === curve.best_k ? "best" : "",
        p.k === chosenK ? "chosen" : "",
      ]
        .filter(Boolean)
        .join(" ");
      return (
        `<circle class="${cls}" data-action="set-k" data-k="${p.k}" ` +
        `data-value="${raw(p.silhouette)}" cx="${x(p.k).toFixed(1)}" cy="${y(p.silhouette).toFixed(1)}" r="6">` +
        `<title>k=${p.k}: ${p.silhouette.toFixed(4)}</title></circle>`
      );
    })
    .join("");

  const labels = curve.points
    .map((p) => `<text class="axis" x="${x(p.k).toFixed(1)}" y="${H - 10}" text-anchor="middle">${p.k}</text>`)
    .join("");

  return (
    svgOpen(W, H, "silhouette-chart") +
    `<path class="sil-line" d="${path}" fill="none"/>` +
    dots +
    labels +
    `<text class="axis-title" x="${W / 2}" y="14" text-anchor="middle">silhouette vs directions (peak k=${curve.best_k})</text>` +
    `</svg>`
  );
}
