/** Comparative ranking: regions side by side, candidate stops as bars ranked
 * by the selected metric, each candidate route drawn as a curve through its
 * chosen stops. Bar text shows the raw API value; bar length is only a
 * visual normalization within the region. Clicking a bar issues an
 * override. */

import type { CandidatePayload, StopsResponse } from "../types.js";
import { CANDIDATE_COLORS, esc, raw, svgOpen } from "./common.js";

const COL_W = 190;
const BAR_H = 20;
const HEAD = 46;

function metricValue(stop: Record<string, unknown>, metric: string): number {
  if (metric.startsWith("reach")) {
    const bucket = metric.slice(5);
    const reach = stop["reach"] as Record<string, number>;
    return reach[bucket] ?? NaN;
  }
  return stop[metric] as number;
}

export function renderRanking(
  stops: StopsResponse | null,
  candidates: CandidatePayload[],
  metric: string,
): string {
  if (!stops || stops.regions.length === 0) {
    return `<div class="placeholder">Build regions to rank candidate stops</div>`;
  }
  const regions = stops.regions;
  const maxRows = Math.max(...regions.map((r) => r.ranked.length));
  const width = regions.length * COL_W + 20;
  const height = HEAD + maxRows * (BAR_H + 6) + 20;

  const pieces: string[] = [svgOpen(width, height, "ranking-view")];
  const barPos = new Map<string, { x: number; y: number }>(); // `${region}:${spot}`

  regions.forEach((region, col) => {
    const x0 = 10 + col * COL_W;
    pieces.push(
      `<text class="region-head" x="${x0}" y="18">R-Cluster ${region.region_id}</text>`,
      `<text class="region-sub" data-value="${raw(region.order_total)}" x="${x0}" y="36">` +
        `${region.order_total} orders</text>`,
    );
    const vals = region.ranked.map((s) => metricValue(s as unknown as Record<string, unknown>, metric));
    const maxVal = Math.max(...vals.map((v) => (isFinite(v) ? Math.abs(v) : 0)), 1e-12);
    region.ranked.forEach((stop, row) => {
      const v = vals[row];
      const frac = isFinite(v) ? Math.abs(v) / maxVal : 1.0;
      const y0 = HEAD + row * (BAR_H + 6);
      const wBar = Math.max(2, frac * (COL_W - 60));
      const chosen = stop.spot_id === region.chosen_spot_id;
      barPos.set(`${region.region_id}:${stop.spot_id}`, { x: x0 + 2, y: y0 + BAR_H / 2 });
      pieces.push(
        `<g class="stop-bar${chosen ? " chosen" : ""}" data-action="override-stop" ` +
          `data-region="${region.region_id}" data-spot="${stop.spot_id}">` +
          `<rect x="${x0}" y="${y0}" width="${wBar.toFixed(1)}" height="${BAR_H}"/>` +
          `<text class="bar-label" x="${x0 + 4}" y="${y0 + 14}">${esc(stop.name)}</text>` +
          `<text class="bar-value" data-metric="${esc(metric)}" data-value="${raw(v)}" ` +
          `x="${x0 + COL_W - 12}" y="${y0 + 14}" text-anchor="end">${formatValue(metric, v)}</text>` +
          `<title>${esc(`${stop.name}: ${metric} = ${v}`)}</title>` +
          `</g>`,
      );
    });
  });

  candidates.forEach((candidate, ci) => {
    const pts: { x: number; y: number }[] = [];
    for (const s of candidate.stops) {
      const p = barPos.get(`${s.region_id}:${s.spot_id}`);
      if (p) pts.push(p);
    }
    if (pts.length > 1) {
      const d = pts
        .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(1)},${p.y.toFixed(1)}`)
        .join(" ");
      pieces.push(
        `<path class="route-curve candidate-${ci}" d="${d}" fill="none" ` +
          `stroke="${CANDIDATE_COLORS[ci % CANDIDATE_COLORS.length]}"/>`,
      );
    }
  });

  pieces.push("</svg>");
  return pieces.join("");
}

export function formatValue(metric: string, v: number): string {
  if (!isFinite(v)) return "unreachable";
  if (metric.startsWith("reach")) return `${(v * 100).toFixed(0)}%`;
  if (metric === "avg_dura") return `${(v / 60).toFixed(2)}min`;
  if (metric === "avg_dist") return `${v.toFixed(0)}m`;
  return v.toFixed(0);
}
