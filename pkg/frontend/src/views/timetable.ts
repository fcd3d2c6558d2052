/** Timetable: arrival time (x) against cumulative driving distance (y), one
 * series per candidate; the histogram panel shows the departure demand and
 * feeds candidate creation. */

import type { CandidatePayload, HistogramResponse } from "../types.js";
import { CANDIDATE_COLORS, esc, linearScale, raw, svgOpen } from "./common.js";

const W = 560;
const H = 240;
const PAD_L = 60;
const PAD_B = 30;

export function renderTimetable(candidates: CandidatePayload[]): string {
  const withEntries = candidates.filter((c) => c.timetable.length > 0);
  if (withEntries.length === 0) {
    return `<div class="placeholder">No candidate timetables yet</div>`;
  }
  const times = withEntries.flatMap((c) =>
    [Date.parse(c.departure_time), ...c.timetable.map((e) => Date.parse(e.arrival))],
  );
  const dists = withEntries.flatMap((c) => c.timetable.map((e) => e.cumulative_distance_m));
  const x = linearScale(Math.min(...times), Math.max(...times), PAD_L, W - 16);
  const y = linearScale(0, Math.max(...dists), H - PAD_B, 16);

  const pieces: string[] = [svgOpen(W, H, "timetable-view")];
  withEntries.forEach((c, ci) => {
    const color = CANDIDATE_COLORS[ci % CANDIDATE_COLORS.length];
    const pts = [
      { t: Date.parse(c.departure_time), d: 0 },
      ...c.timetable.map((e) => ({ t: Date.parse(e.arrival), d: e.cumulative_distance_m })),
    ];
    const line = pts.map((p, i) => `${i === 0 ? "M" : "L"}${x(p.t).toFixed(1)},${y(p.d).toFixed(1)}`).join(" ");
    pieces.push(`<path class="tt-line candidate-${ci}" d="${line}" stroke="${color}" fill="none"/>`);
    c.timetable.forEach((e) => {
      pieces.push(
        `<circle class="tt-stop candidate-${ci}" data-region="${e.region_id}" data-spot="${e.spot_id}" ` +
          `data-arrival="${esc(e.arrival)}" data-value="${raw(e.cumulative_distance_m)}" ` +
          `cx="${x(Date.parse(e.arrival)).toFixed(1)}" cy="${y(e.cumulative_distance_m).toFixed(1)}" r="4" fill="${color}">` +
          `<title>${esc(`R${e.region_id} arrive ${e.arrival} @ ${(e.cumulative_distance_m / 1000).toFixed(2)} km`)}</title>` +
          `</circle>`,
      );
    });
    pieces.push(
      `<text class="tt-label" x="${PAD_L}" y="${H - 8 + 0}" fill="${color}" ` +
        `data-label="${esc(c.label)}">${esc(c.label)} dep ${esc(c.departure_time.slice(11, 16))}</text>`,
    );
  });
  pieces.push(`<text class="axis-title" transform="rotate(-90)" x="${-H / 2}" y="14" text-anchor="middle">cumulative km</text>`);
  pieces.push("</svg>");
  return pieces.join("");
}

export function renderHistogram(hist: HistogramResponse | null): string {
  if (!hist || hist.bins.length === 0) {
    return `<div class="placeholder">Pick a direction to see departures</div>`;
  }
  const W2 = 560;
  const H2 = 140;
  const n = hist.bins.length;
  const maxCount = Math.max(...hist.bins.map((b) => b.count), 1);
  const bw = Math.max(2, (W2 - 20) / n - 1);
  const y = linearScale(0, maxCount, H2 - 22, 6);

  const bars = hist.bins
    .map((b, i) => {
      const x0 = 10 + (i * (W2 - 20)) / n;
      const h = H2 - 22 - y(b.count);
      return (
        `<g class="hist-bar" data-action="add-candidate" data-depart="${esc(b.start)}" data-value="${raw(b.count)}">` +
        `<rect x="${x0.toFixed(1)}" y="${y(b.count).toFixed(1)}" width="${bw.toFixed(1)}" height="${Math.max(0, h).toFixed(1)}"/>` +
        `<title>${esc(`${b.start.slice(11, 16)}: ${b.count} departures`)}</title></g>`
      );
    })
    .join("");
  const first = hist.bins[0].start.slice(11, 16);
  const last = hist.bins[n - 1].start.slice(11, 16);
  return (
    svgOpen(W2, H2, "departure-histogram") +
    bars +
    `<text class="axis" x="10" y="${H2 - 6}">${esc(first)}</text>` +
    `<text class="axis" x="${W2 - 10}" y="${H2 - 6}" text-anchor="end">${esc(last)}</text>` +
    `</svg>`
  );
}
