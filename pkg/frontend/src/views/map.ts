/** Voronoi map: cells colored by direction, classified boundary edges,
 * candidate route polylines, walking paths by reach band, clickable spots.
 *
 * All geometry arrives as GeoJSON from the service (the Voronoi grid plus
 * the per-candidate route exports); this view only scales lon/lat into the
 * pixel box.
 */

import type { GeoJson, GeoJsonFeature, SpotSummary } from "../types.js";
import type { MapViewport } from "../state.js";
import {
  CANDIDATE_COLORS,
  directionColor,
  esc,
  linearScale,
  REACH_BAND_COLORS,
  svgOpen,
} from "./common.js";

const W = 640;
const H = 520;
const PAD = 10;

export interface MapInputs {
  voronoi: GeoJson | null;
  spots: SpotSummary[];
  /** features from the per-candidate route GeoJSON exports, in candidate order */
  routeFeatures: GeoJsonFeature[][];
  chosenSpots: Set<number>;
  hoveredSpot: number | null;
  viewport: MapViewport | null;
}

function collectBounds(inputs: MapInputs): MapViewport {
  if (inputs.viewport) return inputs.viewport;
  let minLat = Infinity, maxLat = -Infinity, minLon = Infinity, maxLon = -Infinity;
  const eat = (lon: number, lat: number) => {
    minLat = Math.min(minLat, lat);
    maxLat = Math.max(maxLat, lat);
    minLon = Math.min(minLon, lon);
    maxLon = Math.max(maxLon, lon);
  };
  for (const s of inputs.spots) eat(s.lon, s.lat);
  if (inputs.voronoi) {
    for (const f of inputs.voronoi.features) {
      if (f.geometry.type === "Polygon") {
        for (const ring of f.geometry.coordinates as [number, number][][]) {
          for (const [lon, lat] of ring) eat(lon, lat);
        }
      }
    }
  }
  if (!isFinite(minLat)) return { minLat: 0, maxLat: 1, minLon: 0, maxLon: 1 };
  return { minLat, maxLat, minLon, maxLon };
}

export function renderMap(inputs: MapInputs): string {
  if (!inputs.voronoi && inputs.spots.length === 0) {
    return `<div class="placeholder">Load a session to see the map</div>`;
  }
  const vp = collectBounds(inputs);
  const x = linearScale(vp.minLon, vp.maxLon, PAD, W - PAD);
  const y = linearScale(vp.minLat, vp.maxLat, H - PAD, PAD); // lat grows upward

  const pieces: string[] = [svgOpen(W, H, "plan-map")];

  if (inputs.voronoi) {
    for (const f of inputs.voronoi.features) {
      if (f.geometry.type !== "Polygon") continue;
      const ring = (f.geometry.coordinates as [number, number][][])[0];
      const d = ring.map(([lon, lat], i) => `${i === 0 ? "M" : "L"}${x(lon).toFixed(1)},${y(lat).toFixed(1)}`).join(" ") + " Z";
      const dir = f.properties["direction_id"];
      const fill = typeof dir === "number" ? directionColor(dir) : "#dddddd";
      pieces.push(
        `<path class="cell" data-spot="${f.properties["spot_id"]}" d="${d}" fill="${fill}" fill-opacity="0.25"/>`,
      );
    }
    for (const f of inputs.voronoi.features) {
      if (f.geometry.type !== "LineString") continue;
      const cls = String(f.properties["class"]);
      if (cls === "removed") continue; // same region: boundary not drawn
      const [[lon1, lat1], [lon2, lat2]] = f.geometry.coordinates as [number, number][];
      pieces.push(
        `<line class="boundary ${cls}" x1="${x(lon1).toFixed(1)}" y1="${y(lat1).toFixed(1)}" ` +
          `x2="${x(lon2).toFixed(1)}" y2="${y(lat2).toFixed(1)}"` +
          (cls === "dashed" ? ` stroke-dasharray="6 4"` : "") +
          `/>`,
      );
    }
  }

  inputs.routeFeatures.forEach((features, ci) => {
    const color = CANDIDATE_COLORS[ci % CANDIDATE_COLORS.length];
    for (const f of features) {
      if (f.geometry.type === "LineString" && f.properties["kind"] === "walking-path") {
        const band = String(f.properties["reach_band"]);
        const stroke = REACH_BAND_COLORS[band] ?? "#999999";
        const coords = f.geometry.coordinates as [number, number][];
        const d = coords.map(([lon, lat], i) => `${i === 0 ? "M" : "L"}${x(lon).toFixed(1)},${y(lat).toFixed(1)}`).join(" ");
        pieces.push(`<path class="walk-path" data-band="${esc(band)}" d="${d}" stroke="${stroke}" fill="none"/>`);
      }
    }
    for (const f of features) {
      if (f.geometry.type === "LineString" && f.properties["kind"] === undefined) {
        const coords = f.geometry.coordinates as [number, number][];
        const d = coords.map(([lon, lat], i) => `${i === 0 ? "M" : "L"}${x(lon).toFixed(1)},${y(lat).toFixed(1)}`).join(" ");
        pieces.push(`<path class="route-line candidate-${ci}" d="${d}" stroke="${color}" fill="none"/>`);
      }
    }
  });

  for (const s of inputs.spots) {
    const r = Math.max(3, Math.min(10, 2 + Math.sqrt(s.order_count)));
    const cls = [
      "spot",
      inputs.chosenSpots.has(s.spot_id) ? "chosen" : "",
      inputs.hoveredSpot === s.spot_id ? "hovered" : "",
    ]
      .filter(Boolean)
      .join(" ");
    const fill = s.direction_id === null ? "#555555" : directionColor(s.direction_id);
    pieces.push(
      `<circle class="${cls}" data-action="override-stop" data-spot="${s.spot_id}" ` +
        `data-value="${s.order_count}" cx="${x(s.lon).toFixed(1)}" cy="${y(s.lat).toFixed(1)}" r="${r.toFixed(1)}" fill="${fill}">` +
        `<title>${esc(s.name)} (${s.order_count} orders)</title></circle>`,
    );
  }

  pieces.push("</svg>");
  return pieces.join("");
}
