/** Client-side view state. Everything derived from the API lives in caches
 * keyed by the revision that produced them; views re-render when it moves. */

import type {
  CandidatePayload,
  ComparePayload,
  HistogramResponse,
  MetricKey,
  RegionsResponse,
  SessionSummary,
  SilhouetteCurve,
  StopsResponse,
} from "./types.js";

export interface MapViewport {
  minLat: number;
  maxLat: number;
  minLon: number;
  maxLon: number;
}

export interface Notice {
  kind: "info" | "error";
  text: string;
}

export interface ViewState {
  sessionId: string | null;
  revision: number;
  activeDirection: number | null;
  selectedMetricKey: MetricKey;
  /** candidate departure labels, at most three */
  selectedDepartures: string[];
  hoveredSpot: number | null;
  viewport: MapViewport | null;
  notices: Notice[];
}

export interface Caches {
  summary: SessionSummary | null;
  silhouette: SilhouetteCurve | null;
  regions: RegionsResponse | null;
  stops: StopsResponse | null;
  histogram: HistogramResponse | null;
  candidates: CandidatePayload[];
  compare: ComparePayload | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    revision: 0,
    activeDirection: null,
    selectedMetricKey: "avg_dist",
    selectedDepartures: [],
    hoveredSpot: null,
    viewport: null,
    notices: [],
  };
}

export function emptyCaches(): Caches {
  return {
    summary: null,
    silhouette: null,
    regions: null,
    stops: null,
    histogram: null,
    candidates: [],
    compare: null,
  };
}

export function pushNotice(state: ViewState, kind: Notice["kind"], text: string): void {
  state.notices.push({ kind, text });
  if (state.notices.length > 8) state.notices.shift();
}
