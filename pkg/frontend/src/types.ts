/** API payload shapes. Field names mirror the service JSON exactly; the UI
 * never derives metric values, it only re-renders these. */

export interface SessionCreated {
  session_id: string;
  revision: number;
  n_trips: number;
  n_rejects: number;
  n_spots: number;
  warnings: string[];
}

export interface SpotSummary {
  spot_id: number;
  name: string;
  lat: number;
  lon: number;
  order_count: number;
  direction_id: number | null;
}

export interface AngleStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface DirectionSummary {
  direction_id: number;
  centroid_deg: number;
  n_spots: number;
  order_total: number;
  angle_stats: AngleStats;
}

export interface SessionSummary {
  session_id: string;
  revision: number;
  chosen_k: number | null;
  threshold_m: number | null;
  workplace: [number, number];
  spots: SpotSummary[];
  directions: DirectionSummary[];
  candidates: Record<string, string[]>;
}

export interface SilhouettePoint {
  k: number;
  silhouette: number;
}

export interface SilhouetteCurve {
  points: SilhouettePoint[];
  best_k: number;
}

export interface SetKResponse {
  revision: number;
  k: number;
  assignment: Record<string, number>;
  directions: DirectionSummary[];
}

export interface RegionSummary {
  region_id: number;
  member_spot_ids: number[];
  order_total: number;
  seed_spot_id: number;
}

export interface GeoJsonFeature {
  type: "Feature";
  geometry: { type: string; coordinates: unknown };
  properties: Record<string, unknown>;
}

export interface GeoJson {
  type: "FeatureCollection";
  features: GeoJsonFeature[];
  properties?: Record<string, unknown>;
}

export interface RegionsResponse {
  revision: number;
  threshold_m: number;
  directions: { direction_id: number; regions: RegionSummary[] }[];
  voronoi: GeoJson;
}

export interface RankedStop {
  spot_id: number;
  name: string;
  order_count: number;
  avg_dist: number;
  avg_dura: number;
  dist_cost: number;
  reach: Record<string, number>;
}

export interface RankedRegion {
  region_id: number;
  order_total: number;
  chosen_spot_id: number;
  ranked: RankedStop[];
}

export interface StopsResponse {
  direction_id: number;
  metric: string;
  regions: RankedRegion[];
}

export interface RouteMetrics {
  driving_dura: number;
  driving_dist: number;
  walk_reach800: number;
  walk_avg_dura: number;
  walk_avg_dist: number;
  nums: number;
}

export interface TimetableEntry {
  region_id: number;
  spot_id: number;
  arrival: string;
  cumulative_distance_m: number;
}

export interface CandidatePayload {
  label: string;
  departure_time: string;
  stops: { region_id: number; spot_id: number; name: string; lat: number; lon: number }[];
  timetable: TimetableEntry[];
  metrics: RouteMetrics;
  warnings: string[];
  polyline: [number, number][];
}

export interface CandidateCreated {
  revision: number;
  candidate: CandidatePayload;
}

export interface OverrideResponse {
  revision: number;
  candidates: CandidatePayload[];
}

export interface HistogramResponse {
  direction_id: number;
  bin_min: number;
  bins: { start: string; count: number }[];
}

export interface RadarEntry {
  label: string;
  metrics: RouteMetrics;
  normalized: Record<string, number>;
}

export interface ComparePayload {
  entries: RadarEntry[];
  axes: { key: string; lower_is_better: boolean }[];
}

export const METRIC_KEYS = ["avg_dist", "avg_dura", "dist_cost", "reach200", "reach400", "reach600", "reach800", "reach1000"] as const;
export type MetricKey = (typeof METRIC_KEYS)[number];
