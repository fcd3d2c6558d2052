/** Planner controller: owns ViewState, talks to the API, re-renders views.
 *
 * Contract highlights:
 *  - every mutation sends If-Match with the last seen revision; a stale
 *    revision (409 "revision mismatch...") triggers one refetch-and-replay;
 *    other 409s (e.g. full candidate list) surface as notices;
 *  - an override click issues exactly one PUT, then re-renders map, ranking,
 *    and radar from the new revision;
 *  - the UI computes no metrics: views re-render API payloads verbatim.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  Caches,
  emptyCaches,
  initialState,
  pushNotice,
  ViewState,
} from "./state.js";
import type { CandidatePayload, GeoJsonFeature, MetricKey } from "./types.js";
import { renderBoxPlots } from "./views/boxplot.js";
import { renderMap } from "./views/map.js";
import { renderNotices } from "./views/notices.js";
import { renderRadar } from "./views/radar.js";
import { renderRanking } from "./views/ranking.js";
import { renderSilhouette } from "./views/silhouette.js";
import { renderHistogram, renderTimetable } from "./views/timetable.js";

export interface RenderedViews {
  clustering: string;
  map: string;
  ranking: string;
  radar: string;
  timetable: string;
  histogram: string;
  notices: string;
}

export type ViewName = keyof RenderedViews;

const STALE_PREFIX = "revision mismatch";

export class PlannerController {
  readonly state: ViewState = initialState();
  readonly caches: Caches = emptyCaches();
  readonly views: RenderedViews = {
    clustering: "",
    map: "",
    ranking: "",
    radar: "",
    timetable: "",
    histogram: "",
    notices: "",
  };
  readonly renderCounts: Record<ViewName, number> = {
    clustering: 0,
    map: 0,
    ranking: 0,
    radar: 0,
    timetable: 0,
    histogram: 0,
    notices: 0,
  };
  private routeFeatures: GeoJsonFeature[][] = [];
  private inFlight = false;

  constructor(
    private readonly api: ApiClient,
    private readonly onRender?: (view: ViewName, html: string) => void,
  ) {}

  // ----- rendering ---------------------------------------------------

  private paint(view: ViewName, html: string): void {
    this.views[view] = html;
    this.renderCounts[view] += 1;
    this.onRender?.(view, html);
  }

  private paintNotices(): void {
    this.paint("notices", renderNotices(this.state.notices));
  }

  renderClustering(): void {
    const chosen = this.caches.summary?.chosen_k ?? null;
    this.paint(
      "clustering",
      renderSilhouette(this.caches.silhouette, chosen) +
        renderBoxPlots(this.caches.summary?.directions ?? []),
    );
  }

  renderMapView(): void {
    const chosen = new Set<number>();
    for (const c of this.caches.candidates) {
      for (const s of c.stops) chosen.add(s.spot_id);
    }
    this.paint(
      "map",
      renderMap({
        voronoi: this.caches.regions?.voronoi ?? null,
        spots: this.caches.summary?.spots ?? [],
        routeFeatures: this.routeFeatures,
        chosenSpots: chosen,
        hoveredSpot: this.state.hoveredSpot,
        viewport: this.state.viewport,
      }),
    );
  }

  renderRankingView(): void {
    this.paint(
      "ranking",
      renderRanking(this.caches.stops, this.caches.candidates, this.state.selectedMetricKey),
    );
  }

  renderRadarView(): void {
    this.paint("radar", renderRadar(this.caches.compare));
  }

  renderTimetableView(): void {
    this.paint("timetable", renderTimetable(this.caches.candidates));
    this.paint("histogram", renderHistogram(this.caches.histogram));
  }

  renderAll(): void {
    this.renderClustering();
    this.renderMapView();
    this.renderRankingView();
    this.renderRadarView();
    this.renderTimetableView();
    this.paintNotices();
  }

  // ----- session lifecycle -------------------------------------------

  async openSession(sessionId: string): Promise<void> {
    this.state.sessionId = sessionId;
    const summary = await this.api.summary(sessionId);
    this.caches.summary = summary;
    this.state.revision = summary.revision;
    this.renderAll();
  }

  async refreshSilhouette(kmin: number, kmax: number): Promise<void> {
    const sid = this.requireSession();
    this.caches.silhouette = await this.api.silhouette(sid, kmin, kmax);
    this.renderClustering();
  }

  // ----- mutations ----------------------------------------------------

  /** Shared mutation wrapper: one automatic replay on stale revision. */
  private async mutate<T>(run: (revision: number) => Promise<T>): Promise<T | null> {
    if (this.inFlight) {
      pushNotice(this.state, "info", "another change is in flight; try again");
      this.paintNotices();
      return null;
    }
    this.inFlight = true;
    try {
      try {
        return await run(this.state.revision);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409 && err.detail.startsWith(STALE_PREFIX)) {
          // stale: refetch the session revision, replay the intent once
          const summary = await this.api.summary(this.requireSession());
          this.caches.summary = summary;
          this.state.revision = summary.revision;
          return await run(this.state.revision);
        }
        throw err;
      }
    } catch (err) {
      this.noteError(err);
      return null;
    } finally {
      this.inFlight = false;
    }
  }

  private noteError(err: unknown): void {
    const text = err instanceof ApiError ? err.detail : String(err);
    pushNotice(this.state, "error", text);
    this.paintNotices();
  }

  async setK(k: number, seed = 0): Promise<void> {
    const sid = this.requireSession();
    const res = await this.mutate((rev) => this.api.setK(sid, k, seed, rev));
    if (!res) return;
    this.state.revision = res.revision;
    // downstream state is invalidated server-side; drop our caches too
    this.caches.regions = null;
    this.caches.stops = null;
    this.caches.candidates = [];
    this.caches.compare = null;
    this.routeFeatures = [];
    this.caches.summary = await this.api.summary(sid);
    this.renderAll();
  }

  async buildRegions(thresholdM: number | null = null): Promise<void> {
    const sid = this.requireSession();
    const res = await this.mutate((rev) => this.api.buildRegions(sid, thresholdM, rev));
    if (!res) return;
    this.state.revision = res.revision;
    this.caches.regions = res;
    this.caches.candidates = [];
    this.caches.compare = null;
    this.routeFeatures = [];
    if (this.state.activeDirection === null && res.directions.length > 0) {
      this.state.activeDirection = res.directions[0].direction_id;
    }
    await this.refreshDirectionReads();
    this.renderAll();
  }

  async selectDirection(direction: number): Promise<void> {
    this.state.activeDirection = direction;
    this.state.selectedDepartures = [];
    this.caches.candidates = [];
    this.caches.compare = null;
    this.routeFeatures = [];
    await this.refreshDirectionReads();
    this.renderAll();
  }

  async selectMetric(key: MetricKey): Promise<void> {
    this.state.selectedMetricKey = key;
    const sid = this.requireSession();
    const d = this.state.activeDirection;
    if (d !== null) {
      try {
        this.caches.stops = await this.api.rankedStops(sid, d, key);
      } catch (err) {
        this.noteError(err);
        return;
      }
    }
    this.renderRankingView();
  }

  /** Map or ranking click: swap the stop for the region containing spotId.
   * Exactly one PUT; map, ranking, and radar re-render from the result. */
  async overrideStop(spotId: number, regionId?: number): Promise<void> {
    const sid = this.requireSession();
    const d = this.state.activeDirection;
    if (d === null || !this.caches.regions) {
      pushNotice(this.state, "info", "build regions and pick a direction first");
      this.paintNotices();
      return;
    }
    let region = regionId;
    if (region === undefined) {
      const dirRegions = this.caches.regions.directions.find((x) => x.direction_id === d);
      region = dirRegions?.regions.find((r) => r.member_spot_ids.includes(spotId))?.region_id;
    }
    if (region === undefined) {
      pushNotice(this.state, "info", `spot ${spotId} is not in a region of direction ${d}`);
      this.paintNotices();
      return;
    }
    const res = await this.mutate((rev) => this.api.override(sid, d, region, spotId, rev));
    if (!res) return;
    this.state.revision = res.revision;
    this.caches.candidates = res.candidates;
    await this.refreshAfterRouteChange();
    this.renderMapView();
    this.renderRankingView();
    this.renderRadarView();
    this.renderTimetableView();
  }

  async addCandidate(departureIso: string, label: string | null = null): Promise<void> {
    const sid = this.requireSession();
    const d = this.state.activeDirection;
    if (d === null) {
      pushNotice(this.state, "info", "pick a direction first");
      this.paintNotices();
      return;
    }
    const res = await this.mutate((rev) => this.api.addCandidate(sid, d, departureIso, label, rev));
    if (!res) return; // a full candidate list (409) landed in the notices
    this.state.revision = res.revision;
    this.caches.candidates = [...this.caches.candidates, res.candidate];
    this.state.selectedDepartures = this.caches.candidates.map((c) => c.label).slice(0, 3);
    for (const w of res.candidate.warnings) pushNotice(this.state, "info", w);
    await this.refreshAfterRouteChange();
    this.renderMapView();
    this.renderRankingView();
    this.renderRadarView();
    this.renderTimetableView();
    this.paintNotices();
  }

  dismissNotice(index: number): void {
    this.state.notices.splice(index, 1);
    this.paintNotices();
  }

  hoverSpot(spotId: number | null): void {
    this.state.hoveredSpot = spotId;
    this.renderMapView();
  }

  // ----- derived reads -------------------------------------------------

  private async refreshDirectionReads(): Promise<void> {
    const sid = this.requireSession();
    const d = this.state.activeDirection;
    if (d === null) return;
    try {
      this.caches.stops = await this.api.rankedStops(sid, d, this.state.selectedMetricKey);
      this.caches.histogram = await this.api.histogram(sid, d, 5);
    } catch (err) {
      this.noteError(err);
    }
  }

  private async refreshAfterRouteChange(): Promise<void> {
    const sid = this.requireSession();
    const d = this.state.activeDirection;
    if (d === null) return;
    try {
      this.caches.stops = await this.api.rankedStops(sid, d, this.state.selectedMetricKey);
      this.caches.compare =
        this.caches.candidates.length > 0 ? await this.api.compare(sid, d) : null;
      this.routeFeatures = await this.fetchRouteFeatures(sid, d, this.caches.candidates);
    } catch (err) {
      this.noteError(err);
    }
  }

  /** Walking paths and route lines come from the export GeoJSON; the UI does
   * no geometry of its own. */
  private async fetchRouteFeatures(
    sid: string,
    direction: number,
    candidates: CandidatePayload[],
  ): Promise<GeoJsonFeature[][]> {
    if (candidates.length === 0) return [];
    const bundle = await this.api.exportBundle(sid);
    const out: GeoJsonFeature[][] = [];
    for (let i = 0; i < candidates.length; i += 1) {
      const prefix = `direction-${direction}/candidate-${i}-`;
      const name = Object.keys(bundle.files).find(
        (f) => f.startsWith(prefix) && f.endsWith(".geojson"),
      );
      if (!name) continue;
      const doc = JSON.parse(bundle.files[name]) as { features: GeoJsonFeature[] };
      out.push(doc.features);
    }
    return out;
  }

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error("no session open");
    return this.state.sessionId;
  }
}
