/** Typed client for the planning API.
 *
 * Mutations carry the last seen revision as If-Match; the server answers 409
 * to stale writes and the controller decides whether to replay. Error bodies
 * surface as ApiError with the server's detail text.
 */

import type {
  CandidateCreated,
  ComparePayload,
  GeoJson,
  HistogramResponse,
  OverrideResponse,
  RegionsResponse,
  SessionCreated,
  SessionSummary,
  SetKResponse,
  SilhouetteCurve,
  StopsResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
    else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    ifMatch?: number,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (ifMatch !== undefined) headers["If-Match"] = String(ifMatch);
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  createSession(body: {
    trips: string;
    nodes: string;
    edges: string;
    profiles: string;
    overrides?: string;
  }): Promise<SessionCreated> {
    return this.request("POST", "/sessions", body);
  }

  summary(sid: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${sid}`);
  }

  silhouette(sid: string, kmin: number, kmax: number, seed = 0): Promise<SilhouetteCurve> {
    return this.request("GET", `/sessions/${sid}/silhouette?kmin=${kmin}&kmax=${kmax}&seed=${seed}`);
  }

  setK(sid: string, k: number, seed: number, revision: number): Promise<SetKResponse> {
    return this.request("PUT", `/sessions/${sid}/k`, { k, seed }, revision);
  }

  buildRegions(sid: string, thresholdM: number | null, revision: number): Promise<RegionsResponse> {
    const body = thresholdM === null ? {} : { threshold_m: thresholdM };
    return this.request("POST", `/sessions/${sid}/regions`, body, revision);
  }

  rankedStops(sid: string, direction: number, metric: string): Promise<StopsResponse> {
    return this.request("GET", `/sessions/${sid}/directions/${direction}/stops?metric=${metric}`);
  }

  override(
    sid: string,
    direction: number,
    regionId: number,
    spotId: number,
    revision: number,
  ): Promise<OverrideResponse> {
    return this.request(
      "PUT",
      `/sessions/${sid}/directions/${direction}/override`,
      { region_id: regionId, spot_id: spotId },
      revision,
    );
  }

  histogram(sid: string, direction: number, binMin: number): Promise<HistogramResponse> {
    return this.request("GET", `/sessions/${sid}/directions/${direction}/histogram?bin=${binMin}`);
  }

  addCandidate(
    sid: string,
    direction: number,
    departureTime: string,
    label: string | null,
    revision: number,
  ): Promise<CandidateCreated> {
    return this.request(
      "POST",
      `/sessions/${sid}/directions/${direction}/candidates`,
      { departure_time: departureTime, label },
      revision,
    );
  }

  compare(sid: string, direction: number): Promise<ComparePayload> {
    return this.request("GET", `/sessions/${sid}/directions/${direction}/compare`);
  }

  diff(sid: string, direction: number, reference: GeoJson): Promise<Record<string, unknown>> {
    return this.request("POST", `/sessions/${sid}/directions/${direction}/diff`, reference);
  }

  exportBundle(sid: string): Promise<{ revision: number; files: Record<string, string> }> {
    return this.request("GET", `/sessions/${sid}/export`);
  }
}
