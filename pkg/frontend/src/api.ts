/** Typed client for the raceline session service.
 *
 * Every number the UI shows originates from one of these responses; the
 * client never post-processes values beyond JSON parsing.
 */

export type Point = [number, number];

export interface Vehicle {
  a_acc_max: number;
  a_dec_max: number;
  a_lat_left: number;
  a_lat_right: number;
  v_max: number | null;
}

export interface ComparisonRow {
  label: string;
  baseline: number;
  working: number;
  delta_pct: number | null;
}

export interface MetricsPayload {
  baseline: Record<string, number>;
  working: Record<string, number> | null;
  stale: boolean;
  revision: number;
  rows?: ComparisonRow[];
}

export interface ProfileSamples {
  x: number[];
  y: number[];
  v: number[];
  t_cum: number[];
}

export interface SessionState {
  id: string;
  revision: number;
  name: string;
  ds: number;
  margin: number;
  degree: number;
  n_ctrl: number;
  n_samples: number;
  total_length_m: number;
  control_points: Point[];
  centerline_control_points: Point[];
  params: number[];
  positions: Point[];
  headings: number[];
  curvatures: number[];
  centerline_positions: Point[];
  boundary_left: Point[];
  boundary_right: Point[];
  violations: number[];
  vehicle: Vehicle;
  metrics: MetricsPayload;
  samples: ProfileSamples | null;
}

export interface PatchResponse {
  revision: number;
  index: number;
  control_point: Point;
  samples: {
    indices: number[];
    positions: Point[];
    headings: number[];
    curvatures: number[];
  };
  violations: number[];
  violation_flagged: boolean;
}

export interface OptimizeResponse {
  revision: number;
  objective: number;
  baseline_objective: number;
  reduction_pct: number;
  diagnostics: Record<string, unknown>;
  control_points: Point[];
  curvatures: number[];
  violations: number[];
}

export interface SimulateResponse {
  revision: number;
  metrics: Record<string, number>;
  samples: ProfileSamples;
  sweeps: number;
  warning?: string;
  violations?: number[];
}

export interface ExportResponse {
  revision: number;
  files: Record<string, string>;
}

export class ApiError extends Error {
  readonly status: number;
  readonly body: Record<string, unknown>;

  constructor(status: number, body: Record<string, unknown>) {
    super(typeof body["detail"] === "string" ? (body["detail"] as string) : `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class RacelineClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = (...a) => globalThis.fetch(...a)) {
    this.base = baseUrl.replace(/\/$/, "") + "/api/v1";
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchImpl(this.base + path, init);
    const payload = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) throw new ApiError(resp.status, payload);
    return payload as T;
  }

  createSession(trackCsv: string, config: Record<string, unknown> = {}): Promise<SessionState> {
    return this.request("POST", "/sessions", { track_csv: trackCsv, config });
  }

  getState(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}`);
  }

  moveControlPoint(
    id: string,
    index: number,
    x: number,
    y: number,
    revision: number,
  ): Promise<PatchResponse> {
    return this.request("PATCH", `/sessions/${id}/control-points/${index}`, { x, y, revision });
  }

  optimize(
    id: string,
    opts: { window?: string; iterations?: number; station_tol?: number } = {},
  ): Promise<OptimizeResponse> {
    return this.request("POST", `/sessions/${id}/optimize`, opts);
  }

  simulate(id: string, force = false): Promise<SimulateResponse> {
    return this.request("POST", `/sessions/${id}/simulate`, { force });
  }

  getMetrics(id: string): Promise<MetricsPayload> {
    return this.request("GET", `/sessions/${id}/metrics`);
  }

  exportBundle(id: string, force = false): Promise<ExportResponse> {
    return this.request("GET", `/sessions/${id}/export${force ? "?force=true" : ""}`);
  }
}
