/** Shared test doubles: canned session payloads and an in-memory service.
 *
 * The fake service hands back scripted numbers; it runs no physics, which
 * is exactly the point of the fidelity tests: whatever the service says is
 * what the UI must show.
 */

import type {
  MetricsPayload,
  PatchResponse,
  Point,
  SessionState,
} from "../src/api.js";

export function ringState(overrides: Partial<SessionState> = {}): SessionState {
  const n = 8;
  const m = 32;
  const r = 100;
  const controls: Point[] = [];
  for (let j = 0; j < n; j++) {
    const a = (2 * Math.PI * j) / n;
    controls.push([r * Math.cos(a), r * Math.sin(a)]);
  }
  const params: number[] = [];
  const positions: Point[] = [];
  const headings: number[] = [];
  const curvatures: number[] = [];
  const left: Point[] = [];
  const right: Point[] = [];
  for (let i = 0; i < m; i++) {
    const t = i / m;
    const a = 2 * Math.PI * t;
    params.push(t);
    positions.push([r * Math.cos(a), r * Math.sin(a)]);
    headings.push(a + Math.PI / 2);
    curvatures.push(1 / r);
    left.push([(r - 5) * Math.cos(a), (r - 5) * Math.sin(a)]);
    right.push([(r + 5) * Math.cos(a), (r + 5) * Math.sin(a)]);
  }
  const baseline = {
    lap_time_s: 16.223,
    avg_speed_mps: 38.73,
    max_speed_mps: 38.73,
    min_speed_mps: 38.73,
    max_lat_acc_mps2: 15.0,
    max_throttle_mps2: 0.0,
    max_braking_mps2: 0.0,
  };
  return {
    id: "fixture",
    revision: 1,
    name: "ring",
    ds: 3,
    margin: 0,
    degree: 3,
    n_ctrl: n,
    n_samples: m,
    total_length_m: 2 * Math.PI * r,
    control_points: controls,
    centerline_control_points: controls.map((p) => [...p] as Point),
    params,
    positions,
    headings,
    curvatures,
    centerline_positions: positions.map((p) => [...p] as Point),
    boundary_left: left,
    boundary_right: right,
    violations: [],
    vehicle: { a_acc_max: 10, a_dec_max: 20, a_lat_left: 15, a_lat_right: 15, v_max: null },
    metrics: { baseline, working: null, stale: true, revision: 1 },
    samples: null,
    ...overrides,
  };
}

export function patchResponse(
  state: SessionState,
  index: number,
  point: Point,
  revision: number,
  violations: number[] = [],
): PatchResponse {
  return {
    revision,
    index,
    control_point: point,
    samples: {
      indices: [0, 1],
      positions: [state.positions[0]!, state.positions[1]!],
      headings: [state.headings[0]!, state.headings[1]!],
      curvatures: [0.011, 0.012],
    },
    violations,
    violation_flagged: violations.length > 0,
  };
}

export function metricsWithWorking(): MetricsPayload {
  return {
    baseline: {
      lap_time_s: 16.223,
      avg_speed_mps: 38.73,
      max_speed_mps: 38.73,
      min_speed_mps: 38.73,
      max_lat_acc_mps2: 15.0,
      max_throttle_mps2: 0.0,
      max_braking_mps2: 0.0,
    },
    working: {
      lap_time_s: 15.948,
      avg_speed_mps: 39.398,
      max_speed_mps: 41.2,
      min_speed_mps: 37.9,
      max_lat_acc_mps2: 15.0,
      max_throttle_mps2: 1.3,
      max_braking_mps2: -2.6,
    },
    stale: false,
    revision: 2,
    rows: [
      { label: "Lap Time (s)", baseline: 16.223, working: 15.948, delta_pct: -1.695 },
      { label: "Avg Speed (m/s)", baseline: 38.73, working: 39.398, delta_pct: 1.725 },
      { label: "Max Speed (m/s)", baseline: 38.73, working: 41.2, delta_pct: 6.378 },
      { label: "Min Speed (m/s)", baseline: 38.73, working: 37.9, delta_pct: -2.143 },
      { label: "Max Lat Acc (m/s^2)", baseline: 15.0, working: 15.0, delta_pct: 0.0 },
      { label: "Max Throttle (m/s^2)", baseline: 0.0, working: 1.3, delta_pct: null },
      { label: "Max Braking (m/s^2)", baseline: 0.0, working: -2.6, delta_pct: null },
    ],
  };
}

type Handler = (method: string, path: string, body: unknown) => { status: number; body: unknown };

/** fetch-compatible wrapper around a scripted request handler. */
export function fakeFetch(handler: Handler) {
  const calls: { method: string; path: string; body: unknown }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ method, path, body });
    const result = handler(method, path, body);
    return new Response(JSON.stringify(result.body), {
      status: result.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}
