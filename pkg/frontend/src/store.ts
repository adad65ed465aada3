/** Session view state with a single ordered update queue.
 *
 * Server responses are applied through `apply`, which discards any payload
 * older than the revision already on screen, so late responses from slow
 * requests can never overwrite newer state. Optimistic drag positions live
 * in a separate overlay that reconciliation clears.
 */

import type {
  MetricsPayload,
  OptimizeResponse,
  PatchResponse,
  Point,
  ProfileSamples,
  SessionState,
  SimulateResponse,
} from "./api.js";

export interface Camera {
  centerX: number;
  centerY: number;
  scale: number;
}

export interface Overlays {
  heatmap: boolean;
  curvature: boolean;
  boundaries: boolean;
}

export interface ViewState {
  session: SessionState | null;
  camera: Camera;
  selection: number[];
  overlays: Overlays;
  /** 1-based index of the handle being dragged, if any. */
  dragIndex: number | null;
  /** Local not-yet-confirmed handle position, keyed by 1-based index. */
  optimistic: Map<number, Point>;
  /** Set when the last geometry edit raised a boundary flag. */
  violationFlagged: boolean;
}

type Listener = (state: ViewState) => void;

export class SessionStore {
  private state: ViewState = {
    session: null,
    camera: { centerX: 0, centerY: 0, scale: 1 },
    selection: [],
    overlays: { heatmap: true, curvature: true, boundaries: true },
    dragIndex: null,
    optimistic: new Map(),
    violationFlagged: false,
  };
  private listeners: Listener[] = [];
  private queue: Promise<void> = Promise.resolve();
  /** Count of applied server payloads, for tests that watch ordering. */
  applied = 0;
  /** Count of payloads dropped by the revision guard. */
  discarded = 0;

  get view(): ViewState {
    return this.state;
  }

  get revision(): number {
    return this.state.session ? this.state.session.revision : 0;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  /** Queue a server payload; `revision` is the revision it belongs to. */
  apply(revision: number, mutate: (session: SessionState) => void): Promise<boolean> {
    const run = this.queue.then(() => {
      const session = this.state.session;
      if (!session || revision < session.revision) {
        this.discarded += 1;
        return false;
      }
      mutate(session);
      session.revision = revision;
      this.applied += 1;
      this.emit();
      return true;
    });
    this.queue = run.then(() => undefined);
    return run;
  }

  /** Replace the whole session (initial load or post-conflict reload). */
  load(state: SessionState): Promise<boolean> {
    const run = this.queue.then(() => {
      const current = this.state.session;
      if (current && current.id === state.id && state.revision < current.revision) {
        this.discarded += 1;
        return false;
      }
      this.state.session = state;
      this.state.optimistic.clear();
      this.state.violationFlagged = state.violations.length > 0;
      if (!current || current.id !== state.id) this.fitCamera(state);
      this.applied += 1;
      this.emit();
      return true;
    });
    this.queue = run.then(() => undefined);
    return run;
  }

  private fitCamera(state: SessionState): void {
    const xs = state.boundary_left.concat(state.boundary_right).map((p) => p[0]);
    const ys = state.boundary_left.concat(state.boundary_right).map((p) => p[1]);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    this.state.camera = {
      centerX: (minX + maxX) / 2,
      centerY: (minY + maxY) / 2,
      scale: 1 / Math.max(maxX - minX, maxY - minY, 1e-9),
    };
  }

  /** Optimistic handle move during a drag; no revision change. */
  setOptimistic(index: number, point: Point): void {
    this.state.optimistic.set(index, point);
    this.state.dragIndex = index;
    this.emit();
  }

  clearDrag(): void {
    this.state.dragIndex = null;
    this.state.optimistic.clear();
    this.emit();
  }

  applyPatch(resp: PatchResponse): Promise<boolean> {
    return this.apply(resp.revision, (session) => {
      session.control_points[resp.index - 1] = resp.control_point;
      resp.samples.indices.forEach((sample, row) => {
        session.positions[sample] = resp.samples.positions[row]!;
        session.headings[sample] = resp.samples.headings[row]!;
        session.curvatures[sample] = resp.samples.curvatures[row]!;
      });
      session.violations = resp.violations;
      session.metrics.stale = true;
      // Keep the overlay when the pointer has moved past the position this
      // response reconciles; the newer value still has a PATCH in flight.
      const local = this.state.optimistic.get(resp.index);
      if (
        local &&
        local[0] === resp.control_point[0] &&
        local[1] === resp.control_point[1]
      ) {
        this.state.optimistic.delete(resp.index);
      }
      this.state.violationFlagged = resp.violation_flagged;
    });
  }

  applyOptimize(resp: OptimizeResponse): Promise<boolean> {
    return this.apply(resp.revision, (session) => {
      session.control_points = resp.control_points;
      session.curvatures = resp.curvatures;
      session.violations = resp.violations;
      session.metrics.stale = true;
      this.state.violationFlagged = resp.violations.length > 0;
    });
  }

  applySimulate(resp: SimulateResponse): Promise<boolean> {
    return this.apply(resp.revision, (session) => {
      session.samples = resp.samples;
      session.metrics.working = resp.metrics;
      session.metrics.stale = false;
    });
  }

  applyMetrics(payload: MetricsPayload): Promise<boolean> {
    return this.apply(payload.revision, (session) => {
      session.metrics = payload;
    });
  }

  setSelection(indices: number[]): void {
    this.state.selection = indices;
    this.emit();
  }

  setOverlay(name: keyof Overlays, on: boolean): void {
    this.state.overlays[name] = on;
    this.emit();
  }

  panBy(dx: number, dy: number): void {
    this.state.camera.centerX += dx;
    this.state.camera.centerY += dy;
    this.emit();
  }

  zoomBy(factor: number): void {
    this.state.camera.scale *= factor;
    this.emit();
  }

  /** Effective handle position: optimistic overlay wins during a drag. */
  controlPoint(index: number): Point {
    const local = this.state.optimistic.get(index);
    if (local) return local;
    const session = this.state.session;
    if (!session) throw new Error("no session loaded");
    const point = session.control_points[index - 1];
    if (!point) throw new Error(`control point ${index} out of range`);
    return point;
  }

  /** Current profile samples, or null before the first simulation. */
  get samples(): ProfileSamples | null {
    return this.state.session ? this.state.session.samples : null;
  }
}
