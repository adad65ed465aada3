/** Drag controller for control-point handles.
 *
 * Pointer moves update the store optimistically for immediate redraw while
 * PATCH requests go out at most 30 per second with a trailing edge, so the
 * final pointer position always reaches the server. Requests are serialized:
 * each PATCH carries the revision from the previous response. A stale 409
 * reloads authoritative state and replays nothing.
 */

import { ApiError, type Point, type RacelineClient } from "./api.js";
import type { SessionStore } from "./store.js";
import { throttle, type Throttled } from "./throttle.js";

export const DRAG_RATE_HZ = 30;

export class DragController {
  private readonly client: RacelineClient;
  private readonly store: SessionStore;
  private readonly gate: Throttled<number>;
  private inFlight = false;
  private queuedIndex: number | null = null;
  private idleResolvers: (() => void)[] = [];
  /** PATCHes rejected as stale since the last drag started. */
  conflicts = 0;

  constructor(client: RacelineClient, store: SessionStore, rateHz: number = DRAG_RATE_HZ) {
    this.client = client;
    this.store = store;
    this.gate = throttle((index) => this.send(index), 1000 / rateHz);
  }

  /** Move a handle (1-based index) to a new world position. */
  move(index: number, point: Point): void {
    this.store.setOptimistic(index, point);
    this.gate.call(index);
  }

  /** Pointer released: push the trailing position, then settle. */
  async end(): Promise<void> {
    this.gate.flush();
    await this.idle();
    this.store.clearDrag();
  }

  /** Resolves once no request is in flight or queued. */
  idle(): Promise<void> {
    if (!this.inFlight && this.queuedIndex === null) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private settle(): void {
    if (this.inFlight || this.queuedIndex !== null) return;
    const resolvers = this.idleResolvers;
    this.idleResolvers = [];
    for (const resolve of resolvers) resolve();
  }

  private send(index: number): void {
    if (this.inFlight) {
      this.queuedIndex = index;
      return;
    }
    const session = this.store.view.session;
    if (!session) return;
    const point = this.store.controlPoint(index);
    this.inFlight = true;
    this.client
      .moveControlPoint(session.id, index, point[0], point[1], session.revision)
      .then((resp) => this.store.applyPatch(resp))
      .catch((err) => this.onError(err))
      .then(() => {
        this.inFlight = false;
        const queued = this.queuedIndex;
        this.queuedIndex = null;
        if (queued !== null) this.gate.call(queued);
        this.settle();
      });
  }

  private async onError(err: unknown): Promise<void> {
    if (err instanceof ApiError && err.status === 409) {
      this.conflicts += 1;
      this.queuedIndex = null;
      this.gate.cancel();
      const session = this.store.view.session;
      if (session) {
        const fresh = await this.client.getState(session.id);
        await this.store.load(fresh);
      }
      return;
    }
    throw err;
  }
}
