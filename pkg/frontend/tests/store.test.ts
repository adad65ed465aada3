import { describe, expect, it } from "vitest";

import { SessionStore } from "../src/store.js";
import { metricsWithWorking, patchResponse, ringState } from "./fixtures.js";

describe("revision monotonicity", () => {
  it("discards a payload older than the displayed revision", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    const state = store.view.session!;

    const newer = patchResponse(state, 2, [101, 1], 3);
    const older = patchResponse(state, 2, [99, -1], 2);
    expect(await store.applyPatch(newer)).toBe(true);
    expect(await store.applyPatch(older)).toBe(false);

    expect(store.revision).toBe(3);
    expect(store.view.session!.control_points[1]).toEqual([101, 1]);
    expect(store.discarded).toBe(1);
  });

  it("never lets a slow response overwrite newer state (simulated latency)", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    const state = store.view.session!;

    // Two requests race: the first (revision 2) resolves after the second
    // (revision 3). Application order is resolution order.
    const slow = new Promise<boolean>((resolve) => {
      setTimeout(() => resolve(store.applyPatch(patchResponse(state, 1, [90, 0], 2))), 20);
    });
    const fast = store.applyPatch(patchResponse(state, 1, [95, 5], 3));

    expect(await fast).toBe(true);
    expect(await slow).toBe(false);
    expect(store.view.session!.control_points[0]).toEqual([95, 5]);
    expect(store.revision).toBe(3);
  });

  it("rejects a stale full-state reload for the same session", async () => {
    const store = new SessionStore();
    const initial = ringState();
    await store.load(initial);
    await store.applyPatch(patchResponse(initial, 3, [0, 101], 2));

    const staleSnapshot = ringState();
    expect(await store.load(staleSnapshot)).toBe(false);
    expect(store.revision).toBe(2);
    expect(store.view.session!.control_points[2]).toEqual([0, 101]);
  });

  it("applies queued updates strictly in order", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    const state = store.view.session!;
    const order: number[] = [];
    store.subscribe((v) => order.push(v.session!.revision));

    await Promise.all([
      store.applyPatch(patchResponse(state, 1, [1, 1], 2)),
      store.applyPatch(patchResponse(state, 1, [2, 2], 3)),
      store.applyPatch(patchResponse(state, 1, [3, 3], 4)),
    ]);
    expect(order).toEqual([2, 3, 4]);
  });
});

describe("state application", () => {
  it("patch updates only the returned samples and marks metrics stale", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    const before = store.view.session!.curvatures.slice();

    await store.applyPatch(patchResponse(store.view.session!, 2, [101, 1], 2));
    const after = store.view.session!.curvatures;
    expect(after[0]).toBe(0.011);
    expect(after[1]).toBe(0.012);
    for (let i = 2; i < after.length; i++) expect(after[i]).toBe(before[i]);
    expect(store.view.session!.metrics.stale).toBe(true);
  });

  it("simulate attaches samples and clears staleness at the same revision", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    expect(store.samples).toBeNull();

    const ok = await store.applySimulate({
      revision: 1,
      metrics: metricsWithWorking().working!,
      samples: { x: [0, 1], y: [0, 0], v: [38.7, 38.7], t_cum: [0, 0.08] },
      sweeps: 2,
    });
    expect(ok).toBe(true);
    expect(store.samples).not.toBeNull();
    expect(store.view.session!.metrics.stale).toBe(false);
  });

  it("optimistic positions overlay the server geometry until reconciled", async () => {
    const store = new SessionStore();
    await store.load(ringState());
    const server = store.view.session!.control_points[0]!;

    store.setOptimistic(1, [123, 45]);
    expect(store.controlPoint(1)).toEqual([123, 45]);
    expect(store.view.session!.control_points[0]).toEqual(server);

    await store.applyPatch(patchResponse(store.view.session!, 1, [123, 45], 2));
    expect(store.view.optimistic.has(1)).toBe(false);
    expect(store.controlPoint(1)).toEqual([123, 45]);
  });
});
