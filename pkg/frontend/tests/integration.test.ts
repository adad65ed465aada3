/** End-to-end tests against the real Python service over localhost HTTP.
 *
 * The suite spawns the service itself; nothing here mocks the network. The
 * ring fixture (R=200 m, widths 6/6) keeps the numbers analytic.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, RacelineClient } from "../src/api.js";
import { DragController } from "../src/drag.js";
import { buildMetricsPanel } from "../src/metrics.js";
import { renderScene, type DrawContext } from "../src/render.js";
import { SessionStore } from "../src/store.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

function ringCsv(): string {
  const lines = ["x_m,y_m,w_left_m,w_right_m"];
  const r = 200;
  for (let i = 0; i < 360; i++) {
    const a = (2 * Math.PI * i) / 360;
    lines.push(`${r * Math.cos(a)},${r * Math.sin(a)},6.0,6.0`);
  }
  return lines.join("\n") + "\n";
}

function nullContext(): DrawContext {
  return {
    fillStyle: "",
    strokeStyle: "",
    lineWidth: 1,
    font: "",
    globalAlpha: 1,
    beginPath() {},
    closePath() {},
    moveTo() {},
    lineTo() {},
    arc() {},
    rect() {},
    fill() {},
    stroke() {},
    fillRect() {},
    clearRect() {},
    fillText() {},
    save() {},
    restore() {},
  };
}

beforeAll(async () => {
  const code = `import uvicorn
from raceline.service import app
uvicorn.run(app, host="127.0.0.1", port=${PORT}, log_level="warning")`;
  service = spawn("python3", ["-c", code], { stdio: ["ignore", "inherit", "inherit"] });
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/api/v1/sessions/warmup-probe`);
      if (resp.status === 404) break;
    } catch {
      /* not listening yet */
    }
    if (Date.now() > deadline) throw new Error("service did not start within 30 s");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}, 40_000);

afterAll(() => {
  service.kill();
});

describe("live service", () => {
  it(
    "drag round trip (PATCH + reconcile + redraw) completes within 200 ms",
    async () => {
      const client = new RacelineClient(BASE);
      const store = new SessionStore();
      await store.load(await client.createSession(ringCsv(), { ctrl_points: 40 }));

      // Every store change triggers a real scene render, so the measured
      // time includes the redraw work, not just the network hop.
      const ctx = nullContext();
      let redraws = 0;
      store.subscribe((view) => {
        renderScene(ctx, view, { width: 1200, height: 800 });
        redraws += 1;
      });

      const drag = new DragController(client, store);
      const [x, y] = store.controlPoint(1);
      const scale = (Math.hypot(x, y) + 0.3) / Math.hypot(x, y);

      const started = performance.now();
      drag.move(1, [x * scale, y * scale]);
      await drag.idle();
      const elapsed = performance.now() - started;

      expect(store.revision).toBe(2);
      expect(redraws).toBeGreaterThanOrEqual(2); // optimistic + reconciled
      expect(elapsed).toBeLessThanOrEqual(200);
      await drag.end();
    },
    30_000,
  );

  it(
    "metrics panel shows the service JSON verbatim after optimize + simulate",
    async () => {
      const client = new RacelineClient(BASE);
      const state = await client.createSession(ringCsv(), { ctrl_points: 40 });
      await client.optimize(state.id, { iterations: 2 });
      await client.simulate(state.id);

      const payload = await client.getMetrics(state.id);
      expect(payload.stale).toBe(false);
      expect(payload.rows!.length).toBe(7);

      const panel = buildMetricsPanel(payload);
      panel.rows.forEach((row, i) => {
        const source = payload.rows![i]!;
        expect(row.label).toBe(source.label);
        expect(row.baseline.raw).toBe(source.baseline);
        expect(row.working!.raw).toBe(source.working);
        expect(row.delta!.raw).toBe(source.delta_pct);
        expect(Number(row.baseline.text)).toBeCloseTo(source.baseline, 3);
      });

      // The lap-time row reflects a real improvement from the optimizer.
      const lap = panel.rows[0]!;
      expect(lap.label).toBe("Lap Time (s)");
      expect(lap.working!.raw!).toBeLessThanOrEqual(lap.baseline.raw!);
    },
    60_000,
  );

  it(
    "a stale snapshot from before an edit never overwrites newer state",
    async () => {
      const client = new RacelineClient(BASE);
      const store = new SessionStore();
      const created = await client.createSession(ringCsv(), { ctrl_points: 40 });
      await store.load(created);

      const staleSnapshot = await client.getState(created.id); // revision 1
      const [x, y] = store.controlPoint(7);
      const resp = await client.moveControlPoint(created.id, 7, x + 0.2, y, 1);
      await store.applyPatch(resp);
      expect(store.revision).toBe(2);

      expect(await store.load(staleSnapshot)).toBe(false);
      expect(store.revision).toBe(2);
      expect(store.view.session!.control_points[6]![0]).toBeCloseTo(x + 0.2, 12);
    },
    30_000,
  );

  it(
    "boundary violations flag the edit, block simulate, and force overrides",
    async () => {
      const client = new RacelineClient(BASE);
      const state = await client.createSession(ringCsv(), { ctrl_points: 40 });
      const [x, y] = state.control_points[0]!;
      const resp = await client.moveControlPoint(state.id, 1, x + 30, y, 1);
      expect(resp.violation_flagged).toBe(true);
      expect(resp.violations.length).toBeGreaterThan(0);

      await expect(client.simulate(state.id)).rejects.toSatisfy(
        (err: unknown) => err instanceof ApiError && err.status === 409,
      );
      const forced = await client.simulate(state.id, true);
      expect(forced.warning).toContain("boundary");
      expect(forced.metrics["lap_time_s"]).toBeGreaterThan(0);
    },
    30_000,
  );
});
