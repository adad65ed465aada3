/** Browser bootstrap: wires the canvas, pointer events, and the toolbar to
 * the service client, the store, and the drag controller. */

import { RacelineClient } from "./api.js";
import { DragController } from "./drag.js";
import { buildMetricsPanel } from "./metrics.js";
import { HANDLE_RADIUS_PX, projection, renderScene } from "./render.js";
import { SessionStore } from "./store.js";

const client = new RacelineClient(window.location.origin);
const store = new SessionStore();
const drag = new DragController(client, store);

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const panel = document.getElementById("metrics")!;
const status = document.getElementById("status")!;

function viewport() {
  return { width: canvas.width, height: canvas.height };
}

function redraw(): void {
  renderScene(ctx, store.view, viewport());
  renderPanel();
}

function renderPanel(): void {
  const session = store.view.session;
  if (!session) {
    panel.textContent = "no session";
    return;
  }
  const model = buildMetricsPanel(session.metrics);
  const table = document.createElement("table");
  if (model.greyed) table.classList.add("stale");
  for (const row of model.rows) {
    const tr = document.createElement("tr");
    const cells = [row.label, row.baseline.text, row.working?.text ?? "", row.delta?.text ?? ""];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  panel.replaceChildren(table);
  if (model.prompt) {
    const note = document.createElement("div");
    note.className = "prompt";
    note.textContent = model.prompt;
    panel.appendChild(note);
  }
}

store.subscribe(redraw);

function handleAt(sx: number, sy: number): number | null {
  const session = store.view.session;
  if (!session) return null;
  const proj = projection(store.view, viewport());
  for (let h = 1; h <= session.n_ctrl; h++) {
    const [hx, hy] = proj.toScreen(store.controlPoint(h));
    if (Math.hypot(hx - sx, hy - sy) <= HANDLE_RADIUS_PX + 3) return h;
  }
  return null;
}

let activeHandle: number | null = null;

canvas.addEventListener("pointerdown", (ev) => {
  activeHandle = handleAt(ev.offsetX, ev.offsetY);
  if (activeHandle !== null) canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointermove", (ev) => {
  if (activeHandle === null) return;
  const proj = projection(store.view, viewport());
  drag.move(activeHandle, proj.toWorld([ev.offsetX, ev.offsetY]));
});

canvas.addEventListener("pointerup", () => {
  if (activeHandle === null) return;
  activeHandle = null;
  void drag.end();
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  store.zoomBy(ev.deltaY < 0 ? 1.1 : 1 / 1.1);
});

document.getElementById("optimize")!.addEventListener("click", async () => {
  const session = store.view.session;
  if (!session) return;
  const windowSpec = (document.getElementById("window") as HTMLInputElement).value.trim();
  status.textContent = "optimizing...";
  const resp = await client.optimize(session.id, windowSpec ? { window: windowSpec } : {});
  await store.applyOptimize(resp);
  status.textContent = `sum k^2 reduced ${resp.reduction_pct.toFixed(2)}%`;
});

document.getElementById("simulate")!.addEventListener("click", async () => {
  const session = store.view.session;
  if (!session) return;
  status.textContent = "simulating...";
  const resp = await client.simulate(session.id);
  await store.applySimulate(resp);
  const metrics = await client.getMetrics(session.id);
  await store.applyMetrics(metrics);
  status.textContent = resp.warning ?? "simulation complete";
});

document.getElementById("track-file")!.addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  status.textContent = "creating session...";
  try {
    const state = await client.createSession(await file.text());
    await store.load(state);
    status.textContent = `loaded ${state.name}: ${state.n_ctrl} control points`;
  } catch (err) {
    status.textContent = String(err);
  }
});
