/** Canvas scene renderer.
 *
 * Pure drawing: reads the view state and issues 2D-context calls. The
 * context is a structural subset of CanvasRenderingContext2D so tests can
 * substitute a recording stub. Missing layers (no simulation yet, empty
 * selection) degrade to skipped draws, never errors.
 */

import { speedColor } from "./colors.js";
import type { Point, SessionState } from "./api.js";
import type { ViewState } from "./store.js";

export interface DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  closePath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  setLineDash?(segments: number[]): void;
}

export interface Viewport {
  width: number;
  height: number;
}

/** Height fraction reserved at the bottom for the curvature strip chart. */
const STRIP_FRACTION = 0.2;
export const HANDLE_RADIUS_PX = 5;

export interface Projection {
  toScreen(p: Point): Point;
  toWorld(p: Point): Point;
}

export function projection(view: ViewState, viewport: Viewport): Projection {
  const { centerX, centerY, scale } = view.camera;
  const mapHeight = viewport.height * (1 - STRIP_FRACTION);
  const pixels = 0.9 * Math.min(viewport.width, mapHeight) * scale;
  const cx = viewport.width / 2;
  const cy = mapHeight / 2;
  return {
    toScreen: ([x, y]) => [cx + (x - centerX) * pixels, cy - (y - centerY) * pixels],
    toWorld: ([sx, sy]) => [centerX + (sx - cx) / pixels, centerY - (sy - cy) / pixels],
  };
}

function polyline(ctx: DrawContext, pts: Point[], close: boolean): void {
  if (pts.length < 2) return;
  ctx.beginPath();
  ctx.moveTo(pts[0]![0], pts[0]![1]);
  for (let i = 1; i < pts.length; i++) ctx.lineTo(pts[i]![0], pts[i]![1]);
  if (close) ctx.closePath();
  ctx.stroke();
}

/** Param interval [lo, hi) (wrapped) covered by the basis of handle h. */
export function supportInterval(session: SessionState, handle: number): [number, number] {
  const n = session.n_ctrl;
  const j = handle - 1;
  const lo = (j - session.degree) / n;
  const hi = (j + 1) / n;
  return [((lo % 1) + 1) % 1, ((hi % 1) + 1) % 1];
}

function inWrappedInterval(t: number, lo: number, hi: number): boolean {
  return lo <= hi ? t >= lo && t < hi : t >= lo || t < hi;
}

/** Sample indices covered by the selected handles' basis supports. */
export function selectedSampleIndices(session: SessionState, selection: number[]): number[] {
  if (selection.length === 0) return [];
  const intervals = selection.map((h) => supportInterval(session, h));
  const out: number[] = [];
  session.params.forEach((t, i) => {
    if (intervals.some(([lo, hi]) => inWrappedInterval(t, lo, hi))) out.push(i);
  });
  return out;
}

export function renderScene(ctx: DrawContext, view: ViewState, viewport: Viewport): void {
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  const session = view.session;
  if (!session) return;
  const proj = projection(view, viewport);
  const screen = (pts: Point[]): Point[] => pts.map((p) => proj.toScreen(p));

  if (view.overlays.boundaries) {
    ctx.strokeStyle = "#888888";
    ctx.lineWidth = 1;
    polyline(ctx, screen(session.boundary_left), true);
    polyline(ctx, screen(session.boundary_right), true);
  }

  ctx.strokeStyle = "#bbbbbb";
  ctx.lineWidth = 1;
  ctx.setLineDash?.([4, 4]);
  polyline(ctx, screen(session.centerline_positions), true);
  ctx.setLineDash?.([]);

  const samples = session.samples;
  const heatmap = view.overlays.heatmap && samples !== null;
  if (heatmap && samples) {
    const vMin = Math.min(...samples.v);
    const vMax = Math.max(...samples.v);
    const pts = screen(samples.x.map((x, i) => [x, samples.y[i]!] as Point));
    ctx.lineWidth = 3;
    for (let i = 0; i < pts.length; i++) {
      const next = pts[(i + 1) % pts.length]!;
      ctx.strokeStyle = speedColor(samples.v[i]!, vMin, vMax);
      ctx.beginPath();
      ctx.moveTo(pts[i]![0], pts[i]![1]);
      ctx.lineTo(next[0], next[1]);
      ctx.stroke();
    }
  } else {
    ctx.strokeStyle = "#1565c0";
    ctx.lineWidth = 2;
    polyline(ctx, screen(session.positions), true);
  }

  const highlighted = selectedSampleIndices(session, view.selection);
  if (highlighted.length > 0) {
    ctx.strokeStyle = "#ff9800";
    ctx.lineWidth = 5;
    ctx.globalAlpha = 0.4;
    for (const i of highlighted) {
      const a = proj.toScreen(session.positions[i]!);
      const b = proj.toScreen(session.positions[(i + 1) % session.positions.length]!);
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
    }
    ctx.globalAlpha = 1;
  }

  ctx.strokeStyle = "#90a4ae";
  ctx.lineWidth = 1;
  const handles: Point[] = [];
  for (let h = 1; h <= session.n_ctrl; h++) {
    const local = view.optimistic.get(h);
    handles.push(local ?? session.control_points[h - 1]!);
  }
  polyline(ctx, screen(handles), true);
  handles.forEach((p, i) => {
    const h = i + 1;
    const [sx, sy] = proj.toScreen(p);
    const dragged = view.dragIndex === h;
    const red = view.violationFlagged && dragged;
    ctx.fillStyle = red
      ? "#d32f2f"
      : view.selection.includes(h)
        ? "#ff9800"
        : dragged
          ? "#43a047"
          : "#1565c0";
    ctx.beginPath();
    ctx.arc(sx, sy, HANDLE_RADIUS_PX, 0, 2 * Math.PI);
    ctx.fill();
  });

  ctx.fillStyle = "#d32f2f";
  for (const i of session.violations) {
    const pos = session.positions[i];
    if (!pos) continue;
    const [sx, sy] = proj.toScreen(pos);
    ctx.beginPath();
    ctx.arc(sx, sy, 3, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (view.overlays.curvature) {
    renderCurvatureStrip(ctx, session, highlighted, viewport);
  }
}

function renderCurvatureStrip(
  ctx: DrawContext,
  session: SessionState,
  highlighted: number[],
  viewport: Viewport,
): void {
  const top = viewport.height * (1 - STRIP_FRACTION);
  const height = viewport.height - top;
  const mid = top + height / 2;
  const kMax = Math.max(...session.curvatures.map(Math.abs), 1e-12);
  const xAt = (i: number): number => (i / session.curvatures.length) * viewport.width;

  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, top, viewport.width, height);

  if (highlighted.length > 0) {
    ctx.fillStyle = "#ffe0b2";
    for (const i of highlighted) {
      ctx.fillRect(xAt(i), top, Math.max(viewport.width / session.curvatures.length, 1), height);
    }
  }

  ctx.strokeStyle = "#cccccc";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, mid);
  ctx.lineTo(viewport.width, mid);
  ctx.stroke();

  ctx.strokeStyle = "#6a1b9a";
  ctx.beginPath();
  session.curvatures.forEach((k, i) => {
    const x = xAt(i);
    const y = mid - (k / kMax) * (height / 2) * 0.9;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}
