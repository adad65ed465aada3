/** Metrics comparison panel model.
 *
 * Cells keep the raw service value next to its display string, and the
 * string is produced from that exact value, so what the panel shows is the
 * service JSON verbatim. The panel does no arithmetic of its own; the
 * Delta % column comes from the service rows.
 */

import type { MetricsPayload } from "./api.js";

export interface Cell {
  raw: number | null;
  text: string;
}

export interface PanelRow {
  label: string;
  baseline: Cell;
  working: Cell | null;
  delta: Cell | null;
}

export interface PanelModel {
  rows: PanelRow[];
  stale: boolean;
  greyed: boolean;
  prompt: string | null;
}

/** Labels for baseline-only sessions, in service row order. */
export const FIELD_LABELS: [string, string][] = [
  ["lap_time_s", "Lap Time (s)"],
  ["avg_speed_mps", "Avg Speed (m/s)"],
  ["max_speed_mps", "Max Speed (m/s)"],
  ["min_speed_mps", "Min Speed (m/s)"],
  ["max_lat_acc_mps2", "Max Lat Acc (m/s^2)"],
  ["max_throttle_mps2", "Max Throttle (m/s^2)"],
  ["max_braking_mps2", "Max Braking (m/s^2)"],
];

export function formatMetric(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(3);
}

export function formatDelta(value: number | null): string {
  return value === null ? "n/a" : `${value.toFixed(2)}%`;
}

function metricCell(value: number | null): Cell {
  return { raw: value, text: formatMetric(value) };
}

export function buildMetricsPanel(payload: MetricsPayload): PanelModel {
  const rows: PanelRow[] = [];
  if (payload.rows && payload.working) {
    for (const row of payload.rows) {
      rows.push({
        label: row.label,
        baseline: metricCell(row.baseline),
        working: metricCell(row.working),
        delta: { raw: row.delta_pct, text: formatDelta(row.delta_pct) },
      });
    }
  } else {
    for (const [field, label] of FIELD_LABELS) {
      const value = payload.baseline[field];
      rows.push({
        label,
        baseline: metricCell(value === undefined ? null : value),
        working: null,
        delta: null,
      });
    }
  }
  const greyed = payload.stale && payload.working !== null;
  return {
    rows,
    stale: payload.stale,
    greyed,
    prompt: greyed ? "re-simulate" : null,
  };
}
