/** Speed heatmap colors, normalized per profile to its min..max range. */

export function speedColor(v: number, vMin: number, vMax: number): string {
  const span = vMax - vMin;
  const t = span > 0 ? (v - vMin) / span : 0.5;
  const clamped = Math.min(Math.max(t, 0), 1);
  // Slow = blue (hue 240), fast = red (hue 0).
  const hue = Math.round(240 * (1 - clamped));
  return `hsl(${hue}, 90%, 50%)`;
}
