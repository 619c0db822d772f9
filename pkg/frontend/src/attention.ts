/** Layout for the T×K attention panel: each timestep becomes a stacked
 * column whose segments fill the full panel height, so rows visually sum
 * to one. The weights themselves come from the server untouched. */

export interface StackSegment {
  frame: number;
  y: number;
  height: number;
}

export const FRAME_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#8c564b",
];

export function isSimplexRow(row: number[], tol = 1e-6): boolean {
  if (row.length === 0) return false;
  let sum = 0;
  for (const w of row) {
    if (!Number.isFinite(w) || w < -tol) return false;
    sum += w;
  }
  return Math.abs(sum - 1) <= tol;
}

/** Stack one timestep's weights into segments covering [0, height] exactly.
 * Rounding slack is absorbed by normalizing with the row sum, so the
 * segments always tile the full height even for slightly off-simplex input. */
export function stackColumn(row: number[], height: number): StackSegment[] {
  const total = row.reduce((a, b) => a + b, 0);
  if (total <= 0) throw new Error("attention row must have positive mass");
  const segments: StackSegment[] = [];
  let y = 0;
  for (let k = 0; k < row.length; k++) {
    const h = (row[k] / total) * height;
    segments.push({ frame: k, y, height: h });
    y += h;
  }
  // Pin the last segment edge to the panel bottom exactly.
  const last = segments[segments.length - 1];
  last.height += height - y;
  return segments;
}

export function stackPanel(weights: number[][], height: number): StackSegment[][] {
  return weights.map((row) => stackColumn(row, height));
}
