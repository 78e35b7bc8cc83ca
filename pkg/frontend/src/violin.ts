import type { DensityCurve } from "./types";

/**
 * Geometry for one violin: a mirrored density outline as an SVG path, plus
 * the value<->pixel mapping the brush uses.
 */
export interface ViolinGeometry {
  path: string;
  valueToX(value: number): number;
  xToValue(x: number): number;
}

/**
 * Build a horizontal violin path for a density curve.
 *
 * The value axis runs left-to-right over `domain`; density is mirrored
 * around the vertical midline and scaled so the largest density across
 * `maxDensity` (shared across runs for comparability) fills half the height.
 */
export function violinGeometry(
  curve: DensityCurve,
  domain: [number, number],
  width: number,
  height: number,
  maxDensity?: number,
): ViolinGeometry {
  const [lo, hi] = domain;
  const span = hi - lo || 1;
  const peak =
    maxDensity ?? (curve.densities.reduce((a, b) => Math.max(a, b), 0) || 1);
  const mid = height / 2;
  const half = height / 2 - 1;

  const valueToX = (value: number) => ((value - lo) / span) * width;
  const xToValue = (x: number) => lo + (x / width) * span;

  const upper: string[] = [];
  const lower: string[] = [];
  for (let i = 0; i < curve.grid.length; i++) {
    const x = valueToX(curve.grid[i]).toFixed(2);
    const extent = (curve.densities[i] / peak) * half;
    upper.push(`${x},${(mid - extent).toFixed(2)}`);
    lower.push(`${x},${(mid + extent).toFixed(2)}`);
  }
  lower.reverse();
  const path = `M${upper.join("L")}L${lower.join("L")}Z`;
  return { path, valueToX, xToValue };
}

/** Clamp-and-order a brush pixel interval into a value range. */
export function brushToRange(
  geometry: ViolinGeometry,
  x0: number,
  x1: number,
  domain: [number, number],
): [number, number] {
  const a = geometry.xToValue(Math.min(x0, x1));
  const b = geometry.xToValue(Math.max(x0, x1));
  const lo = Math.max(domain[0], a);
  const hi = Math.min(domain[1], b);
  return [lo, hi];
}
