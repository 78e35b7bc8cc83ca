/** Pure geometry helpers for the embedding panel's lasso selection. */

export interface Point {
  x: number;
  y: number;
}

/** Ray-casting point-in-polygon test; boundary points count as inside. */
export function pointInPolygon(point: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i];
    const b = polygon[j];
    if (onSegment(point, a, b)) return true;
    const crosses =
      a.y > point.y !== b.y > point.y &&
      point.x < ((b.x - a.x) * (point.y - a.y)) / (b.y - a.y) + a.x;
    if (crosses) inside = !inside;
  }
  return inside;
}

function onSegment(p: Point, a: Point, b: Point, eps = 1e-12): boolean {
  const cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (Math.abs(cross) > eps) return false;
  const dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
  const lenSq = (b.x - a.x) ** 2 + (b.y - a.y) ** 2;
  return dot >= -eps && dot <= lenSq + eps;
}

/** Labels whose projected positions fall inside the lasso polygon. */
export function labelsInLasso(
  points: Record<string, [number, number]>,
  polygon: Point[],
): string[] {
  const selected: string[] = [];
  for (const [label, [x, y]] of Object.entries(points)) {
    if (pointInPolygon({ x, y }, polygon)) selected.push(label);
  }
  return selected.sort();
}

/**
 * Map signed heatmap intensities to RGBA pixels: blue for negative, red for
 * positive, transparent near zero. Returns row-major RGBA bytes.
 */
export function intensitiesToRgba(
  intensities: number[],
  width: number,
  height: number,
): Uint8ClampedArray<ArrayBuffer> {
  if (intensities.length !== width * height) {
    throw new Error(
      `expected ${width * height} intensities, got ${intensities.length}`,
    );
  }
  let peak = 0;
  for (const v of intensities) peak = Math.max(peak, Math.abs(v));
  const pixels = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  if (peak === 0) return pixels;
  for (let i = 0; i < intensities.length; i++) {
    const t = intensities[i] / peak; // [-1, 1]
    const o = i * 4;
    if (t > 0) {
      pixels[o] = 214;
      pixels[o + 1] = 64;
      pixels[o + 2] = 46;
    } else {
      pixels[o] = 46;
      pixels[o + 1] = 96;
      pixels[o + 2] = 214;
    }
    pixels[o + 3] = Math.round(Math.min(Math.abs(t), 1) * 200);
  }
  return pixels;
}
