/** Mapping between pointer positions and the valence-arousal plane. */

/** A point on the affect plane, both coordinates in [-1, 1]. */
export interface PlanePoint {
  valence: number;
  arousal: number;
}

/** The on-screen rectangle the plane widget occupies, in CSS pixels. */
export interface PlaneRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

/**
 * Convert a pointer position to plane coordinates.
 *
 * The horizontal axis is valence (left -1, right +1) and the vertical
 * axis is arousal (top +1, bottom -1); screen y grows downward, so the
 * vertical fraction is flipped. Positions outside the rectangle clamp
 * to the nearest edge so a drag that leaves the widget keeps reporting
 * the boundary value instead of running off the scale.
 */
export function planeToValenceArousal(x: number, y: number, rect: PlaneRect): PlanePoint {
  if (rect.width <= 0 || rect.height <= 0) {
    throw new Error("plane rectangle must have positive size");
  }
  const fx = (x - rect.left) / rect.width;
  const fy = (y - rect.top) / rect.height;
  return {
    valence: clamp(2 * fx - 1, -1, 1),
    arousal: clamp(1 - 2 * fy, -1, 1),
  };
}

/**
 * Convert plane coordinates back to a pointer position, the inverse of
 * planeToValenceArousal for in-range points. Used to draw the cursor.
 */
export function valenceArousalToPlane(point: PlanePoint, rect: PlaneRect): { x: number; y: number } {
  return {
    x: rect.left + ((point.valence + 1) / 2) * rect.width,
    y: rect.top + ((1 - point.arousal) / 2) * rect.height,
  };
}
