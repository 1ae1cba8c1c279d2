/** 256-entry RGB lookup table for the spectral heatmaps.
 *
 * Piecewise-linear interpolation through viridis-like stops: dark
 * violet for quiet cells up to bright yellow for loud ones.
 */

const STOPS: [number, number, number, number][] = [
  [0.0, 68, 1, 84],
  [0.25, 59, 82, 139],
  [0.5, 33, 145, 140],
  [0.75, 94, 201, 98],
  [1.0, 253, 231, 37],
];

export function buildColormap(): Uint8Array {
  const lut = new Uint8Array(256 * 3);
  for (let i = 0; i < 256; i++) {
    const t = i / 255;
    let lo = 0;
    for (let s = 0; s < STOPS.length - 1; s++) {
      if (t >= STOPS[s][0]) lo = s;
    }
    const hi = Math.min(lo + 1, STOPS.length - 1);
    const range = STOPS[hi][0] - STOPS[lo][0];
    const frac = range > 0 ? (t - STOPS[lo][0]) / range : 0;
    for (let ch = 0; ch < 3; ch++) {
      lut[i * 3 + ch] = Math.round(
        STOPS[lo][ch + 1] + (STOPS[hi][ch + 1] - STOPS[lo][ch + 1]) * frac,
      );
    }
  }
  return lut;
}

/** Map a value in [lo, hi] to a LUT index 0..255 (clamped). */
export function lutIndex(value: number, lo: number, hi: number): number {
  if (hi <= lo) return 0;
  const t = (value - lo) / (hi - lo);
  return Math.max(0, Math.min(255, Math.round(t * 255)));
}
