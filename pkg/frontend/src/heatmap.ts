/** Spectral heatmap pixel computation and canvas rendering.
 *
 * Rows are drawn with low frequencies at the bottom; the overall-LAeq
 * row sits below the bands, visually separated by a gap. The pixel
 * computation is pure so it can be tested without a DOM.
 */

import { buildColormap, lutIndex } from './colormap.js';

export interface HeatmapLayout {
  cellW: number;
  cellH: number;
  gap: number; // pixels between the band block and the LAeq row
  width: number;
  height: number;
}

export function layoutFor(rows: number, cols: number, cellW = 14, cellH = 9): HeatmapLayout {
  const gap = 6;
  return {
    cellW,
    cellH,
    gap,
    width: cols * cellW,
    height: rows * cellH + gap,
  };
}

export interface HeatmapPixels {
  data: Uint8ClampedArray<ArrayBuffer>; // RGBA, width*height*4
  layout: HeatmapLayout;
  lo: number;
  hi: number;
}

/**
 * Compute RGBA pixels for a 37-row matrix (36 bands then overall LAeq).
 * Band row 35 (highest frequency) is drawn at the top, band row 0 at the
 * bottom of the band block; the LAeq row goes under the gap.
 */
export function computeHeatmapPixels(matrix: number[][], cellW = 14, cellH = 9): HeatmapPixels {
  const rows = matrix.length;
  const cols = matrix[0]?.length ?? 0;
  const layout = layoutFor(rows, cols, cellW, cellH);
  const lut = buildColormap();

  let lo = Infinity;
  let hi = -Infinity;
  for (const row of matrix) {
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }

  const { width, height } = layout;
  const data = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));

  const bandRows = rows - 1;
  const paint = (matrixRow: number, pixelTop: number) => {
    for (let c = 0; c < cols; c++) {
      const idx = lutIndex(matrix[matrixRow][c], lo, hi) * 3;
      for (let dy = 0; dy < cellH; dy++) {
        const rowStart = ((pixelTop + dy) * width + c * cellW) * 4;
        for (let dx = 0; dx < cellW; dx++) {
          const p = rowStart + dx * 4;
          data[p] = lut[idx];
          data[p + 1] = lut[idx + 1];
          data[p + 2] = lut[idx + 2];
          data[p + 3] = 255;
        }
      }
    }
  };

  for (let band = 0; band < bandRows; band++) {
    // highest band first: band 35 at pixel row 0
    paint(bandRows - 1 - band, band * cellH);
  }
  paint(rows - 1, bandRows * cellH + layout.gap); // overall LAeq under the gap

  return { data, layout, lo, hi };
}

/** Blit pixels onto a canvas and draw the separator between bands and LAeq. */
export function renderHeatmap(canvas: HTMLCanvasElement, matrix: number[][]): HeatmapPixels {
  const pixels = computeHeatmapPixels(matrix);
  const { width, height } = pixels.layout;
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext('2d');
  if (ctx !== null) {
    ctx.putImageData(new ImageData(pixels.data, width, height), 0, 0);
  }
  return pixels;
}

/** Draw a horizontal color-scale legend with the dB (or unitless) bounds. */
export function renderLegend(canvas: HTMLCanvasElement, lo: number, hi: number, unit: string): void {
  const width = 220;
  const height = 14;
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext('2d');
  if (ctx === null) return;
  const lut = buildColormap();
  for (let x = 0; x < width; x++) {
    const idx = Math.round((x / (width - 1)) * 255) * 3;
    ctx.fillStyle = `rgb(${lut[idx]},${lut[idx + 1]},${lut[idx + 2]})`;
    ctx.fillRect(x, 0, 1, height);
  }
  const label = document.getElementById('legend-label');
  if (label !== null) {
    label.textContent = `${lo.toFixed(1)} ${unit}  to  ${hi.toFixed(1)} ${unit}`;
  }
}
