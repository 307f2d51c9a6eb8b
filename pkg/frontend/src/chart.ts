import type { CurvePoint } from "./types.js";

export interface ChartOptions {
  width?: number;
  height?: number;
  metric?: string;
  chosenN?: number | null;
  target?: number | null;
}

const MARGIN = { top: 14, right: 16, bottom: 34, left: 46 };

function ticks(lo: number, hi: number, count: number): number[] {
  if (hi <= lo) return [lo];
  const step = (hi - lo) / (count - 1);
  return Array.from({ length: count }, (_, i) => lo + i * step);
}

/**
 * Render a power-versus-N curve as a standalone SVG string.
 *
 * Pure string construction so it is testable without a DOM; the chosen
 * sample size, when inside the plotted range, is highlighted with a marker
 * and label.
 */
export function renderCurveSvg(points: CurvePoint[], options: ChartOptions = {}): string {
  const width = options.width ?? 560;
  const height = options.height ?? 260;
  const metric = options.metric ?? "power";
  if (points.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" role="img"></svg>`;
  }
  const xs = points.map((p) => p.n);
  const ys = points.map((p) => p.value);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.max(0, Math.min(...ys) - 0.05);
  const yHi = 1;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const sx = (n: number) => MARGIN.left + ((n - xLo) / Math.max(xHi - xLo, 1)) * plotW;
  const sy = (v: number) => MARGIN.top + (1 - (v - yLo) / (yHi - yLo)) * plotH;

  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.n).toFixed(1)},${sy(p.value).toFixed(1)}`)
    .join(" ");

  const pieces: string[] = [];
  pieces.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" role="img" class="curve-chart">`,
  );
  pieces.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" class="plot-bg"/>`,
  );
  for (const v of ticks(yLo, yHi, 5)) {
    const y = sy(v).toFixed(1);
    pieces.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" class="grid"/>`);
    pieces.push(`<text x="${MARGIN.left - 6}" y="${y}" class="tick y-tick">${v.toFixed(2)}</text>`);
  }
  for (const n of ticks(xLo, xHi, Math.min(7, points.length))) {
    const x = sx(n).toFixed(1);
    pieces.push(
      `<text x="${x}" y="${height - MARGIN.bottom + 16}" class="tick x-tick">${Math.round(n)}</text>`,
    );
  }
  if (options.target != null && options.target > yLo) {
    const y = sy(options.target).toFixed(1);
    pieces.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" class="target-line"/>`,
    );
  }
  pieces.push(`<path d="${path}" class="curve" fill="none"/>`);
  if (options.chosenN != null) {
    const hit = points.find((p) => p.n === options.chosenN);
    if (hit) {
      const cx = sx(hit.n).toFixed(1);
      const cy = sy(hit.value).toFixed(1);
      pieces.push(`<circle cx="${cx}" cy="${cy}" r="5" class="chosen"/>`);
      pieces.push(
        `<text x="${cx}" y="${Number(cy) - 10}" class="chosen-label">` +
          `N=${hit.n}, ${hit.value.toFixed(2)}</text>`,
      );
    }
  }
  pieces.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 4}" class="axis-label">sample size N</text>`,
  );
  pieces.push(
    `<text x="12" y="${MARGIN.top + plotH / 2}" class="axis-label y" ` +
      `transform="rotate(-90 12 ${MARGIN.top + plotH / 2})">${metric}</text>`,
  );
  pieces.push("</svg>");
  return pieces.join("");
}
