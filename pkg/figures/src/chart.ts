import { Marker, Raster, RGB, textWidth } from "./raster";

/** What a figure script hands to the shared renderer. */
export interface FigureSpec {
  id: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yDomain?: [number, number];
}

export interface Series {
  label: string;
  color: RGB;
  points: Array<[number, number]>;
  line: boolean;
  dash?: [number, number];
  marker?: Marker;
}

// Okabe-Ito palette: distinguishable under common color-vision deficiencies.
export const PALETTE: RGB[] = [
  [0, 114, 178],
  [213, 94, 0],
  [0, 158, 115],
  [204, 121, 167],
  [230, 159, 0],
  [86, 180, 233],
  [240, 228, 66],
  [0, 0, 0],
];

const BLACK: RGB = [0, 0, 0];
const GREY: RGB = [150, 150, 150];

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const base = Math.pow(10, Math.floor(Math.log10(span / count)));
  let step = base * 10;
  for (const m of [1, 2, 5]) {
    if (span / (base * m) <= count) {
      step = base * m;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Number(v.toFixed(12)));
  }
  return ticks;
}

export function formatTick(v: number): string {
  return Number(v.toPrecision(10)).toString();
}

function extent(series: Series[], axis: 0 | 1): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      if (p[axis] < lo) lo = p[axis];
      if (p[axis] > hi) hi = p[axis];
    }
  }
  if (lo === Infinity) {
    return [0, 1];
  }
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

/** Render a line-and-marker chart; layout constants are fixed on purpose. */
export function renderChart(spec: FigureSpec): Raster {
  const legendWidth =
    16 + Math.max(...spec.series.map((s) => textWidth(s.label)), textWidth(spec.id)) + 18;
  const width = 660 + legendWidth;
  const height = 520;
  const left = 78;
  const top = 30;
  const right = 640;
  const bottom = height - 58;
  const r = new Raster(width, height);

  const [x0, x1] = extent(spec.series, 0);
  const [y0, y1] = spec.yDomain ?? extent(spec.series, 1);
  const sx = (v: number) => left + ((v - x0) / (x1 - x0)) * (right - left);
  const sy = (v: number) => bottom - ((v - y0) / (y1 - y0)) * (bottom - top);

  for (const t of niceTicks(x0, x1)) {
    const px = sx(t);
    r.line(px, top, px, bottom, [235, 235, 235]);
    r.line(px, bottom, px, bottom + 4, BLACK);
    const label = formatTick(t);
    r.text(px - textWidth(label) / 2, bottom + 8, label, BLACK);
  }
  for (const t of niceTicks(y0, y1)) {
    const py = sy(t);
    r.line(left, py, right, py, [235, 235, 235]);
    r.line(left - 4, py, left, py, BLACK);
    const label = formatTick(t);
    r.text(left - 8 - textWidth(label), py - 3, label, BLACK);
  }
  // frame on top of the grid
  r.line(left, top, right, top, BLACK);
  r.line(left, bottom, right, bottom, BLACK);
  r.line(left, top, left, bottom, BLACK);
  r.line(right, top, right, bottom, BLACK);
  r.text((left + right) / 2 - textWidth(spec.xLabel, 2) / 2, height - 22, spec.xLabel, BLACK, 2);
  r.textUp(12, (top + bottom) / 2 + textWidth(spec.yLabel, 2) / 2, spec.yLabel, BLACK, 2);

  for (const s of spec.series) {
    const pts = [...s.points].sort((a, b) => a[0] - b[0]);
    if (s.line) {
      for (let i = 1; i < pts.length; i++) {
        r.line(sx(pts[i - 1][0]), sy(pts[i - 1][1]), sx(pts[i][0]), sy(pts[i][1]), s.color, s.dash);
      }
    }
    if (s.marker) {
      for (const p of pts) {
        r.marker(s.marker, sx(p[0]), sy(p[1]), s.color);
      }
    }
  }

  let ly = top + 6;
  r.text(right + 16, ly, spec.id, GREY);
  ly += 14;
  for (const s of spec.series) {
    if (!s.label) continue; // unlabelled series share a labelled twin's entry
    if (s.line) {
      r.line(right + 16, ly + 3, right + 28, ly + 3, s.color, s.dash);
    }
    if (s.marker) {
      r.marker(s.marker, right + 22, ly + 3, s.color);
    }
    r.text(right + 32, ly, s.label, BLACK);
    ly += 11;
    if (ly > bottom) break; // clip overlong legends rather than overflow
  }
  return r;
}
