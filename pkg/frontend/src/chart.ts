// SVG line-chart geometry as pure functions: callers hand in series and
// get back path strings and tick positions, so everything is testable
// without a DOM.

export interface Series {
  /** x values in data units (EFPD) */
  x: number[];
  /** y values in data units (reactivity) */
  y: number[];
}

export interface ChartLayout {
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
}

export interface Tick {
  pos: number;
  value: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 640,
  height: 320,
  margin: { left: 56, right: 16, top: 12, bottom: 36 },
};

export interface ChartScale {
  xToPx(x: number): number;
  yToPx(y: number): number;
  xTicks: Tick[];
  yTicks: Tick[];
}

function niceStep(span: number, maxTicks: number): number {
  const raw = span / Math.max(maxTicks, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

function ticksFor(lo: number, hi: number, maxTicks: number): number[] {
  if (!(hi > lo)) return [lo];
  const step = niceStep(hi - lo, maxTicks);
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += step) {
    out.push(Number(v.toFixed(12)));
  }
  return out;
}

export function makeScale(
  series: Series[],
  layout: ChartLayout = DEFAULT_LAYOUT,
): ChartScale {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys, 0); // always show the rho = 0 line
  let yHi = Math.max(...ys, 0);
  if (yLo === yHi) {
    yLo -= 1;
    yHi += 1;
  }
  const { width, height, margin } = layout;
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const xToPx = (x: number): number =>
    margin.left + ((x - xLo) / (xHi - xLo || 1)) * plotW;
  const yToPx = (y: number): number =>
    margin.top + (1 - (y - yLo) / (yHi - yLo)) * plotH;
  return {
    xToPx,
    yToPx,
    xTicks: ticksFor(xLo, xHi, 8).map((v) => ({ pos: xToPx(v), value: v })),
    yTicks: ticksFor(yLo, yHi, 6).map((v) => ({ pos: yToPx(v), value: v })),
  };
}

export function pathFor(series: Series, scale: ChartScale): string {
  const parts: string[] = [];
  for (let i = 0; i < series.x.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(
      `${cmd}${scale.xToPx(series.x[i]).toFixed(2)},` +
        `${scale.yToPx(series.y[i]).toFixed(2)}`,
    );
  }
  return parts.join(" ");
}
