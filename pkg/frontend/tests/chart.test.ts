import { describe, expect, it } from "vitest";
import { DEFAULT_LAYOUT, makeScale, pathFor } from "../src/chart.js";

const series = {
  x: [1, 100, 200, 400, 613],
  y: [0.2, 0.15, 0.1, 0.02, -0.05],
};

describe("chart scales", () => {
  it("maps data corners onto the plot area", () => {
    const scale = makeScale([series]);
    const { margin, width, height } = DEFAULT_LAYOUT;
    expect(scale.xToPx(1)).toBeCloseTo(margin.left, 6);
    expect(scale.xToPx(613)).toBeCloseTo(width - margin.right, 6);
    expect(scale.yToPx(0.2)).toBeCloseTo(margin.top, 6);
    expect(scale.yToPx(-0.05)).toBeCloseTo(height - margin.bottom, 6);
  });

  it("x positions increase with time, y positions decrease with rho", () => {
    const scale = makeScale([series]);
    expect(scale.xToPx(100)).toBeGreaterThan(scale.xToPx(1));
    expect(scale.yToPx(0.1)).toBeGreaterThan(scale.yToPx(0.2));
  });

  it("always includes the rho = 0 gridline", () => {
    const positive = { x: [0, 10], y: [0.1, 0.2] };
    const scale = makeScale([positive]);
    expect(scale.yTicks.some((t) => t.value === 0)).toBe(true);
  });

  it("path has one segment per point", () => {
    const scale = makeScale([series]);
    const d = pathFor(series, scale);
    expect(d.startsWith("M")).toBe(true);
    expect(d.split(" ")).toHaveLength(series.x.length);
    expect(d.match(/L/g)).toHaveLength(series.x.length - 1);
  });

  it("shared scale covers both curves", () => {
    const other = { x: [0, 700], y: [0.3, -0.1] };
    const scale = makeScale([series, other]);
    expect(scale.xToPx(700)).toBeLessThanOrEqual(
      DEFAULT_LAYOUT.width - DEFAULT_LAYOUT.margin.right + 1e-9,
    );
    expect(scale.yToPx(0.3)).toBeGreaterThanOrEqual(DEFAULT_LAYOUT.margin.top - 1e-9);
  });
});
