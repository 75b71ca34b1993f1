import { describe, expect, it } from "vitest";

import { formatKg, linePath, niceTicks, scaleLinear, seriesExtent } from "../src/chart.js";

describe("scaleLinear", () => {
  it("maps domain endpoints to range endpoints", () => {
    const s = scaleLinear([0, 10], [100, 200]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s(5)).toBe(150);
  });

  it("supports inverted ranges (svg y axis)", () => {
    const s = scaleLinear([0, 1], [300, 0]);
    expect(s(0)).toBe(300);
    expect(s(1)).toBe(0);
  });

  it("degenerate domain maps to range midpoint", () => {
    const s = scaleLinear([5, 5], [0, 10]);
    expect(s(5)).toBe(5);
  });
});

describe("niceTicks", () => {
  it("covers the interval with round steps", () => {
    const ticks = niceTicks(0, 100, 5);
    expect(ticks[0]).toBe(0);
    expect(ticks[ticks.length - 1]).toBe(100);
    const steps = new Set(ticks.slice(1).map((t, i) => t - ticks[i]!));
    expect(steps.size).toBe(1);
  });

  it("handles tiny and huge magnitudes", () => {
    expect(niceTicks(0, 0.003, 4).length).toBeGreaterThan(1);
    expect(niceTicks(0, 8.2e9, 4).length).toBeGreaterThan(1);
  });

  it("degenerate interval yields a single tick", () => {
    expect(niceTicks(7, 7)).toEqual([7]);
  });
});

describe("linePath", () => {
  it("emits M then L commands at scaled coordinates", () => {
    const sx = scaleLinear([0, 2], [0, 100]);
    const sy = scaleLinear([0, 10], [100, 0]);
    expect(linePath([0, 5, 10], sx, sy)).toBe("M0,100 L50,50 L100,0");
  });

  it("empty series gives empty path", () => {
    const s = scaleLinear([0, 1], [0, 1]);
    expect(linePath([], s, s)).toBe("");
  });
});

describe("seriesExtent", () => {
  it("spans all series", () => {
    expect(seriesExtent([[1, 5], [0, 3], [2, 9]])).toEqual([0, 9]);
  });

  it("pads constant data", () => {
    expect(seriesExtent([[4, 4]])).toEqual([3.5, 4.5]);
  });

  it("defaults on no data", () => {
    expect(seriesExtent([])).toEqual([0, 1]);
  });
});

describe("formatKg", () => {
  it("scales units", () => {
    expect(formatKg(2.5e9)).toBe("2.5 Mt");
    expect(formatKg(3.2e6)).toBe("3.2 kt");
    expect(formatKg(1500)).toBe("1.5 t");
    expect(formatKg(12)).toBe("12 kg");
  });
});
