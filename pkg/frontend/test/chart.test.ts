import { describe, expect, it } from "vitest";

import { CGG_VG, extent, I_FLOOR, ID_VG, log10Floored,
         toPixel, type Series } from "../src/chart.js";

describe("bias grids", () => {
  it("match the canonical measurement grids", () => {
    expect(CGG_VG).toHaveLength(15);
    expect(CGG_VG[0]).toBeCloseTo(-0.7, 12);
    expect(CGG_VG[14]).toBeCloseTo(0.7, 12);
    expect(ID_VG).toHaveLength(8);
    expect(ID_VG[7]).toBeCloseTo(0.7, 12);
  });
});

describe("log10Floored", () => {
  it("floors at the simulator's current floor", () => {
    expect(log10Floored([1e-20, I_FLOOR, 1e-5]))
      .toEqual([-14, -14, -5]);
  });
});

describe("extent and pixel mapping", () => {
  const s = (y: number[]): Series =>
    ({ label: "s", x: y.map((_, i) => i), y, color: "#fff" });

  it("spans all series", () => {
    const e = extent([s([1, 5]), s([-2, 3])], "y");
    expect(e).toEqual({ min: -2, max: 5 });
  });

  it("pads a degenerate span so a flat line is drawable", () => {
    const e = extent([s([2, 2])], "y");
    expect(e.max - e.min).toBe(1);
    expect(toPixel(2, e, 100)).toBe(50);
  });

  it("defaults when there is nothing to draw", () => {
    expect(extent([], "y")).toEqual({ min: 0, max: 1 });
  });

  it("flips the y axis for screen coordinates", () => {
    const e = { min: 0, max: 10 };
    expect(toPixel(0, e, 200, true)).toBe(200);
    expect(toPixel(10, e, 200, true)).toBe(0);
  });
});
