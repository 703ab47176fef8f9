import { describe, expect, it } from "vitest";

import type { ParameterInfo } from "../src/api.js";
import { applyConstraints, buildConstraints, clampToGlobal, isGlobal,
         makePanel, resetToGlobal, setLocked, setMax,
         setMin } from "../src/state.js";

const PARAMS: ParameterInfo[] = [
  { name: "PHIG", stage: "cgg", global_min: 4.2, global_max: 4.8 },
  { name: "EOT", stage: "cgg", global_min: 5e-10, global_max: 1.2e-9 },
  { name: "MEXP", stage: "id", global_min: 2, global_max: 10 },
];

const panel = () => makePanel(PARAMS, "cgg");

describe("makePanel", () => {
  it("keeps only the requested stage at global ranges", () => {
    const p = panel();
    expect([...p.keys()]).toEqual(["PHIG", "EOT"]);
    expect(p.get("PHIG")!.lo).toBe(4.2);
    expect(p.get("PHIG")!.hi).toBe(4.8);
  });
});

describe("clamping", () => {
  it("clamps out-of-bounds entry and reports it", () => {
    const info = PARAMS[0];
    expect(clampToGlobal(info, 5.0)).toEqual({ value: 4.8, clamped: true });
    expect(clampToGlobal(info, 4.5)).toEqual({ value: 4.5, clamped: false });
    expect(clampToGlobal(info, NaN).clamped).toBe(true);
  });

  it("prevents the min handle passing the max handle", () => {
    const r = panel().get("PHIG")!;
    setMax(r, 4.5);
    const res = setMin(r, 4.7);
    expect(res.value).toBe(4.5);
    expect(res.clamped).toBe(true);
    expect(r.lo).toBe(4.5);
  });

  it("prevents the max handle passing the min handle", () => {
    const r = panel().get("PHIG")!;
    setMin(r, 4.6);
    setMax(r, 4.3);
    expect(r.hi).toBe(4.6);
  });
});

describe("lock", () => {
  it("collapses to a single value", () => {
    const r = panel().get("PHIG")!;
    setLocked(r, true, 4.7);
    expect(r.lo).toBe(4.7);
    expect(r.hi).toBe(4.7);
  });

  it("keeps handles glued while locked", () => {
    const r = panel().get("PHIG")!;
    setLocked(r, true, 4.7);
    setMin(r, 4.4);
    expect(r.lo).toBe(4.4);
    expect(r.hi).toBe(4.4);
  });

  it("clamps the lock value to the global range", () => {
    const r = panel().get("PHIG")!;
    setLocked(r, true, 9.9);
    expect(r.lo).toBe(4.8);
  });
});

describe("constraint payloads", () => {
  it("omits constraints when everything is global", () => {
    expect(buildConstraints(panel())).toBeUndefined();
  });

  it("includes only non-global parameters", () => {
    const p = panel();
    setLocked(p.get("PHIG")!, true, 4.7);
    expect(buildConstraints(p)).toEqual({ PHIG: [4.7, 4.7] });
  });

  it("round-trips through applyConstraints", () => {
    const p = panel();
    setMin(p.get("PHIG")!, 4.3);
    setMax(p.get("PHIG")!, 4.6);
    const saved = buildConstraints(p)!;
    const q = panel();
    applyConstraints(q, saved);
    expect(q.get("PHIG")!.lo).toBe(4.3);
    expect(q.get("PHIG")!.hi).toBe(4.6);
    expect(isGlobal(q.get("EOT")!)).toBe(true);
  });

  it("restoring a pinned constraint re-locks the row", () => {
    const q = panel();
    applyConstraints(q, { PHIG: [4.7, 4.7] });
    expect(q.get("PHIG")!.locked).toBe(true);
  });

  it("reset clears everything", () => {
    const p = panel();
    setLocked(p.get("PHIG")!, true, 4.7);
    resetToGlobal(p);
    expect(buildConstraints(p)).toBeUndefined();
    expect(p.get("PHIG")!.locked).toBe(false);
  });
});
