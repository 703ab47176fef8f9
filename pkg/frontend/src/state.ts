// Pure constraint-panel state. Mirrors (never replaces) server-side
// validation: every payload we build satisfies the global bounds.

import type { ParameterInfo } from "./api.js";

export type RangeState = {
  info: ParameterInfo;
  lo: number;
  hi: number;
  locked: boolean;
};

export type PanelState = Map<string, RangeState>;

export type ClampResult = {
  value: number;
  clamped: boolean;
};

export function makePanel(params: ParameterInfo[],
                          stage: "cgg" | "id"): PanelState {
  const panel: PanelState = new Map();
  for (const info of params) {
    if (info.stage !== stage) continue;
    panel.set(info.name, {
      info,
      lo: info.global_min,
      hi: info.global_max,
      locked: false,
    });
  }
  return panel;
}

export function clampToGlobal(info: ParameterInfo, value: number): ClampResult {
  if (Number.isNaN(value)) {
    return { value: info.global_min, clamped: true };
  }
  const v = Math.min(Math.max(value, info.global_min), info.global_max);
  return { value: v, clamped: v !== value };
}

// Swap-prevention: the min handle may push up to but never past the max
// handle, and vice versa.
export function setMin(r: RangeState, value: number): ClampResult {
  const c = clampToGlobal(r.info, value);
  const v = Math.min(c.value, r.hi);
  r.lo = v;
  if (r.locked) r.hi = v;
  return { value: v, clamped: c.clamped || v !== c.value };
}

export function setMax(r: RangeState, value: number): ClampResult {
  const c = clampToGlobal(r.info, value);
  const v = Math.max(c.value, r.lo);
  r.hi = v;
  if (r.locked) r.lo = v;
  return { value: v, clamped: c.clamped || v !== c.value };
}

// Lock collapses the range to a single value (min = max = value); unlocking
// keeps the collapsed range until the user widens it again.
export function setLocked(r: RangeState, locked: boolean, value?: number): void {
  r.locked = locked;
  if (locked) {
    const v = clampToGlobal(r.info, value ?? (r.lo + r.hi) / 2).value;
    r.lo = v;
    r.hi = v;
  }
}

export function resetToGlobal(panel: PanelState): void {
  for (const r of panel.values()) {
    r.lo = r.info.global_min;
    r.hi = r.info.global_max;
    r.locked = false;
  }
}

export function isGlobal(r: RangeState): boolean {
  return r.lo === r.info.global_min && r.hi === r.info.global_max;
}

// Omit parameters left at their global range; return undefined when every
// parameter is global so the request can skip the constraints field.
export function buildConstraints(
  panel: PanelState,
): Record<string, [number, number]> | undefined {
  const out: Record<string, [number, number]> = {};
  let any = false;
  for (const [name, r] of panel) {
    if (!isGlobal(r)) {
      out[name] = [r.lo, r.hi];
      any = true;
    }
  }
  return any ? out : undefined;
}

export function applyConstraints(
  panel: PanelState,
  constraints: Record<string, [number, number]>,
): void {
  resetToGlobal(panel);
  for (const [name, [lo, hi]] of Object.entries(constraints)) {
    const r = panel.get(name);
    if (!r) continue;
    r.lo = clampToGlobal(r.info, lo).value;
    r.hi = clampToGlobal(r.info, Math.max(hi, r.lo)).value;
    r.locked = r.lo === r.hi;
  }
}
