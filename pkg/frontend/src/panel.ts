// Range-panel DOM: one dual-handle slider row per parameter, numeric entry
// kept in sync, lock toggle, and a boundary-warning badge driven by the
// saturation flags of the last extraction.

import type { PanelState, RangeState } from "./state.js";
import { setLocked, setMax, setMin } from "./state.js";

const STEPS = 400;

function fmt(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a < 1e-3 || a >= 1e4)) return v.toExponential(3);
  return String(Number(v.toPrecision(6)));
}

type Row = {
  state: RangeState;
  minSlider: HTMLInputElement;
  maxSlider: HTMLInputElement;
  minEntry: HTMLInputElement;
  maxEntry: HTMLInputElement;
  lock: HTMLInputElement;
  warn: HTMLElement;
};

export class RangePanel {
  private rows = new Map<string, Row>();
  readonly root: HTMLElement;

  constructor(panel: PanelState, onChange: () => void) {
    this.root = document.createElement("div");
    this.root.className = "range-panel";
    for (const r of panel.values()) {
      this.root.appendChild(this.buildRow(r, onChange));
    }
    this.refresh();
  }

  private buildRow(r: RangeState, onChange: () => void): HTMLElement {
    const row = document.createElement("div");
    row.className = "param-row";
    row.dataset.param = r.info.name;

    const title = document.createElement("span");
    title.className = "param-name";
    title.textContent = r.info.name;

    const warn = document.createElement("span");
    warn.className = "warn hidden";

    const slider = (cls: string) => {
      const el = document.createElement("input");
      el.type = "range";
      el.min = "0";
      el.max = String(STEPS);
      el.step = "1";
      el.className = cls;
      return el;
    };
    const entry = () => {
      const el = document.createElement("input");
      el.type = "text";
      el.className = "entry";
      return el;
    };
    const minSlider = slider("min-slider");
    const maxSlider = slider("max-slider");
    const minEntry = entry();
    const maxEntry = entry();

    const lock = document.createElement("input");
    lock.type = "checkbox";
    lock.title = "lock to a single value";

    const rowState: Row = { state: r, minSlider, maxSlider,
                            minEntry, maxEntry, lock, warn };
    this.rows.set(r.info.name, rowState);

    const fromStep = (s: string) =>
      r.info.global_min +
      (Number(s) / STEPS) * (r.info.global_max - r.info.global_min);

    minSlider.addEventListener("input", () => {
      setMin(r, fromStep(minSlider.value));
      this.refreshRow(rowState);
      onChange();
    });
    maxSlider.addEventListener("input", () => {
      setMax(r, fromStep(maxSlider.value));
      this.refreshRow(rowState);
      onChange();
    });
    const onEntry = (el: HTMLInputElement, setter: typeof setMin) => {
      el.addEventListener("change", () => {
        const res = setter(r, Number(el.value));
        warn.textContent = res.clamped ? "clamped to bounds" : "";
        warn.classList.toggle("hidden", !res.clamped);
        this.refreshRow(rowState);
        onChange();
      });
    };
    onEntry(minEntry, setMin);
    onEntry(maxEntry, setMax);
    lock.addEventListener("change", () => {
      setLocked(r, lock.checked);
      this.refreshRow(rowState);
      onChange();
    });

    const lockLabel = document.createElement("label");
    lockLabel.className = "lock-label";
    lockLabel.append(lock, "lock");
    row.append(title, minSlider, maxSlider, minEntry, maxEntry,
               lockLabel, warn);
    return row;
  }

  private refreshRow(row: Row): void {
    const r = row.state;
    const span = r.info.global_max - r.info.global_min;
    const toStep = (v: number) =>
      String(Math.round(((v - r.info.global_min) / span) * STEPS));
    row.minSlider.value = toStep(r.lo);
    row.maxSlider.value = toStep(r.hi);
    row.minEntry.value = fmt(r.lo);
    row.maxEntry.value = fmt(r.hi);
    row.lock.checked = r.locked;
    row.maxSlider.disabled = r.locked;
    row.minEntry.disabled = r.locked;
    row.maxEntry.disabled = r.locked;
  }

  refresh(): void {
    for (const row of this.rows.values()) this.refreshRow(row);
  }

  showSaturation(flags: Record<string, string>): void {
    for (const [name, row] of this.rows) {
      const flag = flags[name] ?? "none";
      const hit = flag !== "none";
      row.warn.textContent = hit ? `hitting ${flag} limit` : "";
      row.warn.classList.toggle("hidden", !hit);
      row.minSlider.parentElement?.classList.toggle("saturated", hit);
    }
  }

  clearSaturation(): void {
    this.showSaturation({});
  }

  setDisabled(disabled: boolean): void {
    this.root.querySelectorAll("input").forEach((el) => {
      (el as HTMLInputElement).disabled = disabled;
    });
    if (!disabled) this.refresh();
  }
}
