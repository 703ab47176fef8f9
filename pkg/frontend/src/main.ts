import { api, ApiError, type ExtractionResponse,
         type ParameterInfo } from "./api.js";
import { CGG_VG, drawChart, ID_VG, log10Floored,
         type Series } from "./chart.js";
import { AttemptHistory } from "./history.js";
import { RangePanel } from "./panel.js";
import { parseCurveCsv } from "./parse.js";
import { applyConstraints, buildConstraints, makePanel,
         resetToGlobal, type PanelState } from "./state.js";

type Stage = "cgg" | "id";

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

const COLORS = { target: "#4ac", fit: "#e83" };

class App {
  private stage: Stage = "cgg";
  private parameters: ParameterInfo[] = [];
  private panels!: Record<Stage, PanelState>;
  private rangePanels!: Record<Stage, RangePanel>;
  private history = new AttemptHistory();
  private target: Partial<Record<Stage, number[]>> = {};
  private lastFit: Partial<Record<Stage, ExtractionResponse>> = {};
  private busy = false;
  private logView = false;

  async init(): Promise<void> {
    this.parameters = await api.parameters();
    this.panels = {
      cgg: makePanel(this.parameters, "cgg"),
      id: makePanel(this.parameters, "id"),
    };
    const redraw = () => this.renderAll();
    this.rangePanels = {
      cgg: new RangePanel(this.panels.cgg, redraw),
      id: new RangePanel(this.panels.id, redraw),
    };
    $("panel-host").append(this.rangePanels.cgg.root,
                           this.rangePanels.id.root);

    $("stage-cgg").onclick = () => this.setStage("cgg");
    $("stage-id").onclick = () => this.setStage("id");
    $("btn-reset").onclick = () => {
      resetToGlobal(this.panels[this.stage]);
      this.rangePanels[this.stage].refresh();
      this.rangePanels[this.stage].clearSaturation();
    };
    $("btn-demo").onclick = () => this.runGuarded(() => this.demoDevice());
    $("btn-extract").onclick = () => this.runGuarded(() => this.extract());
    $("btn-log").onclick = () => {
      this.logView = !this.logView;
      this.renderAll();
    };
    $<HTMLInputElement>("file-curve").onchange = (e) =>
      this.uploadCurve(e.target as HTMLInputElement);
    this.setStage("cgg");
  }

  private setStage(stage: Stage): void {
    this.stage = stage;
    $("stage-cgg").classList.toggle("active", stage === "cgg");
    $("stage-id").classList.toggle("active", stage === "id");
    this.rangePanels.cgg.root.classList.toggle("hidden", stage !== "cgg");
    this.rangePanels.id.root.classList.toggle("hidden", stage !== "id");
    $("phig-row").classList.toggle("hidden", stage !== "id");
    $("btn-log").classList.toggle("hidden", stage !== "id");
    this.renderAll();
  }

  private async runGuarded(fn: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.setBusy(true);
    try {
      await fn();
      this.setStatus("");
    } catch (err) {
      this.setStatus(err instanceof ApiError
        ? `service error: ${err.message}`
        : String(err));
    } finally {
      this.busy = false;
      this.setBusy(false);
      this.renderAll();
    }
  }

  private setBusy(busy: boolean): void {
    for (const id of ["btn-extract", "btn-demo", "btn-reset"]) {
      $<HTMLButtonElement>(id).disabled = busy;
    }
    this.rangePanels[this.stage].setDisabled(busy);
  }

  private setStatus(text: string): void {
    $("status").textContent = text;
  }

  // Demo mode: the service simulates a hidden random device; the UI only
  // picks the random numbers, never evaluates the model.
  private async demoDevice(): Promise<void> {
    const params: Record<string, number> = {};
    for (const p of this.parameters) {
      if (p.stage !== this.stage) continue;
      params[p.name] =
        p.global_min + Math.random() * (p.global_max - p.global_min);
    }
    const payload: Record<string, unknown> = { stage: this.stage, params };
    if (this.stage === "id") {
      payload.phig = Number($<HTMLInputElement>("phig-entry").value);
    }
    const resp = await api.simulate(payload);
    this.target[this.stage] = resp.curve;
    this.lastFit[this.stage] = undefined;
  }

  private uploadCurve(input: HTMLInputElement): void {
    const file = input.files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      try {
        this.target[this.stage] = parseCurveCsv(text, this.stage);
        this.lastFit[this.stage] = undefined;
        this.setStatus("");
      } catch (err) {
        this.setStatus(`upload rejected: ${String(err)}`);
      }
      this.renderAll();
    });
  }

  private async extract(): Promise<void> {
    const target = this.target[this.stage];
    if (!target) throw new Error("no target curve: upload or use demo mode");
    const payload: Record<string, unknown> = {
      stage: this.stage,
      curve: target,
    };
    const constraints = buildConstraints(this.panels[this.stage]);
    if (constraints) payload.constraints = constraints;
    if (this.stage === "id") {
      payload.fixed_phig = Number($<HTMLInputElement>("phig-entry").value);
    }
    const resp = await api.extract(payload);
    this.lastFit[this.stage] = resp;
    this.history.add({
      timestamp: new Date().toISOString(),
      stage: this.stage,
      constraints: resp.constraints,
      rmse_percent: resp.rmse_percent,
      saturation: resp.saturation,
    });
    this.rangePanels[this.stage].showSaturation(resp.saturation);
  }

  private renderAll(): void {
    this.renderChart();
    this.renderBadgeAndParams();
    this.renderHistory();
  }

  private renderChart(): void {
    const canvas = $<HTMLCanvasElement>("chart");
    const target = this.target[this.stage];
    const fit = this.lastFit[this.stage];
    const series: Series[] = [];
    const useLog = this.stage === "id" && this.logView;
    const mapY = (v: number[]) => (useLog ? log10Floored(v) : v);
    const addCurve = (label: string, values: number[], color: string,
                      dashed: boolean) => {
      if (this.stage === "cgg") {
        series.push({ label, x: CGG_VG, y: mapY(values), color, dashed });
      } else {
        // two Vd blocks share the Vg axis
        series.push({ label: `${label} vd=0.05`, x: ID_VG,
                      y: mapY(values.slice(0, 8)), color, dashed });
        series.push({ label: `${label} vd=0.7`, x: ID_VG,
                      y: mapY(values.slice(8)), color, dashed });
      }
    };
    if (target) addCurve("target", target, COLORS.target, false);
    if (fit) addCurve("fit", fit.reconstructed_curve, COLORS.fit, true);
    const yLabel = this.stage === "cgg" ? "Cgg [F]"
      : useLog ? "log10 Id" : "Id [A]";
    drawChart(canvas, series, yLabel);
  }

  private renderBadgeAndParams(): void {
    const fit = this.lastFit[this.stage];
    const badge = $("rmse-badge");
    if (fit) {
      badge.textContent = `RMSE ${fit.rmse_percent.toFixed(2)}%`;
      badge.classList.remove("hidden");
    } else {
      badge.classList.add("hidden");
    }
    const tbl = $("params-out");
    tbl.innerHTML = "";
    if (!fit) return;
    for (const [name, value] of Object.entries(fit.params)) {
      const row = document.createElement("tr");
      const sat = fit.saturation[name];
      row.innerHTML = `<td>${name}</td><td>${value.toExponential(4)}</td>` +
        `<td>${sat === "none" ? "" : `⚠ ${sat}`}</td>`;
      tbl.appendChild(row);
    }
  }

  private renderHistory(): void {
    const tbl = $("history-out");
    tbl.innerHTML = "";
    this.history.list().forEach((a, i) => {
      const row = document.createElement("tr");
      const nCustom = Object.keys(a.constraints).filter((k) => {
        const p = this.parameters.find(
          (q) => q.name === k && q.stage === a.stage);
        return p && (a.constraints[k][0] !== p.global_min ||
                     a.constraints[k][1] !== p.global_max);
      }).length;
      const nSat = Object.values(a.saturation)
        .filter((f) => f !== "none").length;
      row.innerHTML =
        `<td>${i + 1}</td><td>${a.stage}</td>` +
        `<td>${a.rmse_percent.toFixed(2)}%</td>` +
        `<td>${nCustom} custom</td><td>${nSat ? `⚠ ${nSat}` : ""}</td>`;
      const btn = document.createElement("button");
      btn.textContent = "restore";
      btn.onclick = () => {
        if (a.stage !== this.stage) this.setStage(a.stage as Stage);
        applyConstraints(this.panels[this.stage],
                         this.history.constraintsOf(i));
        this.rangePanels[this.stage].refresh();
        this.rangePanels[this.stage].clearSaturation();
      };
      const cell = document.createElement("td");
      cell.appendChild(btn);
      row.appendChild(cell);
      tbl.appendChild(row);
    });
  }
}

new App().init().catch((err) => {
  document.body.textContent = `failed to reach service: ${String(err)}`;
});
