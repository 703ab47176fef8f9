// Canvas curve overlays. Pure mapping helpers are exported separately so
// they can be unit tested without a DOM.

export const I_FLOOR = 1e-14;

export const CGG_VG = Array.from({ length: 15 }, (_, i) => -0.7 + 0.1 * i);
export const ID_VG = Array.from({ length: 8 }, (_, i) => 0.1 * i);

export type Series = {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
};

export function log10Floored(values: number[]): number[] {
  return values.map((v) => Math.log10(Math.max(v, I_FLOOR)));
}

export type Extent = { min: number; max: number };

export function extent(series: Series[], axis: "x" | "y"): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const s of series) {
    for (const v of s[axis]) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (!Number.isFinite(min)) return { min: 0, max: 1 };
  if (min === max) {
    // degenerate span: pad so the flat line sits mid-plot
    return { min: min - 0.5, max: max + 0.5 };
  }
  return { min, max };
}

export function toPixel(v: number, e: Extent, size: number,
                        flip = false): number {
  const t = (v - e.min) / (e.max - e.min);
  return flip ? size * (1 - t) : size * t;
}

const PAD = { left: 54, right: 12, top: 10, bottom: 26 };

export function drawChart(canvas: HTMLCanvasElement, series: Series[],
                          yLabel: string): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width - PAD.left - PAD.right;
  const h = canvas.height - PAD.top - PAD.bottom;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const ex = extent(series, "x");
  const ey = extent(series, "y");

  ctx.save();
  ctx.translate(PAD.left, PAD.top);
  ctx.strokeStyle = "#445";
  ctx.strokeRect(0, 0, w, h);

  ctx.fillStyle = "#99a";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const yv = ey.min + ((ey.max - ey.min) * i) / 4;
    const py = toPixel(yv, ey, h, true);
    ctx.fillText(yv.toExponential(1), -50, py + 3);
    const xv = ex.min + ((ex.max - ex.min) * i) / 4;
    ctx.fillText(xv.toFixed(2), toPixel(xv, ex, w) - 10, h + 16);
  }
  ctx.fillText(yLabel, 4, 12);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    s.x.forEach((xv, i) => {
      const px = toPixel(xv, ex, w);
      const py = toPixel(s.y[i], ey, h, true);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  ctx.restore();
}
