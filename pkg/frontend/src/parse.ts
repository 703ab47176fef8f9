// Curve CSV upload parsing ("vg,vd,value" header, one row per grid point).

export const CURVE_LEN = { cgg: 15, id: 16 } as const;

export function parseCurveCsv(text: string, stage: "cgg" | "id"): number[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0 || lines[0].trim() !== "vg,vd,value") {
    throw new Error("expected header vg,vd,value");
  }
  const values: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== 3) {
      throw new Error(`line ${i + 1}: expected 3 columns`);
    }
    const v = Number(cells[2]);
    if (!Number.isFinite(v)) {
      throw new Error(`line ${i + 1}: bad value ${cells[2]!}`);
    }
    values.push(v);
  }
  const expected = CURVE_LEN[stage];
  if (values.length !== expected) {
    throw new Error(
      `${stage} curve needs ${expected} points, got ${values.length}`);
  }
  return values;
}
