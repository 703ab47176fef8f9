// Append-only attempt history, client-side only: it survives re-renders but
// deliberately not a page reload.

export type Attempt = {
  timestamp: string;
  stage: string;
  constraints: Record<string, [number, number]>;
  rmse_percent: number;
  saturation: Record<string, string>;
};

export class AttemptHistory {
  private attempts: Attempt[] = [];

  add(attempt: Attempt): void {
    this.attempts.push(attempt);
  }

  get length(): number {
    return this.attempts.length;
  }

  list(): readonly Attempt[] {
    return this.attempts;
  }

  // Deep copy so restoring an attempt can never be corrupted by later edits.
  constraintsOf(index: number): Record<string, [number, number]> {
    const a = this.attempts[index];
    if (!a) throw new RangeError(`no attempt ${index}`);
    const out: Record<string, [number, number]> = {};
    for (const [k, v] of Object.entries(a.constraints)) out[k] = [v[0], v[1]];
    return out;
  }
}
