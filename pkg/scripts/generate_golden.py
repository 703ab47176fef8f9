"""Regenerate surrogate_golden.csv at the repository root.

The file pins simulator outputs for a deterministic set of parameter draws
so an independent implementation can be checked bit-for-bit:

    python3 scripts/generate_golden.py
"""
import csv
from pathlib import Path

import numpy as np

from floatnorm.sampling import CGG_SPECS, ID_SPECS, sample_params
from floatnorm.surrogate import CggParams, IdParams, Simulator

OUT = Path(__file__).resolve().parent.parent / "surrogate_golden.csv"
N_PER_STAGE = 8
SEED = 20260823

CGG_NAMES = [s.name for s in CGG_SPECS]
ID_NAMES = [s.name for s in ID_SPECS]


def main():
    rng = np.random.default_rng(SEED)
    sim = Simulator()
    cols = ["stage"] + CGG_NAMES + ID_NAMES + [f"v{i}" for i in range(16)]
    rows = []
    # mid-range pinned rows first, then random draws
    cgg_vecs = [np.array([4.5, 1e-10, 1e-9, 0.0, 1.0, 1e-10])]
    cgg_vecs += [sample_params(CGG_SPECS, rng) for _ in range(N_PER_STAGE - 1)]
    for vec in cgg_vecs:
        curve = sim.simulate_cgg(CggParams.from_array(vec))
        row = {"stage": "cgg"}
        row.update(zip(CGG_NAMES, (repr(float(v)) for v in vec)))
        row.update((f"v{i}", repr(float(v)))
                   for i, v in enumerate(curve.values))
        rows.append(row)
    id_vecs = [(np.array([5e-3, 2.75e-2, 1.5, 3.0, 3.0, 0.35, 1e5, 5.0,
                          175.0, 6.5e-2, 6.0]), 4.5)]
    id_vecs += [(sample_params(ID_SPECS, rng), float(rng.uniform(4.2, 4.8)))
                for _ in range(N_PER_STAGE - 1)]
    for vec, phig in id_vecs:
        curve = sim.simulate_id(IdParams.from_array(vec, phig))
        row = {"stage": "id", "PHIG": repr(phig)}
        row.update(zip(ID_NAMES, (repr(float(v)) for v in vec)))
        row.update((f"v{i}", repr(float(v)))
                   for i, v in enumerate(curve.values))
        rows.append(row)
    with open(OUT, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=cols, restval="")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {OUT} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
