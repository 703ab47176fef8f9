"""Reproducible studies: data-requirement convergence, multi-range
extraction tables, derivative overlays, and report emission."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import cascade, neural, sampling
from .cascade import two_stage_extract
from .neural import TrainConfig, forward_pass
from .sampling import Dataset, RangeConstraint, global_constraints, specs_for
from .surrogate import IdParams, Simulator, simulate_id_vd


class ExperimentError(ValueError):
    """Invalid study configuration or request."""


@dataclass
class ConvergenceRow:
    scheme: str
    n_train: int
    seed: int
    val_mse: float
    wall_time: float

    def to_dict(self):
        return {"scheme": self.scheme, "n_train": self.n_train,
                "seed": self.seed, "val_mse": self.val_mse,
                "wall_time": self.wall_time}


@dataclass
class StudyRow:
    label: str
    constraints: dict           # stage -> {name: [min, max]}
    params: dict                # stage -> {name: value}
    rmse_percent: dict          # stage -> float
    saturation: dict            # stage -> {name: flag}

    def to_dict(self):
        return {"label": self.label, "constraints": self.constraints,
                "params": self.params, "rmse_percent": self.rmse_percent,
                "saturation": self.saturation}


def evaluate_forward(net, dataset: Dataset) -> float:
    """Validation MSE of a forward net on a dataset of its own scheme.

    Fixed- and custom-scheme inputs happen to share dimensions (the range
    columns are simply constant under the fixed scheme), so an accidental
    cross-evaluation would run silently; reject it instead.
    """
    net_scheme = net.metadata.get("scheme")
    if net_scheme is not None and net_scheme != dataset.scheme:
        raise ExperimentError(
            f"cannot evaluate a {net_scheme}-scheme net on "
            f"{dataset.scheme}-scheme data")
    out, _ = forward_pass(net, dataset.forward_inputs())
    return neural.mse(out, dataset.curves)


def convergence_study(stage, sample_counts, seeds, config: TrainConfig,
                      n_val=2000, p_fixed=0.1, hidden=cascade.HIDDEN_DIMS,
                      target_mse=None, simulator=None):
    """Train forward nets over a sample-count ladder for both schemes and
    report the sample count each scheme needs to reach a target MSE.

    Returns (rows, summary). Each (scheme, n, seed) failure is recorded in
    the row with val_mse = nan; the study continues.
    """
    counts = list(sample_counts)
    if counts != sorted(counts):
        raise ExperimentError("sample_counts must be ascending")
    if len(seeds) < 1:
        raise ExperimentError("at least one seed required")
    simulator = simulator or Simulator()
    rows = []
    medians = {}
    for scheme in ("fixed", "custom"):
        # common validation set per scheme, disjoint seed namespace
        val_ds = sampling.build_dataset(stage, scheme, n_val, seed=987654,
                                        simulator=simulator, p_fixed=p_fixed)
        per_n = []
        for n in counts:
            cell = []
            for seed in seeds:
                cfg = TrainConfig(**{**config.__dict__, "seed": seed})
                try:
                    ds = sampling.build_dataset(stage, scheme, n, seed=seed,
                                                simulator=simulator,
                                                p_fixed=p_fixed)
                    net, report = cascade.train_forward(stage, ds, cfg,
                                                        hidden=hidden)
                    v = evaluate_forward(net, val_ds)
                    wall = report.wall_time
                except Exception:
                    v, wall = float("nan"), 0.0
                rows.append(ConvergenceRow(scheme, n, seed, v, wall))
                cell.append(v)
            per_n.append(float(np.nanmedian(cell)))
        medians[scheme] = per_n

    if target_mse is None:
        # worst scheme's best median, so both schemes can reach it
        target_mse = max(min(medians["fixed"]), min(medians["custom"]))
    crossings = {s: crossing_count(counts, medians[s], target_mse)
                 for s in ("fixed", "custom")}
    ratio = (crossings["custom"] / crossings["fixed"]
             if crossings["fixed"] else float("nan"))
    summary = {"target_mse": target_mse, "medians": medians,
               "crossing": crossings, "custom_over_fixed_ratio": ratio,
               "sample_counts": counts, "seeds": list(seeds)}
    return rows, summary


def crossing_count(counts, median_mse, target):
    """Interpolated sample count at which the median MSE first reaches the
    target, using log-log linear interpolation between ladder points."""
    for i, m in enumerate(median_mse):
        if m <= target:
            if i == 0:
                return float(counts[0])
            n0, n1 = counts[i - 1], counts[i]
            m0, m1 = median_mse[i - 1], median_mse[i]
            if not (m0 > target >= m1) or m0 <= 0 or m1 <= 0:
                return float(n1)
            t = (np.log(m0) - np.log(target)) / (np.log(m0) - np.log(m1))
            return float(np.exp(np.log(n0) + t * (np.log(n1) - np.log(n0))))
    return float(counts[-1])    # never reached; report the ladder top


def random_subrange_constraints(stage, rng, width=0.5):
    """Random feasible sub-range per parameter: a window of the given
    relative width placed uniformly inside the global range."""
    out = []
    for s in specs_for(stage):
        w = width * s.span
        lo = rng.uniform(s.global_min, s.global_max - w)
        out.append(RangeConstraint(lo, lo + w))
    return out


def multi_range_study(cgg_curve, id_curve, constraint_sets, cgg_inverse,
                      id_inverse, simulator):
    """Run two-stage extraction for each labelled constraint set.

    constraint_sets: list of (label, cgg_constraints, id_constraints);
    None constraints mean global ranges.
    """
    rows = []
    for label, cgg_c, id_c in constraint_sets:
        cgg_res, id_res = two_stage_extract(
            cgg_curve, id_curve, cgg_c, id_c, cgg_inverse, id_inverse,
            simulator)
        rows.append(StudyRow(
            label=label,
            constraints={"cgg": cgg_res.constraints, "id": id_res.constraints},
            params={"cgg": cgg_res.params, "id": id_res.params},
            rmse_percent={"cgg": cgg_res.rmse_percent,
                          "id": id_res.rmse_percent},
            saturation={"cgg": cgg_res.saturation, "id": id_res.saturation}))
    return rows


def derivative_report(target_params: IdParams, fit_params: IdParams = None,
                      vg_list=(0.2, 0.4, 0.7), n_dense=57):
    """Finite-difference transconductance and output-conductance overlays.

    Returns {"gm": {vd: (vg, target, fit)}, "gd": {vg: (vd, target, fit)}}
    using central differences with h = half the canonical grid step.
    """
    fit_params = fit_params or target_params
    h = 0.05
    vg_dense = np.linspace(0.0, 0.7, n_dense)
    vd_dense = np.linspace(0.05, 0.7, n_dense)

    def gm(p, vd):
        up = simulate_id_vd(p, vg_dense + h, [vd])[:, 0]
        dn = simulate_id_vd(p, vg_dense - h, [vd])[:, 0]
        return (up - dn) / (2 * h)

    def gd(p, vg):
        up = simulate_id_vd(p, [vg], vd_dense + h)[0]
        dn = simulate_id_vd(p, [vg], vd_dense - h)[0]
        return (up - dn) / (2 * h)

    report = {"gm": {}, "gd": {}}
    for vd in (0.05, 0.7):
        report["gm"][vd] = (vg_dense, gm(target_params, vd),
                            gm(fit_params, vd))
    for vg in vg_list:
        report["gd"][vg] = (vd_dense, gd(target_params, vg),
                            gd(fit_params, vg))
    return report


def write_derivative_report(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for kind, bias_key in (("gm", "vd"), ("gd", "vg")):
        for bias, (x, tgt, fit) in report[kind].items():
            path = os.path.join(out_dir, f"{kind}_{bias_key}_{bias}.csv")
            with open(path, "w", newline="") as f:
                w = csv.writer(f)
                w.writerow(["bias", "target_derivative", "fit_derivative"])
                for xi, ti, fi in zip(x, tgt, fit):
                    w.writerow([repr(float(xi)), repr(float(ti)),
                                repr(float(fi))])
            paths.append(path)
    return paths


def file_content_hash(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def emit_report(rows, path, metadata=None):
    """Write study rows as CSV plus a JSON sidecar with run metadata."""
    rows = [r.to_dict() if hasattr(r, "to_dict") else dict(r) for r in rows]
    if not rows:
        raise ExperimentError("no rows to emit")
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    cols = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for r in rows:
            w.writerow([v if isinstance(v, str) else json.dumps(v)
                        for v in (r[c] for c in cols)])
    meta = dict(metadata or {})
    meta["config_hash"] = hashlib.sha256(
        json.dumps(meta, sort_keys=True, default=str).encode()).hexdigest()[:16]
    with open(path + ".meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    return path


def read_report(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        cols = next(reader)
        out = []
        for row in reader:
            rec = {}
            for c, v in zip(cols, row):
                try:
                    rec[c] = json.loads(v)
                except (json.JSONDecodeError, ValueError):
                    rec[c] = v
            out.append(rec)
    return out
