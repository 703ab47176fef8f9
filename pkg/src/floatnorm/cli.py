"""Command-line interface.

Exit codes: 0 success, 2 usage errors (bad/contradictory flags), 1 domain
errors. Domain errors print a machine-readable JSON object on stderr.
All randomness is driven by explicit --seed flags or config values.
"""
from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

from . import cascade, experiments, neural, sampling
from .cascade import ExtractionRequest
from .neural import TrainConfig
from .sampling import (PHIG_SPEC, RangeConstraint, global_constraints,
                       specs_for)
from .surrogate import BiasGrid, CggParams, IdParams, Simulator


class CliError(click.ClickException):
    exit_code = 1

    def __init__(self, message, **extra):
        super().__init__(message)
        self.extra = extra

    def show(self, file=None):
        payload = {"error": self.message}
        payload.update(self.extra)
        print(json.dumps(payload), file=sys.stderr)


def _domain(fn):
    """Convert library errors into exit-1 JSON errors."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, RuntimeError, OSError) as exc:
            raise CliError(str(exc), type=type(exc).__name__)
    return wrapper


# ---------------------------------------------------------------------------
# curve CSV helpers (also the UI's upload format)

def write_curve_csv(path, stage, values):
    grid = BiasGrid()
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["vg", "vd", "value"])
        if stage == "cgg":
            for vg, v in zip(grid.cgg_vg, values):
                w.writerow([repr(float(vg)), "", repr(float(v))])
        else:
            biases = [(vg, vd) for vd in grid.id_vd_conditions
                      for vg in grid.id_vg]
            for (vg, vd), v in zip(biases, values):
                w.writerow([repr(float(vg)), repr(float(vd)), repr(float(v))])


def read_curve_csv(path, stage):
    values = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["vg", "vd", "value"]:
            raise sampling.DatasetFormatError(
                f"{path}: expected header vg,vd,value")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise sampling.DatasetFormatError(
                    f"{path}: line {lineno}: expected 3 fields")
            try:
                values.append(float(row[2]))
            except ValueError as exc:
                raise sampling.DatasetFormatError(
                    f"{path}: line {lineno}: {exc}")
    expected = sampling.CURVE_LEN[stage]
    if len(values) != expected:
        raise sampling.DatasetFormatError(
            f"{path}: {stage} curve needs {expected} points, got {len(values)}")
    return np.array(values)


def read_ranges_json(path, stage):
    """{name: [min, max]} JSON; unnamed parameters default to global."""
    with open(path) as f:
        doc = json.load(f)
    specs = specs_for(stage)
    known = {s.name for s in specs}
    unknown = set(doc) - known
    if unknown:
        raise sampling.SamplingError(
            f"{path}: unknown parameter(s) {sorted(unknown)}")
    out = []
    for s in specs:
        if s.name in doc:
            lo, hi = doc[s.name]
            out.append(RangeConstraint(float(lo), float(hi)))
        else:
            out.append(RangeConstraint(s.global_min, s.global_max))
    return out


def _load_train_config(path):
    if path is None:
        return TrainConfig(), cascade.HIDDEN_DIMS
    with open(path) as f:
        doc = json.load(f)
    hidden = tuple(doc.pop("hidden", cascade.HIDDEN_DIMS))
    allowed = set(TrainConfig.__dataclass_fields__)
    unknown = set(doc) - allowed
    if unknown:
        raise neural.NeuralError(
            f"{path}: unknown config key(s) {sorted(unknown)}")
    return TrainConfig(**doc), hidden


@click.group()
def main():
    """Floating-normalization parameter extraction toolkit."""


@main.command("gen-data")
@click.option("--stage", type=click.Choice(["cgg", "id"]), required=True)
@click.option("--scheme", type=click.Choice(["fixed", "custom"]),
              required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--p-fixed", type=float, default=0.1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@_domain
def gen_data(stage, scheme, n, seed, p_fixed, out):
    """Simulate a training dataset and write it as CSV + metadata sidecar."""
    ds = sampling.build_dataset(stage, scheme, n, seed, p_fixed=p_fixed)
    sampling.write_dataset(ds, out)
    click.echo(f"wrote {ds.n} {stage}/{scheme} samples to {out}")


@main.command("augment")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--p-fixed", type=float, default=0.1, show_default=True)
@click.option("--keep-global/--no-keep-global", default=False,
              show_default=True,
              help="append one copy pinned at the global ranges so the "
                   "plain training range stays in-distribution")
@click.option("--out", type=click.Path(), required=True)
@_domain
def augment(in_path, k, seed, p_fixed, keep_global, out):
    """Expand a fixed-scheme dataset with fresh local ranges (no new
    simulations)."""
    ds = sampling.read_dataset(in_path)
    aug = sampling.augment_with_ranges(ds, k, seed, p_fixed=p_fixed)
    if keep_global:
        glob = sampling.augment_with_ranges(ds, 1, seed, force_global=True)
        aug = sampling.concat_datasets([aug, glob])
    sampling.write_dataset(aug, out)
    click.echo(f"wrote {aug.n} augmented samples to {out}")


@main.command("train-forward")
@click.option("--stage", type=click.Choice(["cgg", "id"]), required=True)
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True)
@_domain
def train_forward(stage, data, config_path, out):
    """Train a forward net (inputs -> scaled curve)."""
    ds = sampling.read_dataset(data)
    cfg, hidden = _load_train_config(config_path)
    net, report = cascade.train_forward(stage, ds, cfg, hidden=hidden)
    neural.save_model(net, out)
    click.echo(f"best val MSE {report.best_val_mse:.3e} "
               f"(epoch {report.best_epoch}); model -> {out}")


@main.command("train-inverse")
@click.option("--stage", type=click.Choice(["cgg", "id"]), required=True)
@click.option("--forward", "forward_path", type=click.Path(exists=True),
              required=True)
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True)
@_domain
def train_inverse(stage, forward_path, data, config_path, out):
    """Train an inverse net through the frozen forward net."""
    ds = sampling.read_dataset(data)
    cfg, hidden = _load_train_config(config_path)
    fwd = neural.load_model(forward_path)
    fwd.frozen = True
    inv, report = cascade.train_inverse(fwd, ds, cfg, hidden=hidden)
    neural.save_model(inv, out)
    click.echo(f"best cascade val MSE {report.best_val_mse:.3e} "
               f"(epoch {report.best_epoch}); model -> {out}")


@main.command("extract")
@click.option("--stage", type=click.Choice(["cgg", "id"]), required=True)
@click.option("--inverse", "inverse_path", type=click.Path(exists=True),
              required=True)
@click.option("--curve", "curve_path", type=click.Path(exists=True),
              required=True)
@click.option("--ranges", "ranges_path", type=click.Path(exists=True))
@click.option("--fixed-phig", type=float)
@click.option("--out", type=click.Path(), required=True)
@_domain
def extract_cmd(stage, inverse_path, curve_path, ranges_path, fixed_phig, out):
    """Extract parameters from a measured curve under optional constraints."""
    inv = neural.load_model(inverse_path)
    curve = read_curve_csv(curve_path, stage)
    constraints = (read_ranges_json(ranges_path, stage)
                   if ranges_path else None)
    req = ExtractionRequest(stage, curve, constraints, fixed_phig=fixed_phig)
    res = cascade.extract(req, inv, Simulator())
    with open(out, "w") as f:
        json.dump(res.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    click.echo(f"rmse {res.rmse_percent:.3f}% -> {out}")


@main.command("simulate")
@click.option("--stage", type=click.Choice(["cgg", "id"]), required=True)
@click.option("--params", "params_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), required=True)
@_domain
def simulate_cmd(stage, params_path, out):
    """Evaluate the built-in surrogate device and write a curve CSV."""
    with open(params_path) as f:
        doc = json.load(f)
    sim = Simulator()
    if stage == "cgg":
        curve = sim.simulate_cgg(CggParams(**doc))
    else:
        curve = sim.simulate_id(IdParams(**doc))
    write_curve_csv(out, stage, curve.values)
    click.echo(f"wrote {stage} curve to {out}")


@main.group()
def study():
    """Reproducible studies."""


_CONV_KEYS = {"stage", "sample_counts", "seeds", "n_val", "p_fixed",
              "hidden", "target_mse", "train"}


@study.command("convergence")
@click.option("--config", "config_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_domain
def study_convergence(config_path, out_dir):
    """Fixed-vs-custom data-requirement study for forward nets."""
    with open(config_path) as f:
        doc = json.load(f)
    unknown = set(doc) - _CONV_KEYS
    if unknown:
        raise experiments.ExperimentError(
            f"unknown config key(s) {sorted(unknown)}")
    cfg = TrainConfig(**doc.get("train", {}))
    rows, summary = experiments.convergence_study(
        doc["stage"], doc["sample_counts"], doc["seeds"], cfg,
        n_val=doc.get("n_val", 2000), p_fixed=doc.get("p_fixed", 0.1),
        hidden=tuple(doc.get("hidden", cascade.HIDDEN_DIMS)),
        target_mse=doc.get("target_mse"))
    os.makedirs(out_dir, exist_ok=True)
    experiments.emit_report(rows, os.path.join(out_dir, "convergence.csv"),
                            metadata={"config": doc})
    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    click.echo(f"custom/fixed ratio: {summary['custom_over_fixed_ratio']:.2f}")


_MULTI_KEYS = {"cgg_model", "id_model", "device_seed", "phig_true",
               "n_random_sets", "subrange_width", "seed"}


@study.command("multirange")
@click.option("--config", "config_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_domain
def study_multirange(config_path, out_dir):
    """Multi-solution extraction table (global row, random sub-ranges, one
    deliberately infeasible row)."""
    with open(config_path) as f:
        doc = json.load(f)
    unknown = set(doc) - _MULTI_KEYS
    if unknown:
        raise experiments.ExperimentError(
            f"unknown config key(s) {sorted(unknown)}")
    sim = Simulator()
    rng = np.random.default_rng(doc.get("device_seed", 0))
    cgg_vec = sampling.sample_params(sampling.CGG_SPECS, rng)
    id_vec = sampling.sample_params(sampling.ID_SPECS, rng)
    phig_true = doc.get("phig_true")
    if phig_true is not None:
        cgg_vec[0] = phig_true
    cgg_curve = sim.simulate_cgg(CggParams.from_array(cgg_vec)).values
    id_curve = sim.simulate_id(
        IdParams.from_array(id_vec, cgg_vec[0])).values
    cgg_inv = neural.load_model(doc["cgg_model"])
    id_inv = neural.load_model(doc["id_model"])

    sets = [("PS1-global", None, None)]
    srng = np.random.default_rng(doc.get("seed", 0))
    for i in range(doc.get("n_random_sets", 2)):
        sets.append((f"PS{i+2}-subrange",
                     experiments.random_subrange_constraints(
                         "cgg", srng, doc.get("subrange_width", 0.5)),
                     experiments.random_subrange_constraints(
                         "id", srng, doc.get("subrange_width", 0.5))))
    # infeasible analog: pin PHIG's window away from the device's true value
    infeasible = global_constraints("cgg")
    infeasible[0] = RangeConstraint(4.7, 4.8)
    sets.append(("PS-infeasible", infeasible, None))

    rows = experiments.multi_range_study(cgg_curve, id_curve, sets, cgg_inv,
                                         id_inv, sim)
    os.makedirs(out_dir, exist_ok=True)
    experiments.emit_report(
        rows, os.path.join(out_dir, "multirange.csv"),
        metadata={"config": doc,
                  "true_params": {"cgg": cgg_vec.tolist(),
                                  "id": id_vec.tolist()},
                  "model_hashes": {
                      "cgg": experiments.file_content_hash(doc["cgg_model"]),
                      "id": experiments.file_content_hash(doc["id_model"])}})
    for r in rows:
        click.echo(f"{r.label}: cgg {r.rmse_percent['cgg']:.2f}% / "
                   f"id {r.rmse_percent['id']:.2f}%")


@main.command("serve")
@click.option("--models", "models_dir", type=click.Path(exists=True),
              envvar="FLOATNORM_MODELS", required=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True))
@_domain
def serve(models_dir, port, host, static_dir):
    """Serve the extraction HTTP API (and optionally the UI assets)."""
    import uvicorn

    from .server import create_app
    app = create_app(models_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
