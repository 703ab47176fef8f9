"""Forward/inverse network cascade and constrained extraction.

The forward net maps (normalized parameters, scaled local ranges[, PHIG])
to the scaled curve. The inverse net maps (scaled curve, scaled ranges
[, PHIG]) to normalized parameters and is trained through the frozen
forward net with a curve-reconstruction loss only: the dataset's true
parameters are never used as supervision, which is what lets the cascade
pick one consistent solution out of many.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import neural, sampling
from .neural import (AdamState, MlpNetwork, TrainConfig, TrainReport,
                     adam_step, backward_pass, forward_pass, init_network)
from .sampling import (PHIG_SPEC, CURVE_KIND, CURVE_LEN, Dataset,
                       RangeConstraint, denormalize, global_constraints,
                       normalize_global, specs_for)
from .surrogate import CggParams, CurveVector, IdParams

HIDDEN_DIMS = (300, 300, 300)
SAT_LOW = 0.005
SAT_HIGH = 0.995
RMSE_FLOOR = {"cgg": 1e-18, "id": 1e-14}

SCALING_CONSTANTS = {"C_ref": 1e-16, "I_floor": 1e-14,
                     "id_log_offset": 14.0, "id_log_div": 12.0}


class CascadeError(ValueError):
    """Invalid cascade wiring or extraction request."""


def layout(stage):
    """(forward_in, curve_len, inverse_in, n_params) for a stage."""
    k = len(specs_for(stage))
    extra = 1 if stage == "id" else 0     # globally-scaled PHIG input
    curve = CURVE_LEN[stage]
    return (k + 2 * k + extra, curve, curve + 2 * k + extra, k)


def _net_metadata(stage, scheme):
    return {"stage": stage, "scheme": scheme,
            "parameter_order": [s.name for s in specs_for(stage)],
            "scaling_constants": dict(SCALING_CONSTANTS)}


def train_forward(stage, dataset: Dataset, config: TrainConfig,
                  hidden=HIDDEN_DIMS):
    """Supervised regression from the forward input layout to the scaled
    curve; returns the best-validation network."""
    if dataset.stage != stage:
        raise CascadeError(
            f"dataset stage {dataset.stage!r} does not match {stage!r}")
    fwd_in, curve_len, _, _ = layout(stage)
    x = dataset.forward_inputs()
    if x.shape[1] != fwd_in:
        raise CascadeError(f"forward input width {x.shape[1]} != {fwd_in}")
    net = init_network((fwd_in, *hidden, curve_len),
                       output_activation="linear", seed=config.seed,
                       metadata=_net_metadata(stage, dataset.scheme))
    report = neural.train(net, x, dataset.curves, config)
    return net, report


def train_inverse(forward_net: MlpNetwork, dataset: Dataset,
                  config: TrainConfig, hidden=HIDDEN_DIMS):
    """Train an inverse net through the frozen forward net.

    Loss is MSE between the cascade's reconstructed curve and the input
    curve; gradients flow through the frozen forward net into the inverse
    net only.
    """
    if not forward_net.frozen:
        raise CascadeError("forward network must be frozen before cascade "
                           "training (guards against silent co-training)")
    stage = dataset.stage
    if forward_net.metadata.get("stage") not in (None, stage):
        raise CascadeError("forward network stage does not match dataset")
    fwd_in, curve_len, inv_in, k = layout(stage)
    x_inv = dataset.inverse_inputs()          # (n, inv_in)
    aux = x_inv[:, curve_len:]                # ranges [+ phig], shared wiring
    curves = dataset.curves
    inv = init_network((inv_in, *hidden, k), output_activation="sigmoid",
                       seed=config.seed + 1,
                       metadata=_net_metadata(stage, dataset.scheme))

    t0 = time.perf_counter()
    tr, va = neural.split_train_val(x_inv.shape[0],
                                    config.validation_fraction, config.seed)
    state = AdamState.for_network(inv)
    report = TrainReport()
    lr = config.initial_lr
    best_w = inv.copy_weights()
    plateau_wait = 0
    stop_wait = 0

    def cascade_loss(idx, train_step=False):
        p_norm, inv_cache = forward_pass(inv, x_inv[idx])
        fwd_input = np.hstack([p_norm, aux[idx]])
        out, fwd_cache = forward_pass(forward_net, fwd_input)
        diff = out - curves[idx]
        loss = float(np.mean(diff * diff))
        if not train_step:
            return loss
        if not np.isfinite(loss):
            raise neural.TrainingError("non-finite cascade loss")
        g = 2.0 * diff / diff.size
        _, fwd_in_grad = backward_pass(forward_net, fwd_cache, g)
        (wg, bg), _ = backward_pass(inv, inv_cache, fwd_in_grad[:, :k])
        adam_step(inv, state, wg, bg, lr)
        return loss

    for epoch in range(config.max_epochs):
        order = np.random.default_rng([config.seed, 1, epoch]).permutation(tr)
        ep_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            b = order[start:start + config.batch_size]
            ep_loss += cascade_loss(b, train_step=True) * len(b)
        report.train_mse.append(ep_loss / len(order))
        v = cascade_loss(va)
        report.val_mse.append(v)
        report.lr.append(lr)
        if v < report.best_val_mse * (1.0 - config.plateau_min_delta):
            plateau_wait = 0
            stop_wait = 0
        else:
            plateau_wait += 1
            stop_wait += 1
        if v < report.best_val_mse:
            report.best_val_mse = v
            report.best_epoch = epoch
            best_w = inv.copy_weights()
        if plateau_wait >= config.plateau_patience:
            lr *= config.plateau_factor
            plateau_wait = 0
        if lr < config.min_lr or stop_wait >= config.early_stop_patience:
            break
    inv.set_weights(*best_w)
    report.wall_time = time.perf_counter() - t0
    return inv, report


# ---------------------------------------------------------------------------
# extraction

@dataclass
class ExtractionRequest:
    stage: str
    curve: np.ndarray                    # physical units on canonical grid
    constraints: list | None = None      # RangeConstraint per parameter
    fixed_phig: float | None = None      # Id stage only

    def __post_init__(self):
        self.curve = np.asarray(self.curve, dtype=float)
        specs = specs_for(self.stage)
        if self.curve.shape != (CURVE_LEN[self.stage],):
            raise CascadeError(
                f"{self.stage} curve must have {CURVE_LEN[self.stage]} points")
        if self.constraints is None:
            self.constraints = global_constraints(self.stage)
        if len(self.constraints) != len(specs):
            raise CascadeError("one constraint required per parameter")
        for s, c in zip(specs, self.constraints):
            if c.local_min < s.global_min or c.local_max > s.global_max:
                raise CascadeError(
                    f"constraint for {s.name} outside global range "
                    f"[{s.global_min}, {s.global_max}]")
        if self.stage == "id":
            if self.fixed_phig is None:
                raise CascadeError("id-stage extraction requires fixed_phig")
            if not (PHIG_SPEC.global_min <= self.fixed_phig
                    <= PHIG_SPEC.global_max):
                raise CascadeError("constraint for PHIG outside global range")


@dataclass
class ExtractionResult:
    stage: str
    params: dict                     # name -> physical value
    normalized_outputs: np.ndarray   # raw sigmoid values
    saturation: dict                 # name -> "low" | "high" | "none"
    reconstructed_curve: np.ndarray  # physical units
    rmse_percent: float
    constraints: dict                # name -> [min, max]
    provenance: str | None = None

    def to_dict(self):
        return {"stage": self.stage, "params": self.params,
                "normalized_outputs": self.normalized_outputs.tolist(),
                "saturation": self.saturation,
                "reconstructed_curve": self.reconstructed_curve.tolist(),
                "rmse_percent": self.rmse_percent,
                "constraints": self.constraints,
                "provenance": self.provenance}


def rmse_percent(fit_curve, target_curve, stage):
    """Relative RMSE in percent over the canonical grid, with a per-kind
    floor on the denominator."""
    fit = np.asarray(fit_curve, dtype=float)
    tgt = np.asarray(target_curve, dtype=float)
    if fit.shape != tgt.shape:
        raise CascadeError("curve length mismatch")
    floor = RMSE_FLOOR[stage]
    rel = (fit - tgt) / np.maximum(np.abs(tgt), floor)
    return 100.0 * float(np.sqrt(np.mean(rel * rel)))


def _scaled_constraint_vector(constraints, specs):
    out = np.empty(2 * len(specs))
    for j, (s, c) in enumerate(zip(specs, constraints)):
        out[2 * j] = (c.local_min - s.global_min) / s.span
        out[2 * j + 1] = (c.local_max - s.global_min) / s.span
    return out


def extract(req: ExtractionRequest, inverse_net: MlpNetwork,
            simulator) -> ExtractionResult:
    """Run the inverse net under the request's constraints, denormalize,
    re-simulate and score the fit."""
    stage = req.stage
    specs = specs_for(stage)
    order = inverse_net.metadata.get("parameter_order")
    if order is not None and list(order) != [s.name for s in specs]:
        raise CascadeError("inverse net parameter order does not match the "
                           "current registry")
    measured = CurveVector(CURVE_KIND[stage], req.curve)
    parts = [measured.scaled, _scaled_constraint_vector(req.constraints, specs)]
    if stage == "id":
        parts.append([normalize_global(req.fixed_phig, PHIG_SPEC)])
    x = np.concatenate(parts)
    p_norm, _ = forward_pass(inverse_net, x)

    params = {}
    saturation = {}
    for s, c, v in zip(specs, req.constraints, p_norm):
        params[s.name] = denormalize(float(v), c)
        if c.span > 0 and v < SAT_LOW:
            saturation[s.name] = "low"
        elif c.span > 0 and v > SAT_HIGH:
            saturation[s.name] = "high"
        else:
            saturation[s.name] = "none"

    vec = np.array([params[s.name] for s in specs])
    if stage == "cgg":
        recon = simulator.simulate_cgg(CggParams.from_array(vec))
    else:
        recon = simulator.simulate_id(IdParams.from_array(vec, req.fixed_phig))
    return ExtractionResult(
        stage=stage, params=params, normalized_outputs=np.asarray(p_norm),
        saturation=saturation, reconstructed_curve=recon.values,
        rmse_percent=rmse_percent(recon.values, req.curve, stage),
        constraints={s.name: [c.local_min, c.local_max]
                     for s, c in zip(specs, req.constraints)})


def two_stage_extract(cgg_curve, id_curve, cgg_constraints, id_constraints,
                      cgg_inverse, id_inverse, simulator, phig_offset=0.0):
    """Cgg extraction first, then Id extraction with the extracted PHIG
    pinned. phig_offset is a test hook that corrupts the handoff."""
    cgg_req = ExtractionRequest("cgg", cgg_curve, cgg_constraints)
    cgg_res = extract(cgg_req, cgg_inverse, simulator)
    phig = cgg_res.params["PHIG"] + phig_offset
    phig = min(max(phig, PHIG_SPEC.global_min), PHIG_SPEC.global_max)
    id_req = ExtractionRequest("id", id_curve, id_constraints,
                               fixed_phig=phig)
    id_res = extract(id_req, id_inverse, simulator)
    h = hashlib.sha256()
    h.update(np.asarray(cgg_curve, dtype=float).tobytes())
    h.update(np.asarray(id_curve, dtype=float).tobytes())
    h.update(json.dumps(cgg_res.constraints, sort_keys=True).encode())
    h.update(json.dumps(id_res.constraints, sort_keys=True).encode())
    prov = h.hexdigest()[:16]
    cgg_res.provenance = prov
    id_res.provenance = prov
    return cgg_res, id_res
