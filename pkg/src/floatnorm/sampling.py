"""Parameter registry, random sampling, floating normalization, datasets.

Two normalization schemes:

* global (fixed-range): dataset-wide min-max scaling using the registry's
  global bounds;
* floating (custom-range): per-instance local [min, max] pairs that travel
  with each sample and become extra network inputs.

When every local range equals the global bounds the two schemes coincide
exactly.

Randomness: every draw comes from numpy's PCG64 via
``np.random.default_rng(seed_sequence)``. Per-sample generators are derived
from ``(seed, sample_index)`` (and ``(seed, i, j)`` during augmentation),
so dataset construction is order-independent and reproducible.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .surrogate import (CGG_PARAM_NAMES, ID_PARAM_NAMES, CggParams, IdParams,
                        Simulator)

FORMAT_VERSION = 1


class SamplingError(ValueError):
    """Invalid input to a sampling or normalization routine."""


class DatasetFormatError(ValueError):
    """Malformed or incompatible dataset file."""


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    global_min: float
    global_max: float
    units: str
    stage: str      # "cgg" or "id"
    index: int      # position in the canonical ordering of its stage

    def __post_init__(self):
        if not self.global_min < self.global_max:
            raise SamplingError(f"{self.name}: global_min must be < global_max")

    @property
    def span(self):
        return self.global_max - self.global_min


# Global training ranges. PHIG is shared: extracted in the Cgg stage, then
# carried as a fixed companion input in the Id stage.
CGG_SPECS = (
    ParameterSpec("PHIG", 4.2, 4.8, "eV", "cgg", 0),
    ParameterSpec("CFS", 5e-11, 5e-10, "F/m", "cgg", 1),
    ParameterSpec("EOT", 5e-10, 5e-9, "m", "cgg", 2),
    ParameterSpec("QMFACTOR", -10.0, 10.0, "", "cgg", 3),
    ParameterSpec("QMTCECV", 0.01, 2.0, "", "cgg", 4),
    ParameterSpec("CGSL", 5e-11, 5e-10, "F/m", "cgg", 5),
)
ID_SPECS = (
    ParameterSpec("CIT", 1e-4, 1e-2, "F/m^2", "id", 0),
    ParameterSpec("U0", 5e-3, 5e-2, "m^2/Vs", "id", 1),
    ParameterSpec("UA", 3e-2, 3.0, "1/V", "id", 2),
    ParameterSpec("EU", 1.0, 5.0, "", "id", 3),
    ParameterSpec("ETA0", 6e-2, 6.0, "", "id", 4),
    ParameterSpec("CDSCD", 7e-5, 7e-1, "F/m^2", "id", 5),
    ParameterSpec("VSAT", 5e4, 1.5e5, "m/s", "id", 6),
    ParameterSpec("KSATIV", 0.1, 10.0, "", "id", 7),
    ParameterSpec("RDSW", 50.0, 300.0, "ohm*um", "id", 8),
    ParameterSpec("PCLM", 1.3e-3, 1.3e-1, "1/V", "id", 9),
    ParameterSpec("MEXP", 2.01, 10.0, "", "id", 10),
)
PHIG_SPEC = CGG_SPECS[0]

STAGES = ("cgg", "id")
CURVE_LEN = {"cgg": 15, "id": 16}
CURVE_KIND = {"cgg": "Cgg", "id": "Id"}

assert tuple(s.name for s in CGG_SPECS) == CGG_PARAM_NAMES
assert tuple(s.name for s in ID_SPECS) == ID_PARAM_NAMES


def specs_for(stage: str):
    if stage == "cgg":
        return CGG_SPECS
    if stage == "id":
        return ID_SPECS
    raise SamplingError(f"unknown stage {stage!r}")


@dataclass(frozen=True)
class RangeConstraint:
    """Local [min, max] pair; equal endpoints pin the parameter."""
    local_min: float
    local_max: float

    def __post_init__(self):
        if not self.local_min <= self.local_max:
            raise SamplingError("local_min must be <= local_max")

    @property
    def span(self):
        return self.local_max - self.local_min


def global_constraints(stage: str):
    return [RangeConstraint(s.global_min, s.global_max) for s in specs_for(stage)]


# ---------------------------------------------------------------------------
# normalization

def normalize_floating(x, constraint, spec):
    """Map x into [0, 1] using the local range; 0.5 for degenerate ranges."""
    x = np.asarray(x, dtype=float)
    lo, hi = constraint.local_min, constraint.local_max
    if np.any(x < lo) or np.any(x > hi):
        raise SamplingError(
            f"{spec.name}: value outside local range [{lo}, {hi}]")
    if hi - lo < 1e-12 * spec.span:
        return np.full_like(x, 0.5) if x.ndim else 0.5
    out = (x - lo) / (hi - lo)
    return out if x.ndim else float(out)


def denormalize(x_norm, constraint):
    """Inverse of normalize_floating; constant for zero-span ranges."""
    x_norm = np.asarray(x_norm, dtype=float)
    if np.any(x_norm < 0.0) or np.any(x_norm > 1.0):
        raise SamplingError("normalized value outside [0, 1]")
    lo, hi = constraint.local_min, constraint.local_max
    if lo == hi:
        out = np.full_like(x_norm, lo)
    else:
        out = x_norm * (hi - lo) + lo
    return out if x_norm.ndim else float(out)


def denormalize_rows(x_norm, lo, hi):
    """Vectorized denormalize over per-row constraints; zero-span rows give
    exactly lo."""
    x_norm = np.asarray(x_norm, dtype=float)
    if np.any(x_norm < 0.0) or np.any(x_norm > 1.0):
        raise SamplingError("normalized value outside [0, 1]")
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return np.where(lo == hi, lo, x_norm * (hi - lo) + lo)


def normalize_global(x, spec):
    """Min-max scaling with the registry's global bounds."""
    x = np.asarray(x, dtype=float)
    if np.any(x < spec.global_min) or np.any(x > spec.global_max):
        raise SamplingError(
            f"{spec.name}: value outside global range "
            f"[{spec.global_min}, {spec.global_max}]")
    out = (x - spec.global_min) / spec.span
    return out if x.ndim else float(out)


def denormalize_global(x_norm, spec):
    x_norm = np.asarray(x_norm, dtype=float)
    out = x_norm * spec.span + spec.global_min
    return out if x_norm.ndim else float(out)


# ---------------------------------------------------------------------------
# sampling

def sample_params(specs, rng, log_uniform=False):
    """One uniform draw per spec, independent across parameters."""
    out = np.empty(len(specs))
    for i, s in enumerate(specs):
        if log_uniform and s.global_min > 0:
            out[i] = np.exp(rng.uniform(np.log(s.global_min),
                                        np.log(s.global_max)))
        else:
            out[i] = rng.uniform(s.global_min, s.global_max)
    return out


def sample_local_range(spec, x, rng, p_fixed=0.1):
    """Draw a local range containing x.

    With probability p_fixed the range collapses to (x, x), teaching the
    networks the pinned-parameter regime. Otherwise local_min ~
    U[global_min, x] and local_max ~ U[x, global_max], independently.
    Draw order is fixed (branch coin, then min, then max) for determinism.
    """
    if not spec.global_min <= x <= spec.global_max:
        raise SamplingError(f"{spec.name}: value {x} outside global range")
    if rng.uniform() < p_fixed:
        return RangeConstraint(x, x)
    lo = rng.uniform(spec.global_min, x)
    hi = rng.uniform(x, spec.global_max)
    return RangeConstraint(lo, hi)


# ---------------------------------------------------------------------------
# datasets

@dataclass
class TrainingSample:
    params: np.ndarray
    ranges: list
    normalized: np.ndarray
    curve_scaled: np.ndarray
    phig: float | None = None


@dataclass
class Dataset:
    """Columnar training set for one stage and scheme.

    curves are stored in network space (scaled); phig only for the Id stage.
    """
    stage: str
    scheme: str                 # "fixed" or "custom"
    params: np.ndarray          # (n, k) physical values
    lo: np.ndarray              # (n, k) local minima
    hi: np.ndarray              # (n, k) local maxima
    normalized: np.ndarray      # (n, k)
    curves: np.ndarray          # (n, curve_len) scaled
    phig: np.ndarray | None     # (n,) or None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise SamplingError(f"unknown stage {self.stage!r}")
        if self.scheme not in ("fixed", "custom"):
            raise SamplingError(f"unknown scheme {self.scheme!r}")
        if self.stage == "id" and self.phig is None:
            raise SamplingError("id-stage dataset requires phig values")

    @property
    def n(self):
        return self.params.shape[0]

    @property
    def specs(self):
        return specs_for(self.stage)

    def sample(self, i) -> TrainingSample:
        return TrainingSample(
            params=self.params[i],
            ranges=[RangeConstraint(lo, hi)
                    for lo, hi in zip(self.lo[i], self.hi[i])],
            normalized=self.normalized[i],
            curve_scaled=self.curves[i],
            phig=None if self.phig is None else float(self.phig[i]))

    def scaled_ranges(self):
        """(n, 2k) interleaved (lo_i, hi_i) pairs, globally scaled."""
        specs = self.specs
        out = np.empty((self.n, 2 * len(specs)))
        for j, s in enumerate(specs):
            out[:, 2 * j] = (self.lo[:, j] - s.global_min) / s.span
            out[:, 2 * j + 1] = (self.hi[:, j] - s.global_min) / s.span
        return out

    def forward_inputs(self):
        """Forward-net input matrix: normalized params ++ scaled ranges
        [++ scaled PHIG]. Length 18 for Cgg, 34 for Id."""
        cols = [self.normalized, self.scaled_ranges()]
        if self.stage == "id":
            cols.append(normalize_global(self.phig, PHIG_SPEC)[:, None])
        return np.hstack(cols)

    def inverse_inputs(self):
        """Inverse-net input matrix: scaled curve ++ scaled ranges
        [++ scaled PHIG]. Length 27 for Cgg, 39 for Id."""
        cols = [self.curves, self.scaled_ranges()]
        if self.stage == "id":
            cols.append(normalize_global(self.phig, PHIG_SPEC)[:, None])
        return np.hstack(cols)


def _normalize_rows(params, lo, hi, specs):
    n, k = params.shape
    out = np.empty((n, k))
    for j, s in enumerate(specs):
        span = hi[:, j] - lo[:, j]
        degen = span < 1e-12 * s.span
        with np.errstate(invalid="ignore", divide="ignore"):
            out[:, j] = np.where(degen, 0.5, (params[:, j] - lo[:, j]) / span)
    return out


def build_dataset(stage, scheme, n, seed, simulator=None, p_fixed=0.1,
                  log_uniform=False) -> Dataset:
    """Simulate n samples; custom scheme draws a local range per parameter."""
    if n < 1:
        raise SamplingError("n must be >= 1")
    simulator = simulator or Simulator()
    specs = specs_for(stage)
    k = len(specs)
    params = np.empty((n, k))
    lo = np.empty((n, k))
    hi = np.empty((n, k))
    curves = np.empty((n, CURVE_LEN[stage]))
    phig = np.empty(n) if stage == "id" else None

    for i in range(n):
        rng = np.random.default_rng([seed, i])
        x = sample_params(specs, rng, log_uniform=log_uniform)
        params[i] = x
        if scheme == "custom":
            for j, s in enumerate(specs):
                c = sample_local_range(s, x[j], rng, p_fixed=p_fixed)
                lo[i, j], hi[i, j] = c.local_min, c.local_max
        else:
            lo[i] = [s.global_min for s in specs]
            hi[i] = [s.global_max for s in specs]
        if stage == "id":
            phig[i] = rng.uniform(PHIG_SPEC.global_min, PHIG_SPEC.global_max)
        try:
            if stage == "cgg":
                curve = simulator.simulate_cgg(CggParams.from_array(x))
            else:
                curve = simulator.simulate_id(IdParams.from_array(x, phig[i]))
        except Exception as exc:
            raise SamplingError(f"simulator failed at sample {i}: {exc}") from exc
        curves[i] = curve.scaled

    normalized = _normalize_rows(params, lo, hi, specs)
    meta = {"format_version": FORMAT_VERSION, "stage": stage, "scheme": scheme,
            "n": n, "seed": seed, "p_fixed": p_fixed,
            "log_uniform": log_uniform}
    return Dataset(stage, scheme, params, lo, hi, normalized, curves, phig,
                   metadata=meta)


def augment_with_ranges(ds: Dataset, k, seed, p_fixed=0.1,
                        force_global=False) -> Dataset:
    """Expand a fixed-scheme dataset into k custom-scheme copies per sample
    by drawing new local ranges; curves are reused, never re-simulated.

    force_global is a test hook that pins every range at the global bounds.
    """
    if ds.scheme != "fixed":
        raise SamplingError("augmentation requires a fixed-scheme dataset")
    if k < 1:
        raise SamplingError("k must be >= 1")
    specs = ds.specs
    n = ds.n
    params = np.repeat(ds.params, k, axis=0)
    curves = np.repeat(ds.curves, k, axis=0)
    phig = None if ds.phig is None else np.repeat(ds.phig, k)
    lo = np.empty_like(params)
    hi = np.empty_like(params)
    for i in range(n):
        for j in range(k):
            row = i * k + j
            if force_global:
                lo[row] = [s.global_min for s in specs]
                hi[row] = [s.global_max for s in specs]
                continue
            rng = np.random.default_rng([seed, i, j])
            for m, s in enumerate(specs):
                c = sample_local_range(s, params[row, m], rng, p_fixed=p_fixed)
                lo[row, m], hi[row, m] = c.local_min, c.local_max
    normalized = _normalize_rows(params, lo, hi, specs)
    meta = dict(ds.metadata)
    meta.update({"scheme": "custom", "n": n * k, "augmented_from_n": n,
                 "augment_k": k, "augment_seed": seed, "p_fixed": p_fixed})
    return Dataset(ds.stage, "custom", params, lo, hi, normalized, curves,
                   phig, metadata=meta)


def concat_datasets(datasets) -> Dataset:
    """Stack custom-scheme datasets of the same stage row-wise.

    Used to mix randomly-augmented copies with a force_global copy so the
    plain global range stays in-distribution for the inverse net (it is,
    after all, the most common range a user will ask for).
    """
    datasets = list(datasets)
    if not datasets:
        raise SamplingError("nothing to concatenate")
    first = datasets[0]
    for ds in datasets[1:]:
        if ds.stage != first.stage:
            raise SamplingError("stage mismatch in concat")
        if ds.scheme != first.scheme:
            raise SamplingError("scheme mismatch in concat")
    phig = None
    if first.phig is not None:
        phig = np.concatenate([ds.phig for ds in datasets])
    meta = dict(first.metadata)
    meta.update({"n": sum(ds.n for ds in datasets),
                 "concatenated": [ds.metadata.get("n", ds.n)
                                  for ds in datasets]})
    return Dataset(first.stage, first.scheme,
                   np.concatenate([ds.params for ds in datasets]),
                   np.concatenate([ds.lo for ds in datasets]),
                   np.concatenate([ds.hi for ds in datasets]),
                   np.concatenate([ds.normalized for ds in datasets]),
                   np.concatenate([ds.curves for ds in datasets]),
                   phig, metadata=meta)


# ---------------------------------------------------------------------------
# persistence: CSV body + JSON metadata sidecar

def _fmt(v):
    # shortest round-trip decimal of a 64-bit float
    return repr(float(v))


def _header(stage):
    specs = specs_for(stage)
    cols = []
    for s in specs:
        cols.append(f"param_{s.name}")
    for s in specs:
        cols += [f"lo_{s.name}", f"hi_{s.name}"]
    for s in specs:
        cols.append(f"norm_{s.name}")
    if stage == "id":
        cols.append("phig")
    cols += [f"curve_{i:02d}" for i in range(CURVE_LEN[stage])]
    return cols


def sidecar_path(path):
    return os.fspath(path) + ".meta.json"


def write_dataset(ds: Dataset, path):
    path = os.fspath(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(_header(ds.stage))
        for i in range(ds.n):
            row = ([_fmt(v) for v in ds.params[i]]
                   + [x for lo, hi in zip(ds.lo[i], ds.hi[i])
                      for x in (_fmt(lo), _fmt(hi))]
                   + [_fmt(v) for v in ds.normalized[i]])
            if ds.stage == "id":
                row.append(_fmt(ds.phig[i]))
            row += [_fmt(v) for v in ds.curves[i]]
            w.writerow(row)
    with open(sidecar_path(path), "w") as f:
        json.dump(ds.metadata, f, indent=2, sort_keys=True)
        f.write("\n")


def read_dataset(path) -> Dataset:
    path = os.fspath(path)
    try:
        with open(sidecar_path(path)) as f:
            meta = json.load(f)
    except FileNotFoundError:
        raise DatasetFormatError(f"missing metadata sidecar for {path}")
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"corrupt metadata sidecar: {exc}")
    if meta.get("format_version") != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format_version {meta.get('format_version')!r}")
    stage, scheme = meta["stage"], meta["scheme"]
    specs = specs_for(stage)
    k = len(specs)
    expected = _header(stage)
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file")
        if header != expected:
            raise DatasetFormatError(f"{path}: line 1: unexpected header")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {len(expected)} fields, "
                    f"got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}")
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    arr = np.array(rows)
    params = arr[:, :k]
    lohi = arr[:, k:3 * k]
    lo, hi = lohi[:, 0::2], lohi[:, 1::2]
    normalized = arr[:, 3 * k:4 * k]
    c0 = 4 * k
    if stage == "id":
        phig = arr[:, c0]
        c0 += 1
    else:
        phig = None
    curves = arr[:, c0:]
    return Dataset(stage, scheme, params, lo, hi, normalized, curves, phig,
                   metadata=meta)
