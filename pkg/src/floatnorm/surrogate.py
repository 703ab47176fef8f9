"""Analytic FinFET-like curve simulator.

Stands in for a real compact-model / TCAD data source. Produces gate
capacitance (Cgg-Vg) and drain current (Id-Vg) curves on fixed bias grids,
plus the scaling maps that move curves between physical units and the
network-space representation.

All formulas are smooth in every parameter, so finite-difference
derivative checks are meaningful everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Physical and shape constants (fixed; see README).
VT = 0.02585            # thermal voltage, V
EPS_HK = 3.453e-11      # high-k permittivity, F/m
W = 1.0e-7              # gate width, m
L = 2.0e-8              # gate length, m
A = W * L               # gate area, m^2
PHI_REF = 4.5           # reference work function, eV
N_C = 1.5               # channel ideality for the Cgg turn-on
S_OV = 5.0              # overlap sigmoid slope, 1/V
T_QM0 = 1.0e-11         # quantum-correction thickness scale, m
COX_I = 0.02            # inversion-layer capacitance density, F/m^2
C_DEN = 0.5             # subthreshold-slope degradation density, F/m^2
K_DIBL = 0.02           # DIBL coupling, V
V_OFF = 0.3             # threshold offset, V
C_REF = 1e-16           # Cgg scaling reference, F
I_FLOOR = 1e-14         # current floor, A

CGG_PARAM_NAMES = ("PHIG", "CFS", "EOT", "QMFACTOR", "QMTCECV", "CGSL")
ID_PARAM_NAMES = ("CIT", "U0", "UA", "EU", "ETA0", "CDSCD",
                  "VSAT", "KSATIV", "RDSW", "PCLM", "MEXP")


class SurrogateError(ValueError):
    """Invalid input to the curve simulator."""


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x):
    """ln(1 + e^x), overflow-safe."""
    return np.logaddexp(0.0, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class BiasGrid:
    """Canonical bias grids the networks are trained on."""
    cgg_vg: np.ndarray = field(
        default_factory=lambda: np.round(np.linspace(-0.7, 0.7, 15), 10))
    id_vg: np.ndarray = field(
        default_factory=lambda: np.round(np.linspace(0.0, 0.7, 8), 10))
    id_vd_conditions: tuple = (0.05, 0.7)

    def __post_init__(self):
        cgg = np.asarray(self.cgg_vg, dtype=float)
        idv = np.asarray(self.id_vg, dtype=float)
        if cgg.shape != (15,):
            raise SurrogateError("cgg_vg must have exactly 15 points")
        d = np.diff(cgg)
        if np.any(d <= 0) or np.any(np.abs(d - 0.1) > 1e-12):
            raise SurrogateError("cgg_vg must be uniform with 0.1 V spacing")
        if idv.shape != (8,):
            raise SurrogateError("id_vg must have exactly 8 points")

    @property
    def n_cgg(self):
        return 15

    @property
    def n_id(self):
        # concatenated Vd=0.05 block then Vd=0.7 block
        return 16


@dataclass(frozen=True)
class CggParams:
    PHIG: float      # eV
    CFS: float       # F/m
    EOT: float       # m
    QMFACTOR: float
    QMTCECV: float
    CGSL: float      # F/m

    def as_array(self):
        return np.array([getattr(self, n) for n in CGG_PARAM_NAMES])

    @classmethod
    def from_array(cls, arr):
        return cls(*(float(v) for v in arr))


@dataclass(frozen=True)
class IdParams:
    CIT: float
    U0: float
    UA: float
    EU: float
    ETA0: float
    CDSCD: float
    VSAT: float      # m/s
    KSATIV: float
    RDSW: float      # ohm*um
    PCLM: float
    MEXP: float
    PHIG: float = 4.5   # eV; companion value, fixed by the Cgg stage

    def as_array(self):
        return np.array([getattr(self, n) for n in ID_PARAM_NAMES])

    @classmethod
    def from_array(cls, arr, phig):
        return cls(*(float(v) for v in arr), PHIG=float(phig))


@dataclass
class CurveVector:
    kind: str               # "Cgg" or "Id"
    values: np.ndarray      # physical units (F or A)

    def __post_init__(self):
        if self.kind not in ("Cgg", "Id"):
            raise SurrogateError(f"unknown curve kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        n = 15 if self.kind == "Cgg" else 16
        if self.values.shape != (n,):
            raise SurrogateError(
                f"{self.kind} curve must have {n} points, got {self.values.shape}")

    @property
    def scaled(self):
        return scale_curve(self)


def _check_finite(values, names):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = [n for n, v in zip(names, arr) if not np.isfinite(v)]
        raise SurrogateError(f"non-finite parameter(s): {bad}")


def simulate_cgg(p: CggParams, grid: BiasGrid | None = None) -> CurveVector:
    """Gate capacitance vs Vg on the canonical 15-point grid."""
    grid = grid or BiasGrid()
    _check_finite(p.as_array(), CGG_PARAM_NAMES)
    vg = np.asarray(grid.cgg_vg, dtype=float)
    vth = p.PHIG - PHI_REF
    eot_q = p.EOT + p.QMFACTOR * T_QM0 * sigmoid(p.QMTCECV * (vg - vth) / VT)
    if np.any(eot_q <= 0):
        raise SurrogateError("effective oxide thickness went non-positive")
    cgg = (W * p.CFS
           + W * p.CGSL * sigmoid(S_OV * (vth - vg))
           + A * (EPS_HK / eot_q) * sigmoid((vg - vth) / (N_C * VT)))
    return CurveVector("Cgg", cgg)


def _id_point(p: IdParams, vg, vd):
    """Drain current at (vg, vd); vg/vd may be arrays of equal shape."""
    vg = np.asarray(vg, dtype=float)
    vd = np.asarray(vd, dtype=float)
    vth = p.PHIG - PHI_REF + V_OFF - K_DIBL * p.ETA0 * vd
    n = 1.0 + (p.CIT + p.CDSCD * vd) / C_DEN
    q = n * VT * softplus((vg - vth) / (n * VT))
    mu_eff = p.U0 / (1.0 + (p.UA * softplus(vg - vth + 0.3)) ** p.EU)
    esat_l = 2.0 * p.VSAT * L / mu_eff
    vdsat = p.KSATIV * (q * esat_l) / (q + esat_l) + 1e-3
    # (vd/vdsat)^MEXP in log space; MEXP up to 10 would overflow otherwise
    with np.errstate(divide="ignore"):
        t = p.MEXP * np.log(vd / vdsat)
    vdseff = np.where(vd > 0, vd * np.exp(-softplus(t) / p.MEXP), 0.0)
    id0 = (W / L) * mu_eff * COX_I * q * vdseff * (1.0 + p.PCLM * (vd - vdseff))
    rds = p.RDSW * 1e-6 / W
    return np.maximum(id0 / (1.0 + rds * id0 / np.maximum(vd, 0.05)), I_FLOOR)


def simulate_id(p: IdParams, grid: BiasGrid | None = None) -> CurveVector:
    """Drain current vs Vg: Vd=0.05 block (8 pts) then Vd=0.7 block (8 pts)."""
    grid = grid or BiasGrid()
    _check_finite(np.append(p.as_array(), p.PHIG), ID_PARAM_NAMES + ("PHIG",))
    if p.MEXP <= 0:
        raise SurrogateError("MEXP must be positive")
    vg = np.asarray(grid.id_vg, dtype=float)
    blocks = [_id_point(p, vg, np.full_like(vg, vd))
              for vd in grid.id_vd_conditions]
    return CurveVector("Id", np.concatenate(blocks))


def simulate_id_vd(p: IdParams, vg_list, vd_grid=None) -> np.ndarray:
    """Family of Id-Vd sweeps, one row per Vg value. Report/plot output."""
    if vd_grid is None:
        vd_grid = np.round(np.arange(0.0, 0.7 + 1e-9, 0.05), 10)
    vd = np.asarray(vd_grid, dtype=float)
    _check_finite(np.append(p.as_array(), p.PHIG), ID_PARAM_NAMES + ("PHIG",))
    return np.stack([_id_point(p, np.full_like(vd, vg), vd) for vg in vg_list])


def scale_curve(curve: CurveVector) -> np.ndarray:
    """Physical units -> network space (roughly [0, 1.5])."""
    if curve.kind == "Cgg":
        return curve.values / C_REF
    return (np.log10(np.maximum(curve.values, I_FLOOR)) + 14.0) / 12.0


def unscale_curve(scaled, kind: str) -> CurveVector:
    scaled = np.asarray(scaled, dtype=float)
    if kind == "Cgg":
        return CurveVector("Cgg", scaled * C_REF)
    if kind == "Id":
        return CurveVector("Id", 10.0 ** (scaled * 12.0 - 14.0))
    raise SurrogateError(f"unknown curve kind {kind!r}")


class Simulator:
    """Backend interface: the cascade and experiments modules only call
    simulate_cgg / simulate_id with the canonical grid and ordering, so a
    SPICE-backed implementation can be dropped in here."""

    def __init__(self, grid: BiasGrid | None = None):
        self.grid = grid or BiasGrid()
        self.call_count = 0   # exposed so tests can assert augmentation is free

    def simulate_cgg(self, p: CggParams) -> CurveVector:
        self.call_count += 1
        return simulate_cgg(p, self.grid)

    def simulate_id(self, p: IdParams) -> CurveVector:
        self.call_count += 1
        return simulate_id(p, self.grid)
