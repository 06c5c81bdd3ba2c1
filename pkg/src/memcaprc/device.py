"""Device physics: lipid-bilayer memcapacitors and two comparison memristors.

A memcapacitor's state is the interfacial radius ``R`` and hydrophobic
thickness ``W``. Electrowetting grows ``R`` and electrocompression thins
``W``; both are driven by the square of the membrane potential
``v_m = v_app + v_phi``, where ``v_phi`` is the internal dipole offset set by
leaflet asymmetry.

Parameters live in a YAML ledger (``data/memcapacitor.yaml``) so that
per-composition damping laws can be edited without touching code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
import yaml

from . import _kernels
from .errors import ConfigError, DomainError

#: Internal offset per percent of leaflet asymmetry (V / %).
OFFSET_SLOPE = 1.38e-3

#: Below this drive the conductance is reported as the analytic limit of I/v.
CONDUCTANCE_GUARD = 1e-6


# --- compositions ---------------------------------------------------------

@dataclass(frozen=True)
class MembraneComposition:
    """Do-lipid percentages of the hot and grounded droplets."""

    hot_do_pct: float
    ground_do_pct: float

    def __post_init__(self):
        for name in ("hot_do_pct", "ground_do_pct"):
            value = getattr(self, name)
            if not (0.0 <= value <= 100.0):
                raise DomainError(f"{name} must lie in [0, 100], got {value}")

    @classmethod
    def parse(cls, text: str) -> "MembraneComposition":
        """Build from the ``"hot-ground"`` naming convention, e.g. ``"100-0"``."""
        try:
            hot, ground = (float(part) for part in str(text).split("-"))
        except ValueError:
            raise DomainError(f"composition must look like '100-0', got {text!r}") from None
        return cls(hot, ground)

    @property
    def symmetric(self) -> bool:
        return self.hot_do_pct == self.ground_do_pct

    @property
    def label(self) -> str:
        return f"{self.hot_do_pct:g}-{self.ground_do_pct:g}"

    @property
    def membrane_type(self) -> str:
        """Unordered key shared by a device and its mirror image."""
        lo, hi = sorted((self.hot_do_pct, self.ground_do_pct))
        return f"{lo:g}-{hi:g}"

    def mirrored(self) -> "MembraneComposition":
        return MembraneComposition(self.ground_do_pct, self.hot_do_pct)


#: The twelve devices of the reservoir, ordered by internal offset.
STANDARD_COMPOSITIONS = tuple(
    MembraneComposition.parse(s)
    for s in ("100-0", "80-0", "60-0", "40-0", "20-0", "0-0", "100-100",
              "0-20", "0-40", "0-60", "0-80", "0-100")
)


def internal_offset(comp: MembraneComposition, slope: float = OFFSET_SLOPE) -> float:
    """Dipole offset of a bilayer; positive when the grounded leaflet is richer in Do."""
    return slope * (comp.ground_do_pct - comp.hot_do_pct)


# --- damping laws ---------------------------------------------------------

@dataclass(frozen=True)
class ConstantDamping:
    zeta0: float

    def __post_init__(self):
        if not self.zeta0 > 0:
            raise DomainError("damping must be positive")

    def __call__(self, dv):
        if np.ndim(dv):
            return np.full(np.shape(dv), float(self.zeta0))
        return float(self.zeta0)

    def to_dict(self):
        return {"law": "constant", "zeta0": self.zeta0}


@dataclass(frozen=True)
class CubicDecayDamping:
    """``zeta0 / (1 + c |dv|^3)``: damping falls with the cube of the potential step."""

    zeta0: float
    c: float

    def __post_init__(self):
        if not self.zeta0 > 0:
            raise DomainError("damping must be positive")
        if self.c < 0:
            raise DomainError("cubic coefficient must be non-negative")

    def __call__(self, dv):
        dv = np.abs(dv)
        return self.zeta0 / (1.0 + self.c * dv * dv * dv)

    def to_dict(self):
        return {"law": "cubic", "zeta0": self.zeta0, "c": self.c}


DampingLaw = Callable[[float], float]


def damping_from_dict(spec: Mapping) -> DampingLaw:
    law = spec.get("law", "constant")
    try:
        if law == "constant":
            return ConstantDamping(float(spec["zeta0"]))
        if law == "cubic":
            return CubicDecayDamping(float(spec["zeta0"]), float(spec["c"]))
    except KeyError as exc:
        raise ConfigError(f"damping law '{law}' needs {exc.args[0]!r}") from None
    raise ConfigError(f"unknown damping law {law!r}")


# --- memcapacitor ---------------------------------------------------------

@dataclass(frozen=True)
class MemcapacitorParams:
    a: float
    eps: float
    eps0: float
    R0: float
    W0: float
    k_ew: float
    k_ec: float
    zeta_ew_law: DampingLaw
    zeta_ec_law: DampingLaw
    v_phi: float = 0.0

    def __post_init__(self):
        for name in ("a", "eps", "eps0", "R0", "W0", "k_ew", "k_ec"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if not math.isfinite(self.v_phi):
            raise DomainError("v_phi must be finite")

    @property
    def dielectric(self) -> float:
        """``a * eps * eps0``, the factor shared by both force terms."""
        return self.a * self.eps * self.eps0

    @property
    def resting_capacitance(self) -> float:
        return self.eps * self.eps0 * self.a * math.pi * self.R0 * self.R0 / self.W0


@dataclass(frozen=True)
class MemcapacitorState:
    R: float
    W: float


def _check_state(state: MemcapacitorState):
    if not (math.isfinite(state.R) and math.isfinite(state.W)):
        raise DomainError(f"non-finite state {state}")
    if state.W <= 0:
        raise DomainError(f"thickness must be positive, got {state.W}")
    if state.R <= 0:
        raise DomainError(f"radius must be positive, got {state.R}")


def memcap_derivatives(state: MemcapacitorState, v_app: float, params: MemcapacitorParams,
                       dv_m: float | None = None) -> tuple[float, float]:
    """Time derivatives ``(dR/dt, dW/dt)`` under applied voltage ``v_app``.

    ``dv_m`` is the membrane-potential step fed to the damping laws. It
    defaults to ``v_m`` itself, i.e. a step from 0 V.
    """
    _check_state(state)
    if not math.isfinite(v_app):
        raise DomainError(f"non-finite voltage {v_app}")
    vm = v_app + params.v_phi
    if dv_m is None:
        dv_m = vm
    z_ew = float(params.zeta_ew_law(dv_m))
    z_ec = float(params.zeta_ec_law(dv_m))
    return _kernels.memcap_rhs(state.R, state.W, vm * vm, params.dielectric, params.R0,
                               params.W0, params.k_ew, params.k_ec, z_ew, z_ec)


def capacitance(state: MemcapacitorState, params: MemcapacitorParams) -> float:
    if not state.W > 0:
        raise DomainError(f"thickness must be positive, got {state.W}")
    return params.eps * params.eps0 * params.a * math.pi * state.R * state.R / state.W


def charge(state: MemcapacitorState, v_app: float, params: MemcapacitorParams) -> float:
    """Stored charge, ``C * v_m``; zero exactly at ``v_app = -v_phi``."""
    return capacitance(state, params) * (v_app + params.v_phi)


@dataclass(frozen=True)
class Memcapacitor:
    """A memcapacitor value object.

    ``state`` fixes the initial geometry; when ``None`` the integrator starts
    the device at equilibrium under its waveform's DC bias.
    """

    params: MemcapacitorParams
    composition: MembraneComposition | None = None
    state: MemcapacitorState | None = None

    kind = "memcapacitor"
    observables = ("capacitance", "charge")
    default_observable = "capacitance"

    @property
    def label(self) -> str:
        return self.composition.label if self.composition else "memcap"

    @property
    def v_phi(self) -> float:
        return self.params.v_phi


# --- memristors -----------------------------------------------------------

@dataclass(frozen=True)
class DuParams:
    lam: float
    eta: float
    tau: float
    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive")


@dataclass
class DuMemristor:
    """Volatile memristor with a fixed relaxation time (Du et al. model)."""

    params: DuParams
    w: float = 0.0

    kind = "du"
    observables = ("current", "conductance")
    default_observable = "conductance"
    label = "du"
    v_phi = 0.0

    def __post_init__(self):
        self.w = min(max(float(self.w), 0.0), 1.0)

    def current(self, v: float) -> float:
        p = self.params
        return _kernels.du_current(self.w, v, p.alpha, p.beta, p.gamma, p.delta)

    def conductance(self, v: float) -> float:
        p = self.params
        return _kernels.du_conductance(self.w, v, p.alpha, p.beta, p.gamma, p.delta,
                                       CONDUCTANCE_GUARD)

    def equilibrium(self, v: float) -> float:
        p = self.params
        return min(max(p.lam * p.tau * math.sinh(p.eta * v), 0.0), 1.0)


def du_step(dev: DuMemristor, v: float, dt: float) -> tuple[float, float]:
    """Advance ``dev`` by one RK4 step of length ``dt``; return ``(I, G)`` after it."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not math.isfinite(v):
        raise DomainError(f"non-finite voltage {v}")
    p = dev.params
    dev.w = _kernels.du_rk4(dev.w, dt, v, p.lam, p.eta, p.tau)
    return dev.current(v), dev.conductance(v)


@dataclass(frozen=True)
class ArmendarezParams:
    tau0: float
    v_tau: float
    N0: float
    v_e: float
    g_u: float
    A0: float

    def __post_init__(self):
        for name in ("tau0", "v_tau", "v_e", "N0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass
class ArmendarezMemristor:
    """Memristor with a voltage-dependent time constant (Armendarez et al. model)."""

    params: ArmendarezParams
    N: float | None = None

    kind = "armendarez"
    observables = ("current", "conductance")
    default_observable = "conductance"
    label = "armendarez"
    v_phi = 0.0

    def __post_init__(self):
        if self.N is None:
            self.N = self.params.N0
        if not self.N > 0:
            raise DomainError("N must be positive")

    def conductance(self, v: float = 0.0) -> float:
        return self.params.g_u * self.params.A0 * self.N

    def current(self, v: float) -> float:
        return self.conductance(v) * v

    def equilibrium(self, v: float) -> float:
        return self.params.N0 * math.exp(abs(v) / self.params.v_e)

    def time_constant(self, v: float) -> float:
        return self.params.tau0 * math.exp(abs(v) / self.params.v_tau)


def arm_step(dev: ArmendarezMemristor, v: float, dt: float) -> tuple[float, float]:
    """Advance ``dev`` by one RK4 step; return ``(I, G)`` after it."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not math.isfinite(v):
        raise DomainError(f"non-finite voltage {v}")
    p = dev.params
    dev.N = _kernels.arm_rk4(dev.N, dt, v, p.tau0, p.v_tau, p.N0, p.v_e)
    return dev.current(v), dev.conductance(v)


# --- parameter ledger -----------------------------------------------------

def _read_yaml(path, default_name):
    if path is None:
        text = resources.files("memcaprc.data").joinpath(default_name).read_text()
    else:
        text = Path(path).read_text()
    try:
        return yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", line=mark.line + 1 if mark else None) from None


@dataclass(frozen=True)
class ParameterLedger:
    """Shared constants plus per-membrane-type damping laws."""

    shared: Mapping[str, float]
    membranes: Mapping[str, Mapping[str, DampingLaw]]
    offset_slope: float = OFFSET_SLOPE
    source: str = "builtin"
    raw: Mapping = field(default_factory=dict, compare=False, repr=False)

    def base_params(self, **overrides) -> dict:
        """Composition-independent constants, with ``W0`` derived if not given."""
        s = self.shared
        W0 = s.get("W0")
        if W0 is None:
            W0 = s["eps"] * s["eps0"] / s["specific_capacitance"]
        out = dict(a=s["a"], eps=s["eps"], eps0=s["eps0"], R0=s["R0"], W0=W0,
                   k_ew=s["k_ew"], k_ec=s["k_ec"])
        out.update({k: float(v) for k, v in overrides.items() if k in out})
        return out

    def damping(self, comp: MembraneComposition) -> Mapping[str, DampingLaw]:
        try:
            return self.membranes[comp.membrane_type]
        except KeyError:
            raise ConfigError(f"no damping laws for membrane type {comp.membrane_type}",
                              field=f"membranes.{comp.membrane_type}") from None

    def params_for(self, comp: MembraneComposition, *, offset_override: float | None = None,
                   damping_from: MembraneComposition | None = None,
                   **overrides) -> MemcapacitorParams:
        laws = self.damping(damping_from or comp)
        v_phi = internal_offset(comp, self.offset_slope) if offset_override is None else offset_override
        return MemcapacitorParams(**self.base_params(**overrides),
                                  zeta_ew_law=overrides.get("zeta_ew_law", laws["zeta_ew"]),
                                  zeta_ec_law=overrides.get("zeta_ec_law", laws["zeta_ec"]),
                                  v_phi=v_phi)

    def memcapacitor(self, comp: MembraneComposition | str, **kwargs) -> Memcapacitor:
        if isinstance(comp, str):
            comp = MembraneComposition.parse(comp)
        return Memcapacitor(self.params_for(comp, **kwargs), comp)


def load_ledger(path=None) -> ParameterLedger:
    raw = _read_yaml(path, "memcapacitor.yaml")
    try:
        shared = {k: float(v) for k, v in raw["shared"].items()}
        membranes = {
            str(key): {name: damping_from_dict(entry[name]) for name in ("zeta_ew", "zeta_ec")}
            for key, entry in raw["membranes"].items()
        }
    except KeyError as exc:
        raise ConfigError(f"missing entry {exc.args[0]!r}", field=str(exc.args[0])) from None
    for key in ("a", "eps", "eps0", "R0", "k_ew", "k_ec"):
        if key not in shared:
            raise ConfigError("missing shared constant", field=f"shared.{key}")
    if "W0" not in shared and "specific_capacitance" not in shared:
        raise ConfigError("need W0 or specific_capacitance", field="shared.W0")
    return ParameterLedger(shared, membranes, float(raw.get("offset_slope", OFFSET_SLOPE)),
                           str(path) if path else "builtin", raw)


def load_memristor_params(path=None) -> tuple[DuParams, ArmendarezParams]:
    raw = _read_yaml(path, "memristors.yaml")
    try:
        du = raw["du"]
        arm = raw["armendarez"]
        du_params = DuParams(lam=float(du["lambda"]), eta=float(du["eta"]), tau=float(du["tau"]),
                             alpha=float(du["alpha"]), beta=float(du["beta"]),
                             gamma=float(du["gamma"]), delta=float(du["delta"]))
        arm_params = ArmendarezParams(**{k: float(arm[k]) for k in
                                         ("tau0", "v_tau", "N0", "v_e", "g_u", "A0")})
    except KeyError as exc:
        raise ConfigError("missing memristor constant", field=str(exc.args[0])) from None
    return du_params, arm_params


def with_offset(params: MemcapacitorParams, v_phi: float) -> MemcapacitorParams:
    return replace(params, v_phi=v_phi)
