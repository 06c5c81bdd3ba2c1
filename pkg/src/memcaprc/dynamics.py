"""Fixed-step RK4 integration over waveforms, and the memcapacitor steady state.

A waveform plus a sampling schedule is flattened into a list of constant-drive
intervals whose ends are either segment boundaries or sample times. The
compiled kernels in ``_kernels`` walk that list. A sample that falls on a
segment boundary reports the state reached at the end of the earlier segment
and the level of that earlier segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .device import (
    CONDUCTANCE_GUARD, ArmendarezMemristor, DuMemristor, Memcapacitor, MemcapacitorParams,
    MemcapacitorState,
)
from .encode import Waveform
from .errors import DomainError, IntegrationError, SolverError

#: Samples closer than this to a segment boundary are snapped onto it (s).
TIME_TOL = 1e-9

#: Thickness may exceed W0 by this relative margin before it counts as a failure.
W_SLACK = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    dt_max: float = 5e-4
    rel_tol: float = 1e-3

    def __post_init__(self):
        if not (self.dt_max > 0 and math.isfinite(self.dt_max)):
            raise DomainError(f"dt_max must be positive, got {self.dt_max}")
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


DEFAULT_CONFIG = IntegratorConfig()


# --- steady state ---------------------------------------------------------

@dataclass(frozen=True)
class SteadyState:
    W_inf: float
    R_inf: float
    C_inf: float


def quintic_coefficients(params: MemcapacitorParams, v_m: float) -> np.ndarray:
    """Coefficients ``a5 .. a0`` of the equilibrium polynomial in ``W`` (SI units).

    Eliminating ``R`` between the two stationary conditions gives
    ``a5 W^5 + a4 W^4 + a2 W^2 + a1 W + a0 = 0`` with ``a3 = 0``. Every force
    term is even in ``v_m``, so only ``v_m^2`` enters.
    """
    K = params.dielectric
    v2 = v_m * v_m
    v4 = v2 * v2
    v6 = v4 * v2
    k_ew, k_ec, R0, W0 = params.k_ew, params.k_ec, params.R0, params.W0
    return np.array([
        -8.0 * k_ec * k_ew * k_ew,
        8.0 * W0 * k_ec * k_ew * k_ew,
        0.0,
        -4.0 * R0 * R0 * v2 * K * k_ew * k_ew * math.pi,
        -4.0 * R0 * v4 * K * K * k_ew * math.pi,
        -v6 * K * K * K * math.pi,
    ])


def _scaled_quintic(params: MemcapacitorParams, v2: float) -> np.ndarray:
    # Same polynomial in x = W / W0, divided through by 8 k_ec k_ew^2 W0^5.
    K = params.dielectric
    k_ew, k_ec, R0, W0 = params.k_ew, params.k_ec, params.R0, params.W0
    v4 = v2 * v2
    v6 = v4 * v2
    return np.array([
        -1.0,
        1.0,
        0.0,
        -math.pi * K * R0 * R0 * v2 / (2.0 * k_ec * W0 ** 3),
        -math.pi * K * K * R0 * v4 / (2.0 * k_ec * k_ew * W0 ** 4),
        -math.pi * K ** 3 * v6 / (8.0 * k_ec * k_ew * k_ew * W0 ** 5),
    ])


def _newton(coeffs, x, iters=8):
    deriv = np.polyder(coeffs)
    for _ in range(iters):
        d = np.polyval(deriv, x)
        if d == 0.0:
            break
        step = np.polyval(coeffs, x) / d
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def steady_state(params: MemcapacitorParams, v_m: float) -> SteadyState:
    """Equilibrium geometry under a held membrane potential ``v_m``.

    The polynomial generally has two roots in ``(0, W0)``: a stable one near
    ``W0`` and an unstable one at small thickness, which the dynamics never
    reach from rest. The largest admissible root is returned. Above the
    pull-in voltage the two merge and vanish, and ``SolverError`` is raised.
    """
    if not math.isfinite(v_m):
        raise DomainError(f"non-finite membrane potential {v_m}")
    W0, R0 = params.W0, params.R0
    K = params.dielectric
    if v_m == 0.0:
        W, R = W0, R0
    else:
        v2 = v_m * v_m
        coeffs = _scaled_quintic(params, v2)
        roots = np.roots(coeffs)
        real = roots[np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))].real
        refined = sorted(_newton(coeffs, float(x)) for x in real)
        admissible = [x for x in refined if 0.0 < x <= 1.0 + 1e-12]
        if not admissible:
            raise SolverError(
                f"no equilibrium thickness in (0, W0] at v_m = {v_m:g} V (beyond pull-in)",
                roots=tuple(x * W0 for x in refined))
        W = min(admissible[-1], 1.0) * W0
        R = K * v2 / (2.0 * params.k_ew * W) + R0
    C = params.eps * params.eps0 * params.a * math.pi * R * R / W
    return SteadyState(float(W), float(R), float(C))


def pull_in_voltage(params: MemcapacitorParams, v_hi: float = 5.0, tol: float = 1e-6) -> float:
    """Smallest ``|v_m|`` above which no equilibrium exists (bisection)."""
    def exists(v):
        try:
            steady_state(params, v)
            return True
        except SolverError:
            return False

    lo, hi = 0.0, v_hi
    if exists(hi):
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            lo = mid
        else:
            hi = mid
    return lo


def settle_time(params: MemcapacitorParams, dv: float = 0.0, factor: float = 20.0) -> float:
    """``factor`` times the slowest ``zeta / k`` ratio of the damping laws at step ``dv``."""
    return factor * max(float(params.zeta_ew_law(dv)) / params.k_ew,
                        float(params.zeta_ec_law(dv)) / params.k_ec)


# --- work lists -----------------------------------------------------------

@dataclass(frozen=True)
class _WorkList:
    lengths: np.ndarray
    seg: np.ndarray
    rec: np.ndarray
    ends: np.ndarray
    sample_seg: np.ndarray


def _work_list(waveform: Waveform, schedule) -> _WorkList:
    sched = np.asarray(schedule, dtype=float)
    if sched.ndim != 1 or sched.size == 0:
        raise DomainError("schedule must be a non-empty 1-D sequence of times")
    if not np.all(np.isfinite(sched)):
        raise DomainError("schedule contains non-finite times")
    if np.any(np.diff(sched) <= 0):
        raise DomainError("schedule times must be strictly increasing")
    if sched[0] < 0 or sched[-1] > waveform.duration + TIME_TOL:
        raise DomainError(f"schedule must lie within [0, {waveform.duration:g}] s")
    ends = waveform.ends
    sample_seg = np.minimum(np.searchsorted(ends, sched - TIME_TOL, side="left"), len(ends) - 1)
    snap = np.abs(ends[sample_seg] - sched) <= TIME_TOL
    sched = np.where(snap, ends[sample_seg], sched)
    used = ends[: sample_seg[-1]]
    pts = np.concatenate([used, sched])
    rec = np.concatenate([np.full(used.shape[0], -1, dtype=np.int64),
                          np.arange(sched.shape[0], dtype=np.int64)])
    order = np.argsort(pts, kind="stable")
    pts, rec = pts[order], rec[order]
    lengths = np.diff(np.concatenate([[0.0], pts]))
    seg = np.minimum(np.searchsorted(ends, pts - TIME_TOL, side="left"), len(ends) - 1)
    return _WorkList(lengths, seg.astype(np.int64), rec, pts, sample_seg)


def potential_steps(vm_levels, vm_before: float) -> np.ndarray:
    """Membrane-potential step that started the drive in force on each segment.

    A segment whose level equals its predecessor's continues the earlier step,
    so splitting a segment in two changes nothing.
    """
    vm_levels = np.asarray(vm_levels, dtype=float)
    prev = np.concatenate([[vm_before], vm_levels[:-1]])
    change = vm_levels - prev
    idx = np.where(change != 0.0, np.arange(change.shape[0]), -1)
    idx = np.maximum.accumulate(idx)
    return np.where(idx >= 0, change[np.maximum(idx, 0)], 0.0)


def _damping(law, dv) -> np.ndarray:
    try:
        z = np.asarray(law(dv), dtype=float)
        if z.shape != dv.shape:
            raise ValueError
    except (TypeError, ValueError):
        z = np.array([float(law(x)) for x in dv])
    if not np.all(np.isfinite(z) & (z > 0)):
        raise DomainError("damping law returned a non-positive or non-finite value")
    return z


# --- integration ----------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Sampled states. ``levels`` is the applied voltage in force at each sample."""

    times: np.ndarray
    levels: np.ndarray
    states: dict
    final: dict


def initial_state(device, bias: float = 0.0):
    """Equilibrium state of ``device`` under a held applied voltage ``bias``."""
    if isinstance(device, Memcapacitor):
        ss = steady_state(device.params, bias + device.params.v_phi)
        return MemcapacitorState(ss.R_inf, ss.W_inf)
    if isinstance(device, DuMemristor):
        return device.equilibrium(bias)
    if isinstance(device, ArmendarezMemristor):
        return device.equilibrium(bias)
    raise DomainError(f"unsupported device {type(device).__name__}")


def simulate(device, waveform: Waveform, schedule, config: IntegratorConfig | None = None,
             start: str = "auto") -> Trajectory:
    """Integrate ``device`` over ``waveform`` and sample its state at ``schedule``.

    ``start="equilibrium"`` begins at rest under ``waveform.bias``;
    ``"auto"`` uses the device's own state when it carries one (memcapacitors
    without a state fall back to equilibrium); ``"device"`` insists on it.
    """
    config = config or DEFAULT_CONFIG
    if start not in ("auto", "equilibrium", "device"):
        raise DomainError(f"unknown start mode {start!r}")
    work = _work_list(waveform, schedule)
    n = work.sample_seg.shape[0]
    levels = waveform.levels
    label = getattr(device, "label", type(device).__name__)

    if isinstance(device, Memcapacitor):
        p = device.params
        if start == "equilibrium" or (start == "auto" and device.state is None):
            s0 = initial_state(device, waveform.bias)
        elif device.state is None:
            raise DomainError("device carries no state")
        else:
            s0 = device.state
        vm_seg = levels + p.v_phi
        dv = potential_steps(vm_seg, waveform.bias + p.v_phi)
        z_ew = _damping(p.zeta_ew_law, dv)[work.seg]
        z_ec = _damping(p.zeta_ec_law, dv)[work.seg]
        out_R = np.empty(n)
        out_W = np.empty(n)
        fail, R, W = _kernels.run_memcap(
            float(s0.R), float(s0.W), work.lengths, vm_seg[work.seg], z_ew, z_ec, work.rec,
            p.dielectric, p.R0, p.W0, p.k_ew, p.k_ec, config.dt_max, p.W0 * (1.0 + W_SLACK),
            out_R, out_W)
        if fail >= 0:
            raise IntegrationError(
                f"state left physical bounds (R={R:.4g} m, W={W:.4g} m) by t = {work.ends[fail]:.6g} s",
                time=float(work.ends[fail]), device=label)
        states = {"R": out_R, "W": out_W}
        final = {"R": R, "W": W}
    elif isinstance(device, DuMemristor):
        p = device.params
        w0 = initial_state(device, waveform.bias) if start == "equilibrium" else device.w
        out = np.empty(n)
        fail, w = _kernels.run_du(float(w0), work.lengths, levels[work.seg], work.rec,
                                  p.lam, p.eta, p.tau, config.dt_max, out)
        if fail >= 0:
            raise IntegrationError(f"state became non-finite by t = {work.ends[fail]:.6g} s",
                                   time=float(work.ends[fail]), device=label)
        states = {"w": out}
        final = {"w": w}
    elif isinstance(device, ArmendarezMemristor):
        p = device.params
        N0 = initial_state(device, waveform.bias) if start == "equilibrium" else device.N
        out = np.empty(n)
        fail, N = _kernels.run_arm(float(N0), work.lengths, levels[work.seg], work.rec,
                                   p.tau0, p.v_tau, p.N0, p.v_e, config.dt_max, out)
        if fail >= 0:
            raise IntegrationError(f"state left N > 0 by t = {work.ends[fail]:.6g} s",
                                   time=float(work.ends[fail]), device=label)
        states = {"N": out}
        final = {"N": N}
    else:
        raise DomainError(f"unsupported device {type(device).__name__}")

    times = np.asarray(schedule, dtype=float)
    return Trajectory(times, levels[work.sample_seg], states, final)


def observe(device, traj: Trajectory, observable: str | None = None) -> np.ndarray:
    """Map sampled states to a device observable."""
    observable = observable or device.default_observable
    if isinstance(device, Memcapacitor):
        p = device.params
        R, W = traj.states["R"], traj.states["W"]
        if observable in ("R", "W"):
            return traj.states[observable].copy()
        C = p.eps * p.eps0 * p.a * math.pi * R * R / W
        if observable == "capacitance":
            return C
        if observable == "charge":
            return C * (traj.levels + p.v_phi)
    elif isinstance(device, DuMemristor):
        p = device.params
        cur, cond = _kernels.du_observables(traj.states["w"], traj.levels, p.alpha, p.beta,
                                            p.gamma, p.delta, CONDUCTANCE_GUARD)
        if observable == "current":
            return cur
        if observable == "conductance":
            return cond
    elif isinstance(device, ArmendarezMemristor):
        p = device.params
        G = p.g_u * p.A0 * traj.states["N"]
        if observable == "conductance":
            return G
        if observable == "current":
            return G * traj.levels
    raise DomainError(f"{getattr(device, 'kind', device)!r} has no observable {observable!r}")


def integrate(device, waveform: Waveform, schedule, observable: str | None = None,
              config: IntegratorConfig | None = None, start: str = "auto") -> np.ndarray:
    """Observable of ``device`` at each scheduled time."""
    return observe(device, simulate(device, waveform, schedule, config, start), observable)


def step_halving_error(device, waveform: Waveform, schedule, observable: str | None = None,
                       config: IntegratorConfig | None = None) -> float:
    """Largest relative change of any sample when ``dt_max`` is halved."""
    config = config or DEFAULT_CONFIG
    a = integrate(device, waveform, schedule, observable, config)
    half = IntegratorConfig(config.dt_max / 2.0, config.rel_tol)
    b = integrate(device, waveform, schedule, observable, half)
    scale = np.maximum(np.abs(b), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale))
