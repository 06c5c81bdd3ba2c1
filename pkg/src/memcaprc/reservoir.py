"""A bank of independent devices driven by one input, sampled into a state matrix."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import IntegratorConfig, integrate
from .encode import PulseSpec, encode_amplitude
from .errors import DomainError, IntegrationError


@dataclass(frozen=True)
class ReservoirConfig:
    """Devices, their external offsets, the shared pulse shape and the sampling nodes.

    ``pulse_widths`` optionally overrides the shared pulse width per device
    (pulse-width encoding). ``noise_sigma`` adds seeded Gaussian noise, in
    observable units, to every sampled state.
    """

    devices: Sequence
    per_device_offsets: Sequence[float]
    pulse: PulseSpec
    node_fractions: Sequence[float] = (1.0,)
    observable: str | None = None
    pulse_widths: Sequence[float] | None = None
    noise_sigma: float = 0.0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if len(self.devices) == 0:
            raise DomainError("a reservoir needs at least one device")
        if len(self.per_device_offsets) != len(self.devices):
            raise DomainError(f"{len(self.per_device_offsets)} offsets for {len(self.devices)} devices")
        f = np.asarray(self.node_fractions, dtype=float)
        if f.size == 0 or np.any((f < 0) | (f > 1)) or np.any(np.diff(f) <= 0):
            raise DomainError("node_fractions must be non-empty, in [0, 1] and strictly increasing")
        if self.pulse_widths is not None and len(self.pulse_widths) != len(self.devices):
            raise DomainError("pulse_widths must give one width per device")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")

    def device_pulse(self, i: int) -> PulseSpec:
        spec = self.pulse.with_offset(float(self.per_device_offsets[i]))
        if self.pulse_widths is not None:
            spec = spec.with_pulse_width(float(self.pulse_widths[i]))
        return spec

    def feature_labels(self) -> list[str]:
        labels = []
        for i, dev in enumerate(self.devices):
            off = 1e3 * float(self.per_device_offsets[i])
            for f in self.node_fractions:
                labels.append(f"d{i}:{dev.label}:{off:+.1f}mV:f{f:g}")
        return labels + ["bias"]


def sample_times(n_steps: int, spec: PulseSpec, node_fractions, dt: float) -> np.ndarray:
    """Sampling instants, ordered step-major then node-major.

    Node ``f`` sits at ``f * on_time`` into each pulse, but never earlier than
    one integration step after onset.
    """
    on = spec.on_time
    offs = np.array([min(max(f * on, dt), on) for f in node_fractions])
    if np.any(np.diff(offs) <= 0):
        raise DomainError("two nodes fall on the same instant; decrease dt_max or spread the fractions")
    k = np.arange(n_steps, dtype=float)[:, None]
    return (k * spec.pulse_width + offs[None, :]).ravel()


@dataclass(frozen=True)
class StateMatrix:
    """Features x timesteps; the last row is the bias row of ones."""

    values: np.ndarray
    labels: tuple

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != len(self.labels):
            raise DomainError("state matrix shape does not match its labels")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("state matrix has non-finite entries")
        self.values.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def columns(self, start: int, stop: int | None = None) -> "StateMatrix":
        return StateMatrix(self.values[:, start:stop].copy(), self.labels)

    def drop_device_rows(self, rows) -> "StateMatrix":
        drop = set(rows)
        keep = [i for i in range(len(self.labels)) if i not in drop]
        return StateMatrix(self.values[keep].copy(), tuple(self.labels[i] for i in keep))

    def to_csv(self, path):
        """One row per timestep; the header names each feature."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", *self.labels])
            for k in range(self.n_steps):
                writer.writerow([k, *(repr(float(x)) for x in self.values[:, k])])

    @classmethod
    def from_csv(cls, path) -> "StateMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        labels = tuple(rows[0][1:])
        values = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).T
        return cls(values, labels)


def _run_device(i, u, u_range, config: ReservoirConfig):
    dev = config.devices[i]
    spec = config.device_pulse(i)
    wf = encode_amplitude(u, u_range, spec)
    times = sample_times(len(u), spec, config.node_fractions, config.integrator.dt_max)
    try:
        obs = integrate(dev, wf, times, config.observable, config.integrator, start="equilibrium")
    except IntegrationError as exc:
        raise IntegrationError(f"device {i} ({dev.label}): {exc}", time=exc.time, device=i) from exc
    return obs.reshape(len(u), len(config.node_fractions)).T


def run_reservoir(u, u_range, config: ReservoirConfig, jobs: int = 1,
                  rng: np.random.Generator | None = None) -> StateMatrix:
    """Drive every device with ``u`` and assemble the state matrix.

    Devices start at rest under their waveform's DC level and run once over
    the whole sequence. Rows are device-major then node-major, with the bias
    row last. The result does not depend on ``jobs``.
    """
    u = np.asarray(u, dtype=float)
    n_dev = len(config.devices)
    if jobs > 1 and n_dev > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, n_dev)) as pool:
            blocks = list(pool.map(lambda i: _run_device(i, u, u_range, config), range(n_dev)))
    else:
        blocks = [_run_device(i, u, u_range, config) for i in range(n_dev)]
    values = np.vstack(blocks + [np.ones((1, u.shape[0]))])
    if config.noise_sigma > 0:
        if rng is None:
            raise DomainError("observation noise needs a seeded generator")
        values[:-1] += config.noise_sigma * rng.standard_normal(values[:-1].shape)
    return StateMatrix(values, tuple(config.feature_labels()))


def bias_rows(states) -> np.ndarray:
    """Indices of rows that are identically one."""
    values = states.values if isinstance(states, StateMatrix) else np.asarray(states)
    return np.flatnonzero(np.all(values == 1.0, axis=1))

