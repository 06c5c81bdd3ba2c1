"""Characterization protocols: C-V and Q-V sweeps, paired-pulse maps, steady C-V."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

import math

from .dynamics import IntegratorConfig, integrate, settle_time, steady_state
from .encode import triangle_staircase
from .errors import DomainError
from .metrics import lobe_area, ppf_index


@dataclass(frozen=True)
class SweepResult:
    """Observable on the up and down branches of one steady sweep cycle.

    Both traces are indexed by ``grid`` (ascending applied voltage).
    ``pinch_voltage`` is set for charge sweeps only.
    """

    grid: np.ndarray
    up: np.ndarray
    down: np.ndarray
    observable: str
    freq: float
    pinch_voltage: float | None = None

    @property
    def lobe_area(self) -> float:
        return lobe_area(self.up, self.down, self.grid)

    @property
    def hysteresis(self) -> float:
        """Unsigned area between the branches, ``trapz(|up - down|, v)``."""
        return float(np.trapezoid(np.abs(self.up - self.down), self.grid))

    @property
    def minimum_voltage(self) -> float:
        """Grid voltage where the branch average is smallest (lag cancels out)."""
        i = int(np.argmin(0.5 * (self.up + self.down)))
        return float(self.grid[i])


def warmup_cycles(device, freq: float) -> int:
    """Cycles that span the device's settling time at the sweep's largest step."""
    return max(1, math.ceil(freq * settle_time(device.params, 0.0)))


def _sweep(device, v_range, freq, observable, step, warmup, config):
    if not freq > 0:
        raise DomainError("sweep frequency must be positive")
    v_lo, v_hi = (float(v) for v in v_range)
    if not v_hi > v_lo:
        raise DomainError("v_range must be increasing")
    if warmup is None:
        warmup = warmup_cycles(device, freq)
    cycles = warmup + 1
    wf, grid = triangle_staircase(v_lo, v_hi, freq, step, cycles)
    n = grid.shape[0]
    # the state at the end of each stair is the reading for that stair's voltage
    times = wf.ends[-2 * n:]
    values = integrate(device, wf, times, observable, config, start="equilibrium")
    return grid, values[:n], values[n:][::-1]


def cv_sweep(device, v_range=(-0.2, 0.2), freq: float = 0.05, step: float = 1e-3,
             warmup: int | None = None, config: IntegratorConfig | None = None) -> SweepResult:
    """Capacitance under a triangular staircase sweep, recorded after ``warmup`` cycles.

    By default the warm-up lasts long enough for the device to forget its
    starting state, so the recorded cycle is the periodic one.
    """
    grid, up, down = _sweep(device, v_range, freq, "capacitance", step, warmup, config)
    return SweepResult(grid, up, down, "capacitance", freq)


def qv_sweep(device, v_range=(-0.2, 0.2), freq: float = 0.05, step: float = 1e-3,
             warmup: int | None = None, config: IntegratorConfig | None = None) -> SweepResult:
    """Charge sweep. The pinch is where both branches come closest to zero charge.

    Minimising ``|q_up| + |q_down|`` combines a small loop gap with a small
    charge; on a pinched loop it lands where the membrane potential vanishes.
    """
    grid, up, down = _sweep(device, v_range, freq, "charge", step, warmup, config)
    i = int(np.argmin(np.abs(up) + np.abs(down)))
    return SweepResult(grid, up, down, "charge", freq, float(grid[i]))


def ppf_map(device, pd_grid, ipi_grid, amplitude: float = 0.15,
            config: IntegratorConfig | None = None) -> np.ndarray:
    """Paired-pulse index (percent) for each ``(pd, ipi)``; rows follow ``pd_grid``."""
    pd_grid = list(pd_grid)
    ipi_grid = list(ipi_grid)
    if not pd_grid or not ipi_grid:
        raise DomainError("pulse-duration and interval grids must be non-empty")
    return np.array([[ppf_index(device, pd, ipi, amplitude, config) for ipi in ipi_grid]
                     for pd in pd_grid])


def steady_cv(device, grid) -> np.ndarray:
    """Equilibrium capacitance at each held applied voltage."""
    p = device.params
    return np.array([steady_state(p, float(v) + p.v_phi).C_inf for v in grid])


def write_long_csv(path, rows, header):
    """Long-format table: one observation per row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def sweep_rows(label: str, result: SweepResult):
    for branch, values in (("up", result.up), ("down", result.down)):
        for v, x in zip(result.grid, values):
            yield (label, result.observable, result.freq, branch, float(v), float(x))
