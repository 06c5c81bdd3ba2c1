"""Prediction-error metrics and device memory metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import integrate
from .encode import pulse_train
from .errors import DomainError, MetricError


def _pair(z, y):
    z = np.asarray(z, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if z.shape != y.shape or y.size == 0:
        raise MetricError(f"prediction and target lengths differ or are empty ({z.size}, {y.size})")
    return z, y


def pe(z, y) -> float:
    """Squared error over the target's energy."""
    z, y = _pair(z, y)
    den = float(np.sum(y * y))
    if den == 0.0:
        raise MetricError("PE undefined for an all-zero target")
    return float(np.sum((z - y) ** 2)) / den


def nmse(z, y) -> float:
    """Squared error over the target's variance sum."""
    z, y = _pair(z, y)
    den = float(np.sum((y - y.mean()) ** 2))
    if den == 0.0:
        raise MetricError("NMSE undefined for a constant target")
    return float(np.sum((z - y) ** 2)) / den


def nrmse(z, y) -> float:
    return math.sqrt(pe(z, y))


@dataclass(frozen=True)
class ErrorReport:
    pe: float
    nmse: float
    nrmse: float

    @classmethod
    def of(cls, z, y) -> "ErrorReport":
        p = pe(z, y)
        return cls(p, nmse(z, y), math.sqrt(p))


def ppf_index(device, pd: float, ipi: float, amplitude: float = 0.15, config=None,
              offset: float = 0.0) -> float:
    """Paired-pulse index in percent, ``100 (C_A - C_B) / C_A``.

    ``C_B`` is read at the end of the first pulse and ``C_A`` at the end of
    the second; positive values mean facilitation. The device starts at rest
    under ``offset``.
    """
    if not (pd > 0 and ipi > 0):
        raise DomainError("pulse duration and inter-pulse interval must be positive")
    wf = pulse_train(amplitude, pd, ipi, 2, offset=offset)
    c_b, c_a = integrate(device, wf, [pd, 2.0 * pd + ipi], "capacitance", config, start="equilibrium")
    return 100.0 * (c_a - c_b) / c_a


def lobe_area(cv_up, cv_down, grid=None) -> float:
    """Oriented area of the C-V loop on the applied-voltage axis.

    ``cv_up`` is the branch recorded while the voltage rises, ``cv_down``
    while it falls; either ``(grid, values)`` pairs or value arrays sharing
    ``grid``. The result is ``trapz(C_down - C_up, v)``, the shoelace area of
    the loop, so positive means counterclockwise (the rising branch runs
    below the falling one, as when capacitance lags a growing ``|v_m|``) and
    negative means clockwise.
    """
    if grid is None:
        (g_up, c_up), (g_down, c_down) = cv_up, cv_down
        g_up, g_down = np.asarray(g_up, dtype=float), np.asarray(g_down, dtype=float)
        if g_up.shape != g_down.shape or not np.array_equal(g_up, g_down):
            raise MetricError("branches are not on the same voltage grid")
        grid = g_up
    else:
        grid = np.asarray(grid, dtype=float)
        c_up, c_down = cv_up, cv_down
    c_up = np.asarray(c_up, dtype=float)
    c_down = np.asarray(c_down, dtype=float)
    if c_up.shape != grid.shape or c_down.shape != grid.shape:
        raise MetricError("branch lengths do not match the grid")
    return float(np.trapezoid(c_down - c_up, grid))
