"""Voltage encoders: task sequences to piecewise-constant waveforms."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EncodingError


@dataclass(frozen=True)
class PulseSpec:
    """One input step = ``pulse_width`` seconds: ON for ``duty`` of it, OFF for the rest.

    ``offset`` is a DC bias added to the whole waveform, ON and OFF alike.
    """

    v_min: float
    v_max: float
    pulse_width: float
    duty: float = 0.5
    offset: float = 0.0
    off_level: float = 0.0

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise EncodingError(f"v_min must be below v_max ({self.v_min} >= {self.v_max})")
        if not self.pulse_width > 0:
            raise EncodingError("pulse_width must be positive")
        if not (0.0 < self.duty <= 1.0):
            raise EncodingError("duty must lie in (0, 1]")

    @property
    def on_time(self) -> float:
        return self.duty * self.pulse_width

    def with_offset(self, offset: float) -> "PulseSpec":
        return PulseSpec(self.v_min, self.v_max, self.pulse_width, self.duty, offset, self.off_level)

    def with_pulse_width(self, pulse_width: float) -> "PulseSpec":
        return PulseSpec(self.v_min, self.v_max, pulse_width, self.duty, self.offset, self.off_level)


class Waveform:
    """Contiguous piecewise-constant voltage segments starting at t = 0.

    ``bias`` is the level the device sat at before t = 0 (the encoder's DC
    offset plus OFF level); integrators start devices at equilibrium there.
    """

    def __init__(self, starts, ends, levels, bias=0.0):
        self.bias = float(bias)
        self.starts = np.asarray(starts, dtype=float)
        self.ends = np.asarray(ends, dtype=float)
        self.levels = np.asarray(levels, dtype=float)
        n = self.levels.shape[0]
        if self.starts.shape != (n,) or self.ends.shape != (n,):
            raise EncodingError("segment arrays must share one length")
        if n == 0:
            raise EncodingError("a waveform needs at least one segment")
        if self.starts[0] != 0.0:
            raise EncodingError("waveform must start at t = 0")
        if np.any(self.ends <= self.starts):
            raise EncodingError("segments must have positive duration")
        if np.any(self.starts[1:] != self.ends[:-1]):
            raise EncodingError("segments must be contiguous")

    @classmethod
    def from_durations(cls, durations, levels, bias=0.0) -> "Waveform":
        ends = np.cumsum(np.asarray(durations, dtype=float))
        starts = np.concatenate([[0.0], ends[:-1]])
        return cls(starts, ends, levels, bias)

    @property
    def duration(self) -> float:
        return float(self.ends[-1])

    @property
    def segments(self):
        return list(zip(self.starts.tolist(), self.ends.tolist(), self.levels.tolist()))

    def shifted(self, c: float) -> "Waveform":
        return Waveform(self.starts, self.ends, self.levels + c, self.bias + c)

    def level_at(self, t: float) -> float:
        """Level in force at ``t``; at a boundary the earlier segment wins."""
        j = int(np.searchsorted(self.ends, t, side="left"))
        return float(self.levels[min(j, len(self.levels) - 1)])

    def __len__(self):
        return self.levels.shape[0]

    def __repr__(self):
        return f"Waveform({len(self)} segments, {self.duration:g} s)"

    def to_csv(self, path):
        """Two columns, ``time_s, voltage_V``; each segment contributes its two endpoints."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time_s", "voltage_V"])
            for start, end, level in self.segments:
                writer.writerow([repr(start), repr(level)])
                writer.writerow([repr(end), repr(level)])

    @classmethod
    def from_csv(cls, path) -> "Waveform":
        rows = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(rows[0::2, 0], rows[1::2, 0], rows[0::2, 1])


def pulse_boundaries(n: int, pulse_width: float, duty: float):
    """Start, ON-end and end times of ``n`` consecutive pulses."""
    k = np.arange(n, dtype=float)
    starts = k * pulse_width
    on_ends = starts + duty * pulse_width
    ends = (k + 1.0) * pulse_width
    return starts, on_ends, ends


def pulse_levels(on_levels, spec: PulseSpec) -> Waveform:
    """Waveform from per-step ON levels (before offset) and ``spec`` timing."""
    on_levels = np.asarray(on_levels, dtype=float)
    n = on_levels.shape[0]
    bias = spec.off_level + spec.offset
    starts, on_ends, ends = pulse_boundaries(n, spec.pulse_width, spec.duty)
    if spec.duty == 1.0:
        return Waveform(starts, ends, on_levels + spec.offset, bias)
    seg_starts = np.empty(2 * n)
    seg_ends = np.empty(2 * n)
    levels = np.empty(2 * n)
    seg_starts[0::2] = starts
    seg_ends[0::2] = on_ends
    seg_starts[1::2] = on_ends
    seg_ends[1::2] = ends
    levels[0::2] = on_levels + spec.offset
    levels[1::2] = bias
    return Waveform(seg_starts, seg_ends, levels, bias)


def amplitude_levels(u, u_range, spec: PulseSpec) -> np.ndarray:
    """Linear map of ``u`` from ``u_range`` onto ``[v_min, v_max]`` (no offset)."""
    u = np.asarray(u, dtype=float)
    lo, hi = (float(x) for x in u_range)
    if not hi > lo:
        raise EncodingError(f"empty input range {u_range}")
    if u.size and (np.any(~np.isfinite(u)) or u.min() < lo or u.max() > hi):
        raise EncodingError(f"inputs span [{u.min():g}, {u.max():g}], outside range [{lo:g}, {hi:g}]")
    return spec.v_min + (u - lo) / (hi - lo) * (spec.v_max - spec.v_min)


def encode_amplitude(u, u_range, spec: PulseSpec) -> Waveform:
    """Amplitude-encode ``u``: one pulse per sample, linearly interpolated level."""
    return pulse_levels(amplitude_levels(u, u_range, spec), spec)


def offsets_grid(range_abs: float, n: int) -> np.ndarray:
    """``n`` evenly spaced offsets on ``[-range_abs, +range_abs]``; exact zero for odd ``n``."""
    if n < 2:
        raise EncodingError("offsets grid needs at least two points")
    i = np.arange(n, dtype=float)
    return range_abs * (2.0 * i - (n - 1)) / (n - 1)


def pulse_train(amplitude: float, on_time: float, off_time: float, n_pulses: int,
                offset: float = 0.0, lead: float = 0.0) -> Waveform:
    """Identical square pulses, optionally preceded by ``lead`` seconds at the bias."""
    durations, levels = [], []
    if lead > 0:
        durations.append(lead)
        levels.append(offset)
    for k in range(n_pulses):
        durations += [on_time, off_time]
        levels += [amplitude + offset, offset]
    return Waveform.from_durations(durations, levels, offset)


def triangle_staircase(v_lo: float, v_hi: float, freq: float, step: float, cycles: int = 1):
    """Staircase approximation of a triangular sweep ``v_lo -> v_hi -> v_lo``.

    Returns the waveform plus the voltage grid of one half-cycle. Each stair
    holds for ``1 / (2 * freq * n_steps)`` seconds.
    """
    if not freq > 0:
        raise EncodingError("sweep frequency must be positive")
    n_steps = int(round((v_hi - v_lo) / step))
    grid = v_lo + (v_hi - v_lo) * np.arange(n_steps + 1) / n_steps
    hold = 1.0 / (2.0 * freq * (n_steps + 1))
    one_cycle = np.concatenate([grid, grid[::-1]])
    levels = np.tile(one_cycle, cycles)
    return Waveform.from_durations(np.full(levels.shape[0], hold), levels, v_lo), grid
