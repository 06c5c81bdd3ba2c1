"""Benchmark sequences: a second-order nonlinear system and the noisy Henon map."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GenerationError
from .rng import as_generator

HENON_A = 1.4
HENON_B = 0.3


@dataclass(frozen=True)
class TaskDataset:
    input: np.ndarray
    target: np.ndarray
    split_index: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.input.shape != self.target.shape or self.input.ndim != 1:
            raise DomainError("input and target must be 1-D and of equal length")
        if not 0 < self.split_index < self.input.shape[0]:
            raise DomainError(f"split_index must lie in (0, {self.input.shape[0]})")

    def __len__(self):
        return self.input.shape[0]

    @property
    def train(self):
        s = self.split_index
        return self.input[:s], self.target[:s]

    @property
    def test(self):
        s = self.split_index
        return self.input[s:], self.target[s:]

    def to_csv(self, path, names=("u", "y")):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", *names])
            for k, (a, b) in enumerate(zip(self.input, self.target)):
                writer.writerow([k, repr(float(a)), repr(float(b))])


def sonds_response(u) -> np.ndarray:
    """``y(k) = 0.4 y(k-1) + 0.4 y(k-1) y(k-2) + 0.6 u(k)^3 + 0.1`` from zero history."""
    u = np.asarray(u, dtype=float)
    y = np.empty_like(u)
    y1 = y2 = 0.0
    for k in range(u.shape[0]):
        yk = 0.4 * y1 + 0.4 * y1 * y2 + 0.6 * u[k] ** 3 + 0.1
        y[k] = yk
        y2, y1 = y1, yk
    return y


def sonds_generate(seed, n: int = 2000, split: int | None = None,
                   u_max: float = 0.5) -> TaskDataset:
    if n < 2:
        raise DomainError("need at least two steps")
    rng = as_generator(seed, "task")
    u = rng.uniform(0.0, u_max, n)
    return TaskDataset(u, sonds_response(u), split if split is not None else n // 2,
                       {"task": "sonds", "history": [0.0, 0.0], "u_range": [0.0, u_max]})


def _escapes(x_prev, x_cur, constant, horizon, bound):
    for _ in range(horizon):
        x_prev, x_cur = x_cur, constant + HENON_B * x_prev - HENON_A * x_cur * x_cur
        if abs(x_cur) > bound:
            return True
    return False


def henon_generate(seed, n: int = 2000, noise_sigma: float = 0.05, split: int | None = None,
                   constant: float = 1.0, bound: float = 10.0, horizon: int = 30,
                   max_retries: int = 1000) -> TaskDataset:
    """Noisy Henon map in the single-variable form.

    ``x(k+1) = constant + 0.3 x(k-1) + w(k-1) - 1.4 x(k)^2`` with
    ``x(1) = x(2) = 0`` and ``w ~ N(0, noise_sigma^2)``. ``constant = 1``
    gives the classic chaotic attractor; ``constant = 0`` has the zero
    orbit as a fixed point. A noise draw that would send the orbit (or its
    noiseless continuation over ``horizon`` steps) beyond ``bound`` is
    redrawn; the number of redraws is reported in ``meta``.

    ``input[k] = x(k)``, ``target[k] = x(k+1)``.
    """
    if n < 3:
        raise DomainError("need at least three steps")
    rng = as_generator(seed, "task")
    x = np.zeros(n + 1)
    w = np.zeros(n - 1)
    retries = 0
    for i in range(2, n + 1):
        for attempt in range(max_retries + 1):
            wi = noise_sigma * rng.standard_normal() if noise_sigma > 0 else 0.0
            xi = constant + HENON_B * x[i - 2] + wi - HENON_A * x[i - 1] ** 2
            if abs(xi) <= bound and not _escapes(x[i - 1], xi, constant, horizon, bound):
                break
            retries += 1
        else:
            raise GenerationError(f"orbit diverges at step {i} after {max_retries} redraws")
        x[i] = xi
        w[i - 2] = wi
    return TaskDataset(x[:-1].copy(), x[1:].copy(), split if split is not None else n // 2,
                       {"task": "henon", "constant": constant, "noise_sigma": noise_sigma,
                        "retries": retries, "noise": w, "gaussian": "numpy-ziggurat"})


def henon_z(x_seq, x_next_seq, constant: float = 0.0) -> np.ndarray:
    """Second map coordinate recovered from consecutive ``x`` values.

    ``z(k) = x_next(k) + 1.4 x(k)^2 - constant``; use the constant the data
    were generated with.
    """
    x = np.asarray(x_seq, dtype=float)
    xn = np.asarray(x_next_seq, dtype=float)
    if x.shape != xn.shape:
        raise DomainError("x and x_next must have equal lengths")
    return xn + HENON_A * x * x - constant
