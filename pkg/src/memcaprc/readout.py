"""Linear readout: least squares on the state matrix, optional ridge penalty."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ReadoutWeights:
    w: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        if self.w.ndim != 1 or not np.all(np.isfinite(self.w)):
            raise DomainError("weights must be a finite vector")

    def to_csv(self, path):
        labels = self.labels or tuple(f"f{i}" for i in range(self.w.shape[0]))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature", "weight"])
            for name, value in zip(labels, self.w):
                writer.writerow([name, repr(float(value))])

    @classmethod
    def from_csv(cls, path) -> "ReadoutWeights":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        return cls(np.array([float(r[1]) for r in rows]), tuple(r[0] for r in rows))


def _matrix(states):
    values = getattr(states, "values", states)
    S = np.asarray(values, dtype=float)
    if S.ndim != 2:
        raise DomainError("state matrix must be 2-D (features x timesteps)")
    return S, getattr(states, "labels", None)


def fit(states, target, ridge_lambda: float = 0.0) -> ReadoutWeights:
    """Weights minimising ``|w^T S - y|^2 + lambda |w|^2``; bias rows are not penalised.

    Columns of ``S^T`` are scaled to unit norm before the SVD-based solve,
    which matters when features are picofarads and the bias is one. When
    ``lambda = 0`` and ``S`` is rank deficient the minimum-norm solution in
    the original units is returned.
    """
    S, labels = _matrix(states)
    y = np.asarray(target, dtype=float).ravel()
    if y.shape[0] != S.shape[1]:
        raise DomainError(f"target has {y.shape[0]} samples, state matrix has {S.shape[1]} columns")
    if ridge_lambda < 0:
        raise DomainError("ridge_lambda must be non-negative")
    A = S.T
    d = np.linalg.norm(A, axis=0)
    d[d == 0] = 1.0
    As = A / d
    if ridge_lambda == 0:
        v, _, rank, _ = np.linalg.lstsq(As, y, rcond=None)
        if rank < A.shape[1]:
            w, *_ = np.linalg.lstsq(A, y, rcond=None)
        else:
            w = v / d
    else:
        penalised = ~np.all(S == 1.0, axis=1)
        P = np.diag(np.where(penalised, np.sqrt(ridge_lambda) / d, 0.0))
        v, *_ = np.linalg.lstsq(np.vstack([As, P]), np.concatenate([y, np.zeros(A.shape[1])]),
                                rcond=None)
        w = v / d
    return ReadoutWeights(w, labels)


def predict(weights: ReadoutWeights, states) -> np.ndarray:
    S, _ = _matrix(states)
    w = weights.w if isinstance(weights, ReadoutWeights) else np.asarray(weights, dtype=float)
    if w.shape[0] != S.shape[0]:
        raise DomainError(f"{w.shape[0]} weights for {S.shape[0]} features")
    return w @ S
