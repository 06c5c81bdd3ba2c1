"""End-to-end benchmark runs: generate, encode, simulate, fit, score.

Every grid cell shares one task sequence drawn from the ``task`` stream of
the configured seed. Cells run in a fixed order and each cell's devices may
run on threads; outputs depend only on (config, seed).
"""

from __future__ import annotations

import csv
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .device import (
    ArmendarezMemristor, DuMemristor, MembraneComposition, load_ledger, load_memristor_params,
)
from .dynamics import IntegratorConfig
from .encode import PulseSpec, offsets_grid
from .errors import MemcapError
from .metrics import nrmse, pe
from .readout import fit, predict
from .reservoir import ReservoirConfig, StateMatrix, run_reservoir
from .rng import stream
from .tasks import TaskDataset, henon_generate, henon_z, sonds_generate

RESULT_COLUMNS = ("cell", "task", "mode", "encoding", "device", "observable", "pulse_width_s",
                  "v_range_V", "offset_range_V", "metric", "train", "test")


@dataclass(frozen=True)
class CellResult:
    cell: int
    task: str
    mode: str
    encoding: str
    device: str
    observable: str
    pulse_width: float
    v_range: float
    offset_range: float
    metric: str
    train: float
    test: float
    wall_time: float = field(default=0.0, compare=False)

    def row(self):
        return (self.cell, self.task, self.mode, self.encoding, self.device, self.observable,
                self.pulse_width, self.v_range, self.offset_range, self.metric, self.train,
                self.test)


@dataclass
class RunResult:
    config: ExperimentConfig
    cells: list
    meta: dict = field(default_factory=dict)
    datasets: dict = field(default_factory=dict, repr=False)
    predictions: dict = field(default_factory=dict, repr=False)
    wall_time: float = 0.0

    @property
    def seed(self) -> int:
        return self.config.seed

    def best(self, **match) -> CellResult:
        cells = [c for c in self.cells if all(getattr(c, k) == v for k, v in match.items())]
        if not cells:
            raise KeyError(f"no cell matches {match}")
        return min(cells, key=lambda c: (c.test, c.cell))

    def cell(self, **match) -> CellResult:
        cells = [c for c in self.cells if all(getattr(c, k) == v for k, v in match.items())]
        if len(cells) != 1:
            raise KeyError(f"{len(cells)} cells match {match}")
        return cells[0]


class CellError(MemcapError, RuntimeError):
    """A grid cell failed; the message names the cell."""


# --- data preparation -------------------------------------------------------

def make_dataset(config: ExperimentConfig, task: str) -> TaskDataset:
    t = config.task
    rng = stream(config.seed, "task")
    if task == "sonds":
        return sonds_generate(rng, t.n, t.split)
    return henon_generate(rng, t.n, t.noise_sigma, t.split, constant=t.constant)


def input_range(config: ExperimentConfig, data: TaskDataset):
    """Encoding range, and the input clipped into it.

    SONDS inputs have a known range. For the Henon map the range defaults
    to the training split's min and max; test inputs outside it are clipped.
    """
    if data.meta["task"] == "sonds" and config.task.u_range is None:
        lo, hi = data.meta["u_range"]
    elif config.task.u_range is not None:
        lo, hi = config.task.u_range
    else:
        train = data.input[: data.split_index]
        lo, hi = float(train.min()), float(train.max())
    u = np.clip(data.input, lo, hi)
    return (lo, hi), u, int(np.count_nonzero(u != data.input))


def _score(states: StateMatrix, data: TaskDataset, metric, ridge_lambda, washout):
    s = data.split_index
    train = slice(washout, s)
    w = fit(states.values[:, train], data.target[train], ridge_lambda)
    z = predict(w, states.values)
    return metric(z[train], data.target[train]), metric(z[s:], data.target[s:]), z


def _mode_devices(config: ExperimentConfig, ledger):
    """Devices and external offsets for the configured reservoir mode."""
    mode = config.reservoir.mode
    labels = config.devices()
    if mode == "homogeneous":
        sym = MembraneComposition(0.0, 0.0)
        devices = [ledger.memcapacitor(sym) for _ in labels]
        offsets = list(offsets_grid(config.reservoir.homogeneous_range, len(labels)))
    else:
        devices = [ledger.memcapacitor(label) for label in labels]
        offsets = [0.0] * len(devices) if mode == "heterogeneous" else [-d.v_phi for d in devices]
    return devices, offsets


def _run_memcap_task(config: ExperimentConfig, task: str, jobs: int) -> RunResult:
    start = time.perf_counter()
    ledger = load_ledger(config.parameters)
    data = make_dataset(config, task)
    u_range, u, clipped = input_range(config, data)
    metric, metric_name = (pe, "pe") if task == "sonds" else (nrmse, "nrmse")
    devices, offsets = _mode_devices(config, ledger)
    integ = IntegratorConfig(config.dt_max(), config.integrator.rel_tol)
    enc = config.encoding
    cells, predictions = [], {}
    index = 0
    for pw in enc.pulse_widths:
        for vr in enc.v_ranges:
            t0 = time.perf_counter()
            spec = PulseSpec(-vr, vr, pw, enc.duty, 0.0, enc.off_level)
            rc = ReservoirConfig(devices, offsets, spec, config.node_fractions(),
                                 config.reservoir.observable, None, config.reservoir.noise_sigma,
                                 integ)
            try:
                states = run_reservoir(u, u_range, rc, jobs, stream(config.seed, f"noise/{index}"))
            except MemcapError as exc:
                raise CellError(f"cell {index} (pulse width {pw:g} s, range {vr:g} V): {exc}") from exc
            tr, te, z = _score(states, data, metric, config.readout.ridge_lambda,
                               config.readout.washout)
            cells.append(CellResult(index, task, config.reservoir.mode, "amplitude", "memcapacitor",
                                    config.reservoir.observable, pw, vr, 0.0, metric_name, tr, te,
                                    time.perf_counter() - t0))
            predictions[index] = z
            index += 1
    meta = {"task": _task_meta(data), "clipped_inputs": clipped, "u_range": list(u_range),
            "devices": [d.label for d in devices], "external_offsets": [float(o) for o in offsets],
            "internal_offsets": [float(d.v_phi) for d in devices],
            "parameters": {"source": ledger.source, "ledger": ledger.raw}}
    return RunResult(config, cells, meta, {task: data}, predictions, time.perf_counter() - start)


def _task_meta(data: TaskDataset) -> dict:
    return {k: v for k, v in data.meta.items() if not isinstance(v, np.ndarray)}


def run_sonds(config: ExperimentConfig, jobs: int = 1) -> RunResult:
    """SONDS over the pulse-width x voltage-range grid; PE on train and test splits."""
    return _run_memcap_task(config, "sonds", jobs)


def run_henon(config: ExperimentConfig, jobs: int = 1) -> RunResult:
    """One-step Henon prediction over the grid; NRMSE on train and test splits."""
    return _run_memcap_task(config, "henon", jobs)


def run_memristor_grid(config: ExperimentConfig, jobs: int = 1) -> RunResult:
    """Pulse-width encoding baseline and the offsets-encoding grid for one memristor model."""
    start = time.perf_counter()
    m = config.memristor
    if m is None:
        raise CellError("memristor runs need a 'memristor' section")
    du_params, arm_params = load_memristor_params(m.parameters)
    make = (lambda: DuMemristor(du_params)) if m.model == "du" else (lambda: ArmendarezMemristor(arm_params))
    integ = IntegratorConfig(config.dt_max(), config.integrator.rel_tol)
    cells, datasets, predictions, meta = [], {}, {}, {"task": {}, "clipped_inputs": {}}
    n_dev = len(m.pw_widths)
    index = 0
    for task in m.tasks:
        data = make_dataset(config, task)
        datasets[task] = data
        u_range, u, clipped = input_range(config, data)
        meta["task"][task] = _task_meta(data)
        meta["clipped_inputs"][task] = clipped
        metric, metric_name = (pe, "pe") if task == "sonds" else (nrmse, "nrmse")
        nodes = (1.0,) if task == "sonds" else (0.0, 1.0)
        plans = [("pulse_width", m.pw_widths[0], 0.0, list(m.pw_widths), [0.0] * n_dev)]
        for w in m.offset_widths:
            for r in m.offset_ranges:
                plans.append(("offsets", w, r, [w] * m.n_offsets, list(offsets_grid(r, m.n_offsets))))
        for obs in m.observables:
            for encoding, pw, r, widths, offsets in plans:
                t0 = time.perf_counter()
                spec = PulseSpec(m.v_min, m.v_max, pw, m.duty)
                devices = [make() for _ in widths]
                rc = ReservoirConfig(devices, offsets, spec, nodes, obs, widths, 0.0, integ)
                try:
                    states = run_reservoir(u, u_range, rc, jobs)
                except MemcapError as exc:
                    raise CellError(f"cell {index} ({task}, {obs}, {encoding}, width {pw:g} s, "
                                    f"range {r:g} V): {exc}") from exc
                tr, te, z = _score(states, data, metric, config.readout.ridge_lambda,
                                   config.readout.washout)
                cells.append(CellResult(index, task, "memristor", encoding, m.model, obs,
                                        pw if encoding == "offsets" else 0.0, m.v_max - m.v_min, r,
                                        metric_name, tr, te, time.perf_counter() - t0))
                predictions[index] = z
                index += 1
    meta["parameters"] = {"du": du_params.__dict__, "armendarez": arm_params.__dict__}
    return RunResult(config, cells, meta, datasets, predictions, time.perf_counter() - start)


def run(config: ExperimentConfig, jobs: int = 1) -> RunResult:
    runner = {"sonds": run_sonds, "henon": run_henon, "memristor": run_memristor_grid}
    return runner[config.experiment](config, jobs)


# --- output -------------------------------------------------------------------

def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else x


def write_results(result: RunResult, out_dir) -> list[Path]:
    """Long-format results CSV, dataset CSVs, Henon 2-D map and a JSON manifest.

    Wall times are deliberately left out so that files are byte-identical
    across runs with the same config and seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "results.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for c in result.cells:
            writer.writerow([_fmt(x) for x in c.row()])
    written.append(path)
    for task, data in result.datasets.items():
        path = out / f"dataset_{task}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if task == "henon":
                writer.writerow(["k", "split", "x", "x_next", "noise"])
                noise = np.concatenate([[0.0], data.meta["noise"]])
                for k in range(len(data)):
                    writer.writerow([k, "train" if k < data.split_index else "test",
                                     _fmt(data.input[k]), _fmt(data.target[k]), _fmt(noise[k])])
            else:
                writer.writerow(["k", "split", "u", "y"])
                for k in range(len(data)):
                    writer.writerow([k, "train" if k < data.split_index else "test",
                                     _fmt(data.input[k]), _fmt(data.target[k])])
        written.append(path)
    if "henon" in result.datasets:
        data = result.datasets["henon"]
        best = result.best(task="henon")
        z_pred = result.predictions[best.cell]
        c = data.meta["constant"]
        path = out / "henon_map.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["cell", "k", "split", "x", "z_true", "z_pred"])
            zt = henon_z(data.input, data.target, c)
            zp = henon_z(data.input, z_pred, c)
            for k in range(len(data)):
                writer.writerow([best.cell, k, "train" if k < data.split_index else "test",
                                 _fmt(data.input[k]), _fmt(zt[k]), _fmt(zp[k])])
        written.append(path)
    manifest = {
        "library": "memcaprc",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "seed": result.seed,
        "streams": {"task": "task", "observation_noise": "noise/<cell>"},
        "config": result.config.to_dict(),
        "meta": _jsonable(result.meta),
        "outputs": [p.name for p in written],
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x
