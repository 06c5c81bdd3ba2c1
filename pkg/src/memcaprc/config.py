"""Experiment configuration: a YAML document validated into dataclasses.

Schema (every section optional except ``experiment`` and ``seed``)::

    experiment: sonds | henon | memristor
    seed: 64-bit unsigned integer
    task:        {n, split, noise_sigma, constant, u_range}
    reservoir:   {mode, devices, homogeneous_range, node_fractions,
                  observable, noise_sigma}
    encoding:    {pulse_widths, v_ranges, duty, off_level}
    memristor:   {model, observables, tasks, v_min, v_max, duty,
                  pw_widths, offset_widths, offset_ranges, n_offsets,
                  parameters}
    readout:     {ridge_lambda, washout}
    integrator:  {dt_max, rel_tol}
    parameters:  path to a memcapacitor parameter ledger, or null

Times are seconds and voltages volts. Unknown keys are rejected so that
typos surface as errors rather than silently falling back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .device import STANDARD_COMPOSITIONS, MembraneComposition
from .errors import ConfigError, DomainError

SONDS_DEVICES = tuple(c.label for c in STANDARD_COMPOSITIONS if c.label != "100-100")
HENON_DEVICES = tuple(c.label for c in STANDARD_COMPOSITIONS)

MEMRISTOR_DEFAULTS = {
    "du": dict(v_min=0.8, v_max=1.8, duty=1.0,
               pw_widths=[1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3, 8e-3, 10e-3, 15e-3, 20e-3, 40e-3],
               offset_widths=[1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3, 8e-3, 10e-3, 15e-3, 20e-3],
               offset_ranges=[0.2, 0.4, 0.6, 0.8, 1.0]),
    "armendarez": dict(v_min=0.10, v_max=0.16, duty=0.9,
                       pw_widths=[0.5e-3, 1e-3, 2e-3, 5e-3, 8e-3, 10e-3, 15e-3, 20e-3, 25e-3,
                                  40e-3, 50e-3],
                       offset_widths=[0.5e-3, 1e-3, 2e-3, 5e-3, 8e-3, 10e-3, 15e-3, 20e-3,
                                      25e-3, 40e-3],
                       offset_ranges=[0.02, 0.04, 0.06, 0.08, 0.10]),
}


@dataclass(frozen=True)
class TaskSpec:
    n: int = 2000
    split: int | None = None
    noise_sigma: float = 0.05
    constant: float = 1.0
    u_range: tuple | None = None


@dataclass(frozen=True)
class ReservoirSpec:
    mode: str = "heterogeneous"
    devices: tuple | None = None
    homogeneous_range: float = 0.138
    node_fractions: tuple | None = None
    observable: str = "capacitance"
    noise_sigma: float = 0.0


@dataclass(frozen=True)
class EncodingSpec:
    pulse_widths: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    v_ranges: tuple = (0.15, 0.2)
    duty: float = 0.5
    off_level: float = 0.0


@dataclass(frozen=True)
class MemristorSpec:
    model: str = "du"
    observables: tuple = ("conductance", "current")
    tasks: tuple = ("sonds", "henon")
    v_min: float | None = None
    v_max: float | None = None
    duty: float | None = None
    pw_widths: tuple | None = None
    offset_widths: tuple | None = None
    offset_ranges: tuple | None = None
    n_offsets: int = 11
    parameters: str | None = None

    def resolved(self) -> "MemristorSpec":
        """Copy with model defaults filled in."""
        base = MEMRISTOR_DEFAULTS[self.model]
        values = asdict(self)
        for key, default in base.items():
            if values[key] is None:
                values[key] = tuple(default) if isinstance(default, list) else default
        return MemristorSpec(**values)


@dataclass(frozen=True)
class ReadoutSpec:
    ridge_lambda: float = 0.0
    washout: int = 0


@dataclass(frozen=True)
class IntegratorSpec:
    dt_max: float | None = None
    rel_tol: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    task: TaskSpec = field(default_factory=TaskSpec)
    reservoir: ReservoirSpec = field(default_factory=ReservoirSpec)
    encoding: EncodingSpec = field(default_factory=EncodingSpec)
    memristor: MemristorSpec | None = None
    readout: ReadoutSpec = field(default_factory=ReadoutSpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    parameters: str | None = None

    def devices(self) -> tuple:
        if self.reservoir.devices is not None:
            return self.reservoir.devices
        return SONDS_DEVICES if self.experiment == "sonds" else HENON_DEVICES

    def node_fractions(self) -> tuple:
        if self.reservoir.node_fractions is not None:
            return self.reservoir.node_fractions
        return (1.0,) if self.experiment == "sonds" else (0.0, 1.0)

    def dt_max(self) -> float:
        if self.integrator.dt_max is not None:
            return self.integrator.dt_max
        return 5e-5 if self.experiment == "memristor" else 5e-4

    def to_dict(self) -> dict:
        """Plain-data echo; ``from_dict(to_dict())`` reproduces the config."""
        def clean(x):
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            return x
        return clean(asdict(self))

    def with_overrides(self, seed: int | None = None, dt_max: float | None = None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = _replace(cfg, seed=_seed(seed, "seed", None))
        if dt_max is not None:
            cfg = _replace(cfg, integrator=IntegratorSpec(_positive(dt_max, "integrator.dt_max", None),
                                                          cfg.integrator.rel_tol))
        return cfg


def _replace(obj, **changes):
    values = {f.name: getattr(obj, f.name) for f in fields(obj)}
    values.update(changes)
    return type(obj)(**values)


# --- validation helpers -----------------------------------------------------

def _number(value, path, line, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path, line)
    if integer and not (isinstance(value, int) or float(value).is_integer()):
        raise ConfigError(f"expected an integer, got {value!r}", path, line)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path, line)
    return int(value) if integer else float(value)


def _positive(value, path, line):
    x = _number(value, path, line)
    if not x > 0:
        raise ConfigError(f"must be positive, got {x}", path, line)
    return x


def _seed(value, path, line):
    x = _number(value, path, line, integer=True)
    if not 0 <= x < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer", path, line)
    return x


def _choice(value, options, path, line):
    if value not in options:
        raise ConfigError(f"must be one of {', '.join(options)}; got {value!r}", path, line)
    return value


def _numbers(value, path, line, positive=False, nonempty=True):
    if not isinstance(value, (list, tuple)):
        raise ConfigError("expected a list", path, line)
    if nonempty and not value:
        raise ConfigError("list must not be empty", path, line)
    conv = _positive if positive else _number
    return tuple(conv(v, f"{path}[{i}]", line) for i, v in enumerate(value))


class _Lines:
    """Dotted path -> 1-based source line, from the YAML node tree."""

    def __init__(self, text: str | None):
        self.map = {}
        if text:
            try:
                node = yaml.compose(text)
            except yaml.YAMLError:
                node = None
            if node is not None:
                self._walk(node, "")

    def _walk(self, node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                self.map[path] = key.start_mark.line + 1
                self._walk(value, path)

    def __call__(self, path):
        while path:
            if path in self.map:
                return self.map[path]
            path = path.rpartition(".")[0]
        return None


def _section(raw, name, cls, lines, convert):
    data = raw.get(name)
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError("expected a mapping", name, lines(name))
    allowed = {f.name for f in fields(cls)}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})",
                              f"{name}.{key}", lines(f"{name}.{key}"))
    values = {}
    for key, value in data.items():
        path = f"{name}.{key}"
        values[key] = convert(key, value, path, lines(path))
    return cls(**values)


def _task(key, value, path, line):
    if key in ("n", "split"):
        x = _number(value, path, line, integer=True)
        if x < 2:
            raise ConfigError("must be at least 2", path, line)
        return x
    if key == "noise_sigma":
        x = _number(value, path, line)
        if x < 0:
            raise ConfigError("must be non-negative", path, line)
        return x
    if key == "constant":
        return _number(value, path, line)
    if key == "u_range":
        if value is None:
            return None
        lo, hi = _numbers(value, path, line)
        if not hi > lo:
            raise ConfigError("u_range must be [lo, hi] with hi > lo", path, line)
        return (lo, hi)
    raise AssertionError(key)


def _reservoir(key, value, path, line):
    if key == "mode":
        return _choice(value, ("heterogeneous", "homogeneous", "nullified"), path, line)
    if key == "devices":
        if value is None:
            return None
        if not isinstance(value, list) or not value:
            raise ConfigError("expected a non-empty list of compositions", path, line)
        out = []
        for i, v in enumerate(value):
            try:
                out.append(MembraneComposition.parse(str(v)).label)
            except DomainError as exc:
                raise ConfigError(str(exc), f"{path}[{i}]", line) from None
        return tuple(out)
    if key == "homogeneous_range":
        return _positive(value, path, line)
    if key == "node_fractions":
        if value is None:
            return None
        f = _numbers(value, path, line)
        if any(x < 0 or x > 1 for x in f) or any(b <= a for a, b in zip(f, f[1:])):
            raise ConfigError("fractions must lie in [0, 1] and increase strictly", path, line)
        return f
    if key == "observable":
        return _choice(value, ("capacitance", "charge"), path, line)
    if key == "noise_sigma":
        x = _number(value, path, line)
        if x < 0:
            raise ConfigError("must be non-negative", path, line)
        return x
    raise AssertionError(key)


def _encoding(key, value, path, line):
    if key in ("pulse_widths", "v_ranges"):
        return _numbers(value, path, line, positive=True)
    if key == "duty":
        x = _number(value, path, line)
        if not 0 < x <= 1:
            raise ConfigError("must lie in (0, 1]", path, line)
        return x
    if key == "off_level":
        return _number(value, path, line)
    raise AssertionError(key)


def _memristor(key, value, path, line):
    if key == "model":
        return _choice(value, ("du", "armendarez"), path, line)
    if key == "observables":
        if not isinstance(value, list) or not value:
            raise ConfigError("expected a non-empty list", path, line)
        return tuple(_choice(v, ("conductance", "current"), path, line) for v in value)
    if key == "tasks":
        if not isinstance(value, list) or not value:
            raise ConfigError("expected a non-empty list", path, line)
        return tuple(_choice(v, ("sonds", "henon"), path, line) for v in value)
    if key in ("v_min", "v_max"):
        return None if value is None else _number(value, path, line)
    if key == "duty":
        if value is None:
            return None
        x = _number(value, path, line)
        if not 0 < x <= 1:
            raise ConfigError("must lie in (0, 1]", path, line)
        return x
    if key in ("pw_widths", "offset_widths", "offset_ranges"):
        return None if value is None else _numbers(value, path, line, positive=True)
    if key == "n_offsets":
        x = _number(value, path, line, integer=True)
        if x < 2:
            raise ConfigError("need at least two offsets", path, line)
        return x
    if key == "parameters":
        return None if value is None else str(value)
    raise AssertionError(key)


def _readout(key, value, path, line):
    if key == "ridge_lambda":
        x = _number(value, path, line)
        if x < 0:
            raise ConfigError("must be non-negative", path, line)
        return x
    if key == "washout":
        x = _number(value, path, line, integer=True)
        if x < 0:
            raise ConfigError("must be non-negative", path, line)
        return x
    raise AssertionError(key)


def _integrator(key, value, path, line):
    if key == "dt_max":
        return None if value is None else _positive(value, path, line)
    if key == "rel_tol":
        x = _number(value, path, line)
        if not 0 < x < 1:
            raise ConfigError("must lie in (0, 1)", path, line)
        return x
    raise AssertionError(key)


TOP_KEYS = ("experiment", "seed", "task", "reservoir", "encoding", "memristor", "readout",
            "integrator", "parameters")


def from_dict(raw: dict, text: str | None = None) -> ExperimentConfig:
    """Validate a parsed document; ``text`` (the source) supplies line numbers."""
    lines = _Lines(text)
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", line=1)
    for key in raw:
        if key not in TOP_KEYS:
            raise ConfigError(f"unknown key (allowed: {', '.join(TOP_KEYS)})", str(key), lines(str(key)))
    for key in ("experiment", "seed"):
        if key not in raw:
            raise ConfigError("required field is missing", key, 1)
    experiment = _choice(raw["experiment"], ("sonds", "henon", "memristor"), "experiment",
                         lines("experiment"))
    seed = _seed(raw["seed"], "seed", lines("seed"))
    task = _section(raw, "task", TaskSpec, lines, _task)
    if task.split is None:
        task = _replace(task, split=task.n // 2)
    reservoir = _section(raw, "reservoir", ReservoirSpec, lines, _reservoir)
    encoding = _section(raw, "encoding", EncodingSpec, lines, _encoding)
    readout = _section(raw, "readout", ReadoutSpec, lines, _readout)
    integrator = _section(raw, "integrator", IntegratorSpec, lines, _integrator)
    memristor = None
    if experiment == "memristor":
        memristor = _section(raw, "memristor", MemristorSpec, lines, _memristor).resolved()
        if memristor.v_min >= memristor.v_max:
            raise ConfigError("v_min must be below v_max", "memristor.v_min", lines("memristor.v_min"))
    elif raw.get("memristor") is not None:
        raise ConfigError("only valid when experiment is 'memristor'", "memristor", lines("memristor"))
    if not task.split < task.n:
        raise ConfigError(f"split ({task.split}) must be below n ({task.n})", "task.split",
                          lines("task.split"))
    if readout.washout >= task.split:
        raise ConfigError("washout must be shorter than the training split", "readout.washout",
                          lines("readout.washout"))
    parameters = raw.get("parameters")
    if parameters is not None and not isinstance(parameters, str):
        raise ConfigError("expected a file path", "parameters", lines("parameters"))
    return ExperimentConfig(experiment, seed, task, reservoir, encoding, memristor, readout,
                            integrator, parameters)


def loads(text: str) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    if raw is None:
        raise ConfigError("empty configuration", "experiment", 1)
    return from_dict(raw, text)


def load(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return loads(path.read_text())


def dumps(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
