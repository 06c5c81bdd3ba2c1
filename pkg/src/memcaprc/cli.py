"""Command-line entry point.

Exit status: 0 on success, 1 for an invalid invocation or configuration,
2 when a simulation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .characterize import cv_sweep, ppf_map, qv_sweep, steady_cv, sweep_rows, write_long_csv
from .config import ExperimentConfig, dumps, from_dict, load
from .device import STANDARD_COMPOSITIONS, MembraneComposition, load_ledger
from .dynamics import IntegratorConfig, steady_state
from .errors import ConfigError, DomainError, MemcapError
from .experiments import run, write_results


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p, config=True):
    if config:
        p.add_argument("--config", help="YAML experiment configuration")
        p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker threads per cell (default 1)")
    p.add_argument("--dt-max", type=float, help="integration step ceiling in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memcaprc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"memcaprc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("devices", help="list the standard compositions and their offsets")
    p.add_argument("--parameters", help="memcapacitor parameter ledger (YAML)")
    p.add_argument("--out", help="also write devices.csv here")

    p = sub.add_parser("steady-state", help="equilibrium geometry under a held potential")
    p.add_argument("--composition", default="0-0")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--vm", type=float, help="membrane potential (V)")
    group.add_argument("--vapp", type=float, help="applied voltage (V); v_m = v_app + v_phi")
    p.add_argument("--parameters", help="memcapacitor parameter ledger (YAML)")

    p = sub.add_parser("characterize", help="Q-V, C-V, paired-pulse and steady C-V tables")
    p.add_argument("--composition", action="append",
                   help="composition such as 100-0 (repeatable; default: all twelve)")
    p.add_argument("--protocol", choices=("qv", "cv", "ppf", "steady", "all"), default="all")
    p.add_argument("--freq", type=float, default=0.05, help="sweep frequency (Hz)")
    p.add_argument("--v-range", type=float, nargs=2, default=(-0.2, 0.2), metavar=("LO", "HI"))
    p.add_argument("--step", type=float, default=1e-3, help="sweep voltage step (V)")
    p.add_argument("--amplitude", type=float, default=0.15, help="paired-pulse amplitude (V)")
    p.add_argument("--parameters", help="memcapacitor parameter ledger (YAML)")
    _common(p, config=False)

    for name, kind in (("run-sonds", "sonds"), ("run-henon", "henon"), ("run-memristor", "memristor")):
        p = sub.add_parser(name, help=f"{kind} benchmark grid")
        p.set_defaults(kind=kind)
        _common(p)
    return parser


def _ledger(args):
    return load_ledger(getattr(args, "parameters", None))


def _compositions(names):
    if not names:
        return list(STANDARD_COMPOSITIONS)
    out = []
    for name in names:
        try:
            out.append(MembraneComposition.parse(name))
        except DomainError as exc:
            raise ConfigError(str(exc), field="--composition") from None
    return out


def cmd_devices(args, out):
    ledger = _ledger(args)
    rows = []
    print(f"{'device':>8} {'type':>8} {'v_phi (mV)':>11} {'C_rest (pF)':>12}", file=out)
    for comp in STANDARD_COMPOSITIONS:
        dev = ledger.memcapacitor(comp)
        c_rest = steady_state(dev.params, dev.v_phi).C_inf
        rows.append((comp.label, comp.membrane_type, dev.v_phi, c_rest))
        print(f"{comp.label:>8} {comp.membrane_type:>8} {1e3 * dev.v_phi:>11.1f} "
              f"{1e12 * c_rest:>12.3f}", file=out)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_long_csv(Path(args.out) / "devices.csv", rows,
                       ("device", "membrane_type", "v_phi_V", "resting_capacitance_F"))
    return 0


def cmd_steady_state(args, out):
    ledger = _ledger(args)
    dev = ledger.memcapacitor(_compositions([args.composition])[0])
    if args.vm is not None:
        vm = args.vm
    else:
        vm = (args.vapp or 0.0) + dev.v_phi
    ss = steady_state(dev.params, vm)
    p = dev.params
    print(f"composition {dev.label}  v_phi = {1e3 * dev.v_phi:.1f} mV  v_m = {1e3 * vm:.3f} mV", file=out)
    print(f"W_inf = {ss.W_inf:.6e} m   (W0 = {p.W0:.6e} m, ratio {ss.W_inf / p.W0:.6f})", file=out)
    print(f"R_inf = {ss.R_inf:.6e} m   (R0 = {p.R0:.6e} m, ratio {ss.R_inf / p.R0:.6f})", file=out)
    print(f"C_inf = {ss.C_inf:.6e} F   (ratio to rest {ss.C_inf / p.resting_capacitance:.6f})", file=out)
    return 0


def cmd_characterize(args, out):
    ledger = _ledger(args)
    if not args.out:
        raise ConfigError("an output directory is required", field="--out")
    config = IntegratorConfig(args.dt_max) if args.dt_max else None
    protocols = ("qv", "cv", "ppf", "steady") if args.protocol == "all" else (args.protocol,)
    rows = []
    pd_grid = [0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0]
    ipi_grid = [0.05, 0.1, 0.25, 0.5, 1.0, 2.5]
    for comp in _compositions(args.composition):
        dev = ledger.memcapacitor(comp)
        if "qv" in protocols:
            q = qv_sweep(dev, args.v_range, args.freq, args.step, config=config)
            rows += [(comp.label, "qv", r[2], r[3], r[4], "charge", r[5]) for r in sweep_rows(comp.label, q)]
            rows.append((comp.label, "qv", args.freq, "", "", "pinch_voltage", q.pinch_voltage))
            print(f"{comp.label:>8}  pinch {1e3 * q.pinch_voltage:+7.1f} mV  (-v_phi "
                  f"{-1e3 * dev.v_phi:+7.1f} mV)", file=out)
        if "cv" in protocols:
            c = cv_sweep(dev, args.v_range, args.freq, args.step, config=config)
            rows += [(comp.label, "cv", r[2], r[3], r[4], "capacitance", r[5]) for r in sweep_rows(comp.label, c)]
            rows.append((comp.label, "cv", args.freq, "", "", "lobe_area", c.lobe_area))
            print(f"{comp.label:>8}  lobe area {c.lobe_area:+.3e} F*V", file=out)
        if "ppf" in protocols:
            grid = ppf_map(dev, pd_grid, ipi_grid, args.amplitude, config)
            for i, pd in enumerate(pd_grid):
                for j, ipi in enumerate(ipi_grid):
                    rows.append((comp.label, "ppf", args.amplitude, pd, ipi, "ppf_index_pct",
                                 float(grid[i, j])))
        if "steady" in protocols:
            v = np.linspace(args.v_range[0], args.v_range[1], 41)
            for vi, ci in zip(v, steady_cv(dev, v)):
                rows.append((comp.label, "steady", "", "", float(vi), "capacitance", float(ci)))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_long_csv(out_dir / "characterize.csv", rows,
                   ("device", "protocol", "param1", "param2", "param3", "quantity", "value"))
    manifest = {"library": "memcaprc", "version": __version__, "protocols": list(protocols),
                "freq_Hz": args.freq, "v_range_V": list(args.v_range), "step_V": args.step,
                "amplitude_V": args.amplitude, "pd_grid_s": pd_grid, "ipi_grid_s": ipi_grid,
                "dt_max": config.dt_max if config else None,
                "parameters": {"source": ledger.source, "ledger": ledger.raw},
                "columns": {"qv/cv": "param1=freq, param2=branch, param3=voltage",
                            "ppf": "param1=amplitude, param2=pd, param3=ipi",
                            "steady": "param3=applied voltage"}}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        cfg = load(args.config)
        if cfg.experiment != args.kind:
            raise ConfigError(f"config describes a '{cfg.experiment}' run, not '{args.kind}'",
                              field="experiment")
    else:
        raw = {"experiment": args.kind, "seed": 0 if args.seed is None else args.seed}
        if args.kind == "memristor":
            raw["memristor"] = {}
        cfg = from_dict(raw)
    return cfg.with_overrides(seed=args.seed, dt_max=args.dt_max)


def cmd_run(args, out):
    cfg = _experiment_config(args)
    if args.jobs < 1:
        raise ConfigError("must be at least 1", field="--jobs")
    result = run(cfg, jobs=args.jobs)
    print(f"{'cell':>4} {'task':>6} {'mode':>13} {'encoding':>11} {'observable':>12} "
          f"{'width (s)':>9} {'range (V)':>9} {'offsets (V)':>11} {'metric':>6} "
          f"{'train':>11} {'test':>11} {'time (s)':>8}", file=out)
    for c in result.cells:
        print(f"{c.cell:>4} {c.task:>6} {c.mode:>13} {c.encoding:>11} {c.observable:>12} "
              f"{c.pulse_width:>9.4g} {c.v_range:>9.4g} {c.offset_range:>11.4g} {c.metric:>6} "
              f"{c.train:>11.4e} {c.test:>11.4e} {c.wall_time:>8.2f}", file=out)
    if args.out:
        files = write_results(result, args.out)
        (Path(args.out) / "config.yaml").write_text(dumps(cfg))
        print(f"wrote {', '.join(f.name for f in files)} and config.yaml to {args.out}", file=out)
    print(f"total wall time {result.wall_time:.1f} s", file=out)
    return 0


COMMANDS = {"devices": cmd_devices, "steady-state": cmd_steady_state,
            "characterize": cmd_characterize, "run-sonds": cmd_run, "run-henon": cmd_run,
            "run-memristor": cmd_run}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except MemcapError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
