"""
Offsets-encoding with memristor reservoirs
==========================================

Compares pulse-width encoding (eleven widths, no offsets) with
offsets-encoding (one width, eleven DC offsets) for two memristor models.
This is the slowest demo, about a minute on one core.
"""

from memcaprc.config import from_dict
from memcaprc.experiments import run

for model in ("du", "armendarez"):
    cfg = from_dict({"experiment": "memristor", "seed": 1,
                     "memristor": {"model": model, "observables": ["conductance"]}})
    res = run(cfg)
    for task in ("sonds", "henon"):
        pw = res.best(task=task, encoding="pulse_width")
        off = res.best(task=task, encoding="offsets")
        print(f"{model:>10} {task:>6} {pw.metric}: pulse width {pw.test:.3e}, "
              f"best offsets {off.test:.3e} (width {off.pulse_width * 1e3:g} ms, "
              f"range +/-{off.offset_range:g} V)")
