"""
Characterizing single memcapacitors
===================================

Walks through the device model: internal offsets, the equilibrium
capacitance curve, pinched Q-V loops, C-V lobes and paired-pulse memory.
Run with ``python3 demos/01_device_characterization.py``.
"""

import numpy as np

from memcaprc import STANDARD_COMPOSITIONS, load_ledger, steady_state
from memcaprc.characterize import cv_sweep, ppf_map, qv_sweep, steady_cv
from memcaprc.dynamics import pull_in_voltage

ledger = load_ledger()

# Each composition carries a built-in offset set by the leaflet asymmetry.
for comp in STANDARD_COMPOSITIONS:
    dev = ledger.memcapacitor(comp)
    print(f"{comp.label:>8}  v_phi = {1e3 * dev.v_phi:+7.1f} mV")

# Equilibrium capacitance is even in the membrane potential, so an
# asymmetric device has its minimum at v_app = -v_phi.
sym, asym = ledger.memcapacitor("0-0"), ledger.memcapacitor("100-0")
v = np.linspace(-0.2, 0.2, 9)
print("\nsteady C (pF) vs v_app")
print("v_app  ", " ".join(f"{x:+6.2f}" for x in v))
print("0-0    ", " ".join(f"{1e12 * c:6.1f}" for c in steady_cv(sym, v)))
print("100-0  ", " ".join(f"{1e12 * c:6.1f}" for c in steady_cv(asym, v)))
print(f"pull-in |v_m| = {pull_in_voltage(sym.params):.3f} V")
ss = steady_state(sym.params, 0.15)
print(f"0-0 at 150 mV: C grows {ss.C_inf / sym.params.resting_capacitance:.2f}x")

# Q-V loops pinch where the membrane potential is zero.
print("\nQ-V pinch points at 50 mHz")
for label in ("100-0", "0-0", "0-60", "0-100"):
    dev = ledger.memcapacitor(label)
    q = qv_sweep(dev)
    print(f"{label:>8}  pinch {1e3 * q.pinch_voltage:+7.1f} mV, -v_phi {-1e3 * dev.v_phi:+7.1f} mV")

# The oriented lobe area flips sign between mirror-type asymmetries and
# shrinks away from the device's characteristic frequency.
print("\nC-V lobe area (F*V)")
for label in ("0-80", "100-0"):
    dev = ledger.memcapacitor(label)
    areas = [cv_sweep(dev, (-0.25, 0.25), f, step=2e-3).lobe_area for f in (1e-3, 0.05, 10.0)]
    print(f"{label:>8}  1 mHz {areas[0]:+.2e}  50 mHz {areas[1]:+.2e}  10 Hz {areas[2]:+.2e}")

# Paired pulses: the symmetric device facilitates, 100-0 depresses.
pd = [0.01, 0.05, 0.25, 1.0]
ipi = [0.1, 0.5, 2.0]
for label in ("0-0", "100-0"):
    grid = ppf_map(ledger.memcapacitor(label), pd, ipi)
    print(f"\n{label} paired-pulse index (%), rows pd = {pd} s, cols ipi = {ipi} s")
    print(np.array2string(grid, precision=2, suppress_small=True))
