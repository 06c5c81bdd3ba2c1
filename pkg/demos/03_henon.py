"""
One-step prediction of the noisy Henon map
==========================================

Twelve devices, each sampled at the start and end of every ON period,
give a 25-row state matrix. The second map coordinate is reconstructed
from consecutive x values to compare the learned attractor with the true one.
"""

import numpy as np

from memcaprc.config import from_dict
from memcaprc.experiments import run
from memcaprc.tasks import henon_z

cfg = from_dict({"experiment": "henon", "seed": 1,
                 "encoding": {"pulse_widths": [0.5], "v_ranges": [0.15]}})
res = run(cfg)
cell = res.cells[0]
print(f"test NRMSE {cell.test:.3f} (train {cell.train:.3f})")

data = res.datasets["henon"]
c = data.meta["constant"]
s = data.split_index
z_true = henon_z(data.input[s:], data.target[s:], c)
z_pred = henon_z(data.input[s:], res.predictions[cell.cell][s:], c)
print(f"z reconstruction, test split: rms error {np.sqrt(np.mean((z_pred - z_true) ** 2)):.3f}, "
      f"z spans [{z_true.min():.2f}, {z_true.max():.2f}]")
print(f"noise redraws during generation: {data.meta['retries']}")
