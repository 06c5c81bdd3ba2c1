"""Heterogeneous memcapacitor reservoir computing, simulated.

Lipid-bilayer memcapacitors whose internal dipole offsets differ act as a
bank of parallel, nonlinear, fading-memory nodes. This package models the
devices, encodes task inputs as voltage pulses, samples device states into a
state matrix and trains a linear readout on it.
"""

__version__ = "0.1.0"

from .device import (  # noqa: E402
    STANDARD_COMPOSITIONS, ArmendarezMemristor, DuMemristor, MembraneComposition,
    Memcapacitor, MemcapacitorParams, MemcapacitorState, capacitance, charge,
    internal_offset, load_ledger, load_memristor_params, memcap_derivatives,
)
from .dynamics import IntegratorConfig, SteadyState, integrate, steady_state  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError, DomainError, EncodingError, IntegrationError, MemcapError, MetricError,
    SolverError,
)
