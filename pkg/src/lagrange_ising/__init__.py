"""Ising machines as Lagrange-multiplier optimizers: dynamics, oracles and tooling."""

from .errors import (
    DimensionError,
    DivergenceError,
    FieldError,
    FormatError,
    IsingError,
    NotPSDError,
    SizeGuardError,
    StateError,
    UnsupportedError,
)
from .ising import (
    EnergyReport,
    IsingInstance,
    absorb_field,
    brute_force_ground,
    cut_value,
    energy,
    load_instance,
    parse_gset,
    random_instance,
    round_to_spins,
    to_gset,
)
from .engine import GainSchedule, IntegratorConfig, RunRecord, integrate, schedule_value
from .oscillators import OscParams
from .solvers import SOLVERS, run_solver

__version__ = "0.1.0"
