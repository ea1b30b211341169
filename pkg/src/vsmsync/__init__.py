"""Second-order Kuramoto simulator for grid-forming inverter networks."""

from .equilibrium import EquilibriumResult, jacobian, solve_equilibrium
from .errors import (
    DivergenceError,
    InfeasibleError,
    InvalidInputError,
    NoConvergenceError,
    NumericError,
    VsmSyncError,
)
from .metrics import (
    PowerSharingRow,
    TransientMetrics,
    coi_relative,
    order_parameter,
    power_sharing_table,
    transient_metrics,
)
from .netmodel import (
    ControlLaw,
    NetworkSpec,
    PowerSchedule,
    SimState,
    Variant,
    balanced_step,
    control_effort,
    electrical_power,
    power_at,
    rhs,
)
from .presets import table1_scenario
from .simulate import Scenario, Trajectory, rk4_step, run

__version__ = "0.1.0"

__all__ = [
    "ControlLaw",
    "DivergenceError",
    "EquilibriumResult",
    "InfeasibleError",
    "InvalidInputError",
    "NetworkSpec",
    "NoConvergenceError",
    "NumericError",
    "PowerSchedule",
    "PowerSharingRow",
    "Scenario",
    "SimState",
    "Trajectory",
    "TransientMetrics",
    "Variant",
    "VsmSyncError",
    "balanced_step",
    "coi_relative",
    "control_effort",
    "electrical_power",
    "jacobian",
    "order_parameter",
    "power_at",
    "power_sharing_table",
    "rhs",
    "rk4_step",
    "run",
    "solve_equilibrium",
    "table1_scenario",
    "transient_metrics",
]
