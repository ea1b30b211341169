"""Built-in three-oscillator scenarios."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .netmodel import ControlLaw, NetworkSpec, PowerSchedule, Variant, balanced_step
from .simulate import DEFAULT_DT, DEFAULT_SAMPLE_EVERY, DEFAULT_T_END, Scenario

INERTIA = (2.0, 3.0, 2.5)
DAMPING = (3.0, 3.0, 3.0)
K0 = 8.0
KP = (8.0, 4.0, 3.0)
KI = (4.0, 2.0, 1.0)
TAU = 1.0
P_BASE = (0.6, -0.3, -0.3)
STEP_NODE = 0
STEP_MAGNITUDE = 2.0
T0 = 3.0

PRESETS = {
    "natural": Variant.OPEN_LOOP,
    "pi": Variant.PI,
    "pi-washout": Variant.PI_WASHOUT,
    "droop": Variant.DROOP,
}


def table1_spec() -> NetworkSpec:
    return NetworkSpec.all_to_all(INERTIA, DAMPING, K0)


def table1_schedule() -> PowerSchedule:
    return PowerSchedule(
        np.array(P_BASE), balanced_step(STEP_NODE, STEP_MAGNITUDE, len(P_BASE)), T0
    )


def table1_law(variant: Variant) -> ControlLaw:
    if variant is Variant.OPEN_LOOP:
        return ControlLaw.open_loop()
    if variant is Variant.PI:
        return ControlLaw(variant, kp=KP, ki=KI)
    if variant is Variant.PI_WASHOUT:
        return ControlLaw(variant, kp=KP, ki=KI, tau=TAU)
    # stiffness-matched to the damping term: m_p = 1/D
    return ControlLaw(variant, droop_gain=1.0 / np.array(DAMPING))


def table1_scenario(
    name: str,
    dt: float = DEFAULT_DT,
    t_end: float = DEFAULT_T_END,
    sample_every: int = DEFAULT_SAMPLE_EVERY,
) -> Scenario:
    """Three-oscillator network of the reference study with the named control law."""
    try:
        variant = PRESETS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}"
        ) from None
    return Scenario(
        table1_spec(),
        table1_law(variant),
        table1_schedule(),
        t_end=t_end,
        dt=dt,
        sample_every=sample_every,
    )
