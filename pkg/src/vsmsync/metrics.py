"""Post-processing of trajectories: relative angles, transient figures, power sharing."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError
from .netmodel import ControlLaw, NetworkSpec, PowerSchedule, control_effort, electrical_power, power_at
from .simulate import Trajectory

DEFAULT_BAND = 0.005


def coi_relative(theta, inertia) -> np.ndarray:
    """Angles relative to the centre of inertia.

    Works on a single angle vector or on a ``(samples, n)`` array.
    """
    theta = np.asarray(theta, dtype=float)
    inertia = np.asarray(inertia, dtype=float)
    if theta.shape[-1] != inertia.size:
        raise InvalidInputError("theta and inertia lengths differ")
    coi = theta @ inertia / inertia.sum()
    return theta - np.expand_dims(coi, -1)


def order_parameter(theta_rel) -> np.ndarray | float:
    """Kuramoto phase coherence ``|mean(exp(1j*theta))|`` along the last axis."""
    r = np.abs(np.mean(np.exp(1j * np.asarray(theta_rel, dtype=float)), axis=-1))
    return float(r) if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class TransientMetrics:
    peak_freq_dev: float
    settling_time: float
    settled: bool
    final_separation: float
    max_control: float
    final_control: float

    def to_dict(self) -> dict:
        return asdict(self)


def transient_metrics(traj: Trajectory, t0: float, band: float = DEFAULT_BAND, inertia=None) -> TransientMetrics:
    """Peak deviation, settling time and final spread of a trajectory.

    ``settling_time`` is measured from ``t0`` to the last sample where any
    ``|omega_i|`` exceeds ``band``; it is zero if the band is never left.
    If the final sample is still outside the band, ``settled`` is False
    and the settling time is the full post-step horizon.
    ``inertia`` defaults to equal weights when computing relative angles;
    the spread is independent of the reference anyway.
    """
    if len(traj) == 0:
        raise InvalidInputError("empty trajectory")
    after = traj.times >= t0
    if not after.any():
        raise InvalidInputError("trajectory ends before the step time")
    dev = np.max(np.abs(traj.omega), axis=1)
    peak = float(dev[after].max())
    outside = np.flatnonzero(after & (dev > band))
    settled = not (outside.size and outside[-1] == len(traj) - 1)
    settling = float(traj.times[outside[-1]] - t0) if outside.size else 0.0

    weights = np.ones(traj.n) if inertia is None else inertia
    rel = coi_relative(traj.theta[-1], weights)
    ctrl = np.max(np.abs(traj.control), axis=1)
    return TransientMetrics(
        peak_freq_dev=peak,
        settling_time=settling,
        settled=bool(settled),
        final_separation=float(rel.max() - rel.min()),
        max_control=float(ctrl.max()),
        final_control=float(ctrl[-1]),
    )


@dataclass(frozen=True)
class PowerSharingRow:
    oscillator: int
    pm: float
    control: float
    pe: float
    error: float


def power_sharing_table(
    traj: Trajectory, sched: PowerSchedule, spec: NetworkSpec, law: ControlLaw
) -> list[PowerSharingRow]:
    """Per-oscillator balance ``P_m + u - P_e`` at the last sample."""
    final = traj.final
    pm = power_at(traj.times[-1], sched)
    u = control_effort(final, law)
    pe = electrical_power(final.theta, spec)
    err = pm + u - pe
    return [
        PowerSharingRow(i + 1, float(pm[i]), float(u[i]), float(pe[i]), float(err[i]))
        for i in range(spec.n)
    ]
