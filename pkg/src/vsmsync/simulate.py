"""Fixed-step RK4 integration of a disturbance scenario."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumResult, solve_equilibrium
from .errors import DivergenceError, InvalidInputError
from .netmodel import (
    ControlLaw,
    NetworkSpec,
    PowerSchedule,
    SimState,
    Variant,
    _pe,
    vector_field,
)

log = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_T_END = 30.0
DEFAULT_SAMPLE_EVERY = 10
ANGLE_LIMIT = 1e3
GRID_TOL = 1e-12


def _grid_index(t, dt, name):
    k = int(round(t / dt))
    if abs(k * dt - t) > GRID_TOL * max(1.0, abs(t)):
        raise InvalidInputError(f"{name}={t!r} is not an integer multiple of dt={dt!r}")
    return k


@dataclass(frozen=True)
class Scenario:
    spec: NetworkSpec
    law: ControlLaw
    sched: PowerSchedule
    t_end: float = DEFAULT_T_END
    dt: float = DEFAULT_DT
    sample_every: int = DEFAULT_SAMPLE_EVERY

    def __post_init__(self):
        if self.sched.n != self.spec.n:
            raise InvalidInputError(
                f"power schedule has {self.sched.n} entries, network has {self.spec.n} nodes"
            )
        self.law.check_size(self.spec.n)
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError("dt must be positive")
        if not self.t_end > self.sched.t0:
            raise InvalidInputError(f"t_end={self.t_end} must exceed step time t0={self.sched.t0}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise InvalidInputError("sample_every must be a positive integer")
        _grid_index(self.sched.t0, self.dt, "t0")
        _grid_index(self.t_end, self.dt, "t_end")

    @property
    def n_steps(self) -> int:
        return _grid_index(self.t_end, self.dt, "t_end")

    @property
    def step_index(self) -> int:
        return _grid_index(self.sched.t0, self.dt, "t0")

    def with_grid(self, dt=None, t_end=None, sample_every=None) -> "Scenario":
        return Scenario(
            self.spec,
            self.law,
            self.sched,
            t_end=self.t_end if t_end is None else t_end,
            dt=self.dt if dt is None else dt,
            sample_every=self.sample_every if sample_every is None else sample_every,
        )


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution. Array rows correspond to ``times``."""

    times: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    z: np.ndarray
    control: np.ndarray
    pe: np.ndarray
    equilibrium: EquilibriumResult

    def __len__(self):
        return self.times.size

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    def state(self, k: int) -> SimState:
        return SimState(self.theta[k].copy(), self.omega[k].copy(), self.z[k].copy())

    @property
    def states(self) -> list[SimState]:
        return [self.state(k) for k in range(len(self))]

    @property
    def final(self) -> SimState:
        return self.state(-1)


def rk4_step(t: float, y, dt: float, f) -> np.ndarray:
    """One classical Runge-Kutta step of ``dy/dt = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise DivergenceError(f"non-finite Runge-Kutta stage at t={t:.6g}", time=t)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def run(scenario: Scenario, equilibrium: EquilibriumResult | None = None) -> Trajectory:
    """Integrate ``scenario`` from its pre-step equilibrium to ``t_end``.

    The schedule step is resolved per step index rather than by comparing
    floating-point times, so every stage of a step sees the same power
    vector and the step lands exactly on a grid point.
    """
    spec, law, sched = scenario.spec, scenario.law, scenario.sched
    n = spec.n
    dt = scenario.dt
    n_steps = scenario.n_steps
    k0 = scenario.step_index
    every = int(scenario.sample_every)

    if equilibrium is None:
        equilibrium = solve_equilibrium(sched.p_base, spec)
    y = np.concatenate([equilibrium.theta, np.zeros(2 * n)])

    fields = (vector_field(spec, law, sched.p_base), vector_field(spec, law, sched.p_after))
    stepper = (lambda t, y, f=fields[0]: f(y), lambda t, y, f=fields[1]: f(y))

    sample_idx = sorted(set(range(0, n_steps + 1, every)) | {k0, n_steps})
    samples = np.empty((len(sample_idx), 3 * n))
    times = np.empty(len(sample_idx))
    next_sample = 0

    for k in range(n_steps + 1):
        if k == sample_idx[next_sample]:
            samples[next_sample] = y
            times[next_sample] = k * dt
            next_sample += 1
        if k == n_steps:
            break
        t = k * dt
        y = rk4_step(t, y, dt, stepper[k >= k0])
        if np.max(np.abs(y[:n])) > ANGLE_LIMIT:
            raise DivergenceError(f"angles exceeded {ANGLE_LIMIT:g} rad at t={(k + 1) * dt:.6g}", time=(k + 1) * dt)

    times[sample_idx.index(k0)] = sched.t0
    times[-1] = scenario.t_end

    theta = samples[:, :n]
    omega = samples[:, n : 2 * n]
    z = samples[:, 2 * n :]
    pe = np.array([_pe(th, spec.coupling) for th in theta])
    if law.variant is Variant.DROOP:
        p = np.where(np.asarray(sample_idx)[:, None] >= k0, sched.p_after, sched.p_base)
        omega = -law.droop_gain * (pe - p)
    if law.is_pi:
        control = -law.kp * omega - law.ki * z
    else:
        control = np.zeros_like(omega)
    log.info("integrated %d steps of %s, %d samples", n_steps, law.variant.value, times.size)
    return Trajectory(times, theta.copy(), omega.copy(), z.copy(), control, pe, equilibrium)
