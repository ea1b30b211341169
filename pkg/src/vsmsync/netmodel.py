"""
Network data model and right-hand side of the coupled swing dynamics.

All quantities are per-unit and expressed in a frame rotating at the
reference frequency, so ``omega`` is a frequency *deviation* and the
frame origin itself never enters the equations. The network is lossless
with unit voltage magnitudes folded into the coupling matrix, giving

    P_e,i = sum_j K_ij sin(theta_i - theta_j)

Each node follows one of four frequency laws (see :class:`Variant`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError

BALANCE_TOL = 1e-12


def _vector(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise InvalidInputError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Inertia, damping and coupling of an ``n``-oscillator network.

    ``coupling`` may be given as a full symmetric matrix with zero diagonal
    or as a scalar ``K0``, which builds the all-to-all matrix ``K0 (1 - I)``.
    """

    inertia: np.ndarray
    damping: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.ndim != 1 or inertia.size < 1:
            raise InvalidInputError("inertia must be a non-empty vector")
        n = inertia.size
        inertia = _vector(inertia, n, "inertia")
        damping = _vector(self.damping, n, "damping")
        coupling = np.asarray(self.coupling, dtype=float)
        if coupling.ndim == 0:
            coupling = float(coupling) * (1.0 - np.eye(n))
        if coupling.shape != (n, n):
            raise InvalidInputError(f"coupling must be {n}x{n}, got shape {coupling.shape}")
        if not np.all(np.isfinite(coupling)):
            raise InvalidInputError("coupling contains non-finite entries")
        if np.any(inertia <= 0):
            raise InvalidInputError("all inertia constants must be positive")
        if np.any(damping <= 0):
            raise InvalidInputError("all damping coefficients must be positive")
        if np.any(coupling < 0):
            raise InvalidInputError("coupling entries must be non-negative")
        if not np.array_equal(coupling, coupling.T):
            raise InvalidInputError("coupling matrix must be symmetric")
        if np.any(np.diag(coupling) != 0):
            raise InvalidInputError("coupling matrix must have a zero diagonal")
        for name, arr in (("inertia", inertia), ("damping", damping), ("coupling", coupling)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.inertia.size

    @classmethod
    def all_to_all(cls, inertia, damping, k0: float) -> "NetworkSpec":
        return cls(inertia, damping, float(k0))

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (
            np.array_equal(self.inertia, other.inertia)
            and np.array_equal(self.damping, other.damping)
            and np.array_equal(self.coupling, other.coupling)
        )

    __hash__ = None


class Variant(enum.Enum):
    """Node frequency law.

    OPEN_LOOP    plain swing dynamics (VSM without frequency tracking)
    PI           swing dynamics plus PI tracking of the broadcast reference
    PI_WASHOUT   as PI, with a leaky integrator so the effort vanishes at rest
    DROOP        first-order power-frequency droop
    """

    OPEN_LOOP = "open-loop"
    PI = "pi"
    PI_WASHOUT = "pi-washout"
    DROOP = "droop"


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """Frequency law and its gains.

    Gains that the chosen variant does not use may be left as ``None``.
    """

    variant: Variant
    kp: np.ndarray | None = None
    ki: np.ndarray | None = None
    tau: float | None = None
    droop_gain: np.ndarray | None = None

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        for name in ("kp", "ki", "droop_gain"):
            value = getattr(self, name)
            if value is not None:
                arr = np.atleast_1d(np.asarray(value, dtype=float))
                if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                    raise InvalidInputError(f"{name} must be a finite vector")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.tau is not None:
            object.__setattr__(self, "tau", float(self.tau))

        if variant in (Variant.PI, Variant.PI_WASHOUT):
            if self.kp is None or self.ki is None:
                raise InvalidInputError(f"{variant.value} law requires kp and ki")
            if np.any(self.kp < 0) or np.any(self.ki < 0):
                raise InvalidInputError("kp and ki must be non-negative")
        if variant is Variant.PI_WASHOUT:
            if self.tau is None or not np.isfinite(self.tau) or self.tau <= 0:
                raise InvalidInputError("pi-washout law requires a positive tau")
        if variant is Variant.DROOP:
            if self.droop_gain is None:
                raise InvalidInputError("droop law requires droop_gain")
            if np.any(self.droop_gain <= 0):
                raise InvalidInputError("droop_gain entries must be positive")

    @classmethod
    def open_loop(cls) -> "ControlLaw":
        return cls(Variant.OPEN_LOOP)

    @property
    def is_pi(self) -> bool:
        return self.variant in (Variant.PI, Variant.PI_WASHOUT)

    def check_size(self, n: int) -> None:
        """Raise if a gain vector used by this variant does not have length ``n``."""
        used = {
            Variant.OPEN_LOOP: (),
            Variant.PI: ("kp", "ki"),
            Variant.PI_WASHOUT: ("kp", "ki"),
            Variant.DROOP: ("droop_gain",),
        }[self.variant]
        for name in used:
            if getattr(self, name).shape != (n,):
                raise InvalidInputError(f"{name} must have length {n}")

    def __eq__(self, other):
        if not isinstance(other, ControlLaw):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is b
            return np.array_equal(a, b)

        return (
            self.variant is other.variant
            and same(self.kp, other.kp)
            and same(self.ki, other.ki)
            and self.tau == other.tau
            and same(self.droop_gain, other.droop_gain)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PowerSchedule:
    """Mechanical power ``P(t) = p_base + [t >= t0] p_step``; both vectors balanced."""

    p_base: np.ndarray
    p_step: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        p_base = np.atleast_1d(np.asarray(self.p_base, dtype=float))
        p_step = np.atleast_1d(np.asarray(self.p_step, dtype=float))
        if p_base.ndim != 1 or p_base.shape != p_step.shape:
            raise InvalidInputError("p_base and p_step must be vectors of equal length")
        if not (np.all(np.isfinite(p_base)) and np.all(np.isfinite(p_step))):
            raise InvalidInputError("power vectors contain non-finite entries")
        if abs(p_base.sum()) > BALANCE_TOL:
            raise InvalidInputError(f"p_base must sum to zero, got {p_base.sum():.3e}")
        if abs(p_step.sum()) > BALANCE_TOL:
            raise InvalidInputError(f"p_step must sum to zero, got {p_step.sum():.3e}")
        t0 = float(self.t0)
        if not np.isfinite(t0) or t0 < 0:
            raise InvalidInputError("t0 must be a non-negative finite time")
        p_base.setflags(write=False)
        p_step.setflags(write=False)
        object.__setattr__(self, "p_base", p_base)
        object.__setattr__(self, "p_step", p_step)
        object.__setattr__(self, "t0", t0)

    @property
    def n(self) -> int:
        return self.p_base.size

    @property
    def p_after(self) -> np.ndarray:
        return self.p_base + self.p_step

    def __eq__(self, other):
        if not isinstance(other, PowerSchedule):
            return NotImplemented
        return (
            np.array_equal(self.p_base, other.p_base)
            and np.array_equal(self.p_step, other.p_step)
            and self.t0 == other.t0
        )

    __hash__ = None


@dataclass
class SimState:
    """Angles, frequency deviations and integrator states of all nodes."""

    theta: np.ndarray
    omega: np.ndarray
    z: np.ndarray | None = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        n = self.theta.size
        self.omega = _as_len(self.omega, n, "omega")
        self.z = np.zeros(n) if self.z is None else _as_len(self.z, n, "z")

    @property
    def n(self) -> int:
        return self.theta.size

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.theta, self.omega, self.z])

    @classmethod
    def from_array(cls, y) -> "SimState":
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size % 3:
            raise InvalidInputError("flat state length must be a multiple of 3")
        n = y.size // 3
        return cls(y[:n].copy(), y[n : 2 * n].copy(), y[2 * n :].copy())


def _as_len(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise InvalidInputError(f"{name} must have length {n}, got shape {arr.shape}")
    return arr


def electrical_power(theta, spec: NetworkSpec) -> np.ndarray:
    """Active power injected into the network at every node."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n,):
        raise InvalidInputError(f"theta must have length {spec.n}, got shape {theta.shape}")
    return _pe(theta, spec.coupling)


def _pe(theta, coupling):
    return np.sum(coupling * np.sin(theta[:, None] - theta[None, :]), axis=1)


def power_at(t: float, sched: PowerSchedule) -> np.ndarray:
    """Mechanical power at time ``t``; the step is already active at ``t == t0``."""
    if t >= sched.t0:
        return sched.p_base + sched.p_step
    return sched.p_base.copy()


def balanced_step(node: int, magnitude: float, n: int) -> np.ndarray:
    """Step of ``magnitude`` on ``node`` with the mean removed so it sums to zero."""
    if n < 2:
        raise InvalidInputError("a balanced step needs at least two nodes")
    if not 0 <= node < n:
        raise InvalidInputError(f"node index {node} out of range for n={n}")
    step = np.full(n, -magnitude / n)
    step[node] = magnitude * (n - 1) / n
    return step


def control_effort(state: SimState, law: ControlLaw) -> np.ndarray:
    """PI control power ``u = -kp*omega - ki*z``; zero for laws without PI."""
    if not law.is_pi:
        return np.zeros(state.n)
    return -law.kp * state.omega - law.ki * state.z


def lyapunov_energy(theta, omega, p, spec: NetworkSpec) -> float:
    """Energy function of the open-loop network at constant power ``p``.

    Kinetic plus potential energy. Along open-loop trajectories its time derivative is
    ``-sum(D_i omega_i**2)``, so it cannot increase.
    """
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    kinetic = 0.5 * np.dot(spec.inertia, omega**2)
    diff = theta[:, None] - theta[None, :]
    # each pair appears twice in the full sum
    potential = 0.5 * np.sum(spec.coupling * (1.0 - np.cos(diff))) - np.dot(p, theta)
    return float(kinetic + potential)


def vector_field(spec: NetworkSpec, law: ControlLaw, p):
    """Return ``f(y) -> dy/dt`` on the flat state for a fixed power vector ``p``.

    This is the fast path used by the integrator; :func:`rhs` wraps it with
    the schedule lookup and input checks.
    """
    n = spec.n
    law.check_size(n)
    p = np.asarray(p, dtype=float)
    K = spec.coupling
    inv_m = 1.0 / spec.inertia
    d = spec.damping
    variant = law.variant
    zeros = np.zeros(n)

    if variant is Variant.DROOP:
        mp = law.droop_gain

        def f(y):
            theta = y[:n]
            dtheta = -mp * (_pe(theta, K) - p)
            return np.concatenate([dtheta, zeros, zeros])

        return f

    if variant is Variant.OPEN_LOOP:

        def f(y):
            theta = y[:n]
            omega = y[n : 2 * n]
            domega = (p - _pe(theta, K) - d * omega) * inv_m
            return np.concatenate([omega, domega, zeros])

        return f

    kp, ki = law.kp, law.ki
    leak = 1.0 / law.tau if variant is Variant.PI_WASHOUT else 0.0

    def f(y):
        theta = y[:n]
        omega = y[n : 2 * n]
        z = y[2 * n :]
        u = -kp * omega - ki * z
        domega = (p - _pe(theta, K) - d * omega + u) * inv_m
        return np.concatenate([omega, domega, omega - leak * z])

    return f


def rhs(t: float, state: SimState, spec: NetworkSpec, law: ControlLaw, sched: PowerSchedule) -> SimState:
    """Time derivative of ``state`` at time ``t``.

    For the droop law only the angle derivative is non-zero; the ``omega``
    slot is left constant here and the simulator overwrites it with the
    instantaneous angle rate when recording samples.
    """
    y = state.to_array()
    if y.size != 3 * spec.n:
        raise InvalidInputError(f"state has {state.n} nodes, network has {spec.n}")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        idx = int(bad[0]) % spec.n
        raise NumericError(f"non-finite state entry at node index {idx}", index=idx)
    f = vector_field(spec, law, power_at(t, sched))
    return SimState.from_array(f(y))

