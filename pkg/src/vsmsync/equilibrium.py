"""
Equilibrium angles of the lossless network.

Solves ``p_i = sum_j K_ij sin(theta_i - theta_j)`` for ``theta``. The power
flow Jacobian is a weighted graph Laplacian and therefore singular along
the uniform-shift direction, so one angle is pinned to zero while
iterating and the solution is shifted to zero centre-of-inertia angle
afterwards.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidInputError, NoConvergenceError
from .netmodel import NetworkSpec, electrical_power

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
IMBALANCE_TOL = 1e-9


@dataclass(frozen=True)
class EquilibriumResult:
    theta: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def jacobian(theta, spec: NetworkSpec) -> np.ndarray:
    """Derivative of :func:`electrical_power` with respect to the angles."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n,):
        raise InvalidInputError(f"theta must have length {spec.n}")
    w = spec.coupling * np.cos(theta[:, None] - theta[None, :])
    np.fill_diagonal(w, 0.0)
    return np.diag(w.sum(axis=1)) - w


def eigenvalue_floor(theta, spec: NetworkSpec) -> float:
    """Smallest eigenvalue of the Jacobian; ``>= 0`` on the stable branch."""
    return float(np.linalg.eigvalsh(jacobian(theta, spec)).min())


def coi_shift(theta, inertia) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    inertia = np.asarray(inertia, dtype=float)
    return theta - np.dot(inertia, theta) / inertia.sum()


def solve_equilibrium(
    p,
    spec: NetworkSpec,
    guess=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    pin: int | None = None,
) -> EquilibriumResult:
    """Damped Newton solve of the power balance for the equilibrium angles.

    Parameters
    ----------
    p : array_like
        Balanced injection vector (must sum to zero).
    spec : NetworkSpec
    guess : array_like, optional
        Starting angles; defaults to the flat start ``0``, which picks the
        small-angle (stable) branch.
    tol : float
        Infinity-norm tolerance on the power mismatch.
    max_iter : int
        Newton iterations before giving up.
    pin : int, optional
        Index of the angle held at zero while iterating (default: last).

    Returns
    -------
    EquilibriumResult
        Angles shifted to zero centre-of-inertia angle.

    Raises
    ------
    InfeasibleError
        If ``p`` does not sum to zero.
    NoConvergenceError
        If the mismatch is still above ``tol`` after ``max_iter``
        iterations, typically because ``p`` exceeds the transfer capacity.
    """
    n = spec.n
    p = np.asarray(p, dtype=float)
    if p.shape != (n,):
        raise InvalidInputError(f"power vector must have length {n}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("power vector contains non-finite entries")
    imbalance = p.sum()
    if abs(imbalance) > IMBALANCE_TOL:
        raise InfeasibleError(
            f"no equilibrium exists for net imbalance {imbalance:.3e} on a lossless network"
        )
    pin = n - 1 if pin is None else int(pin)
    if not 0 <= pin < n:
        raise InvalidInputError(f"pin index {pin} out of range")

    theta = np.zeros(n) if guess is None else np.array(guess, dtype=float)
    if theta.shape != (n,):
        raise InvalidInputError(f"guess must have length {n}")
    theta = theta - theta[pin]
    free = np.array([i for i in range(n) if i != pin], dtype=int)

    def mismatch(th):
        return p - electrical_power(th, spec)

    res = mismatch(theta)
    norm = float(np.max(np.abs(res)))
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        J = jacobian(theta, spec)[np.ix_(free, free)]
        try:
            step = np.linalg.solve(J, res[free])
        except np.linalg.LinAlgError:
            raise NoConvergenceError(
                f"singular power-flow Jacobian at iteration {it} (residual {norm:.3e})",
                residual_norm=norm,
                iterations=it,
            ) from None
        if not np.all(np.isfinite(step)):
            raise NoConvergenceError(
                f"non-finite Newton step at iteration {it}", residual_norm=norm, iterations=it
            )

        # backtracking on the 2-norm of the mismatch
        merit = float(res @ res)
        alpha = 1.0
        while True:
            trial = theta.copy()
            trial[free] += alpha * step
            trial_res = mismatch(trial)
            if float(trial_res @ trial_res) <= (1.0 - 1e-4 * alpha) * merit or alpha < 1e-6:
                break
            alpha *= 0.5
        theta, res = trial, trial_res
        norm = float(np.max(np.abs(res)))
        log.debug("newton iter %d: alpha=%.3g residual=%.3e", it, alpha, norm)

    if norm > tol:
        raise NoConvergenceError(
            f"equilibrium solve did not converge in {max_iter} iterations "
            f"(residual {norm:.3e}); injections may exceed coupling capacity",
            residual_norm=norm,
            iterations=it,
        )

    theta = coi_shift(theta, spec.inertia)
    norm = float(np.max(np.abs(mismatch(theta))))
    return EquilibriumResult(theta=theta, residual_norm=norm, iterations=it, converged=True)
