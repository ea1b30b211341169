import numpy as np
import pytest

from vsmsync.presets import table1_scenario
from vsmsync.simulate import run


@pytest.fixture(scope="session")
def natural():
    sc = table1_scenario("natural")
    return sc, run(sc)


@pytest.fixture(scope="session")
def washout():
    sc = table1_scenario("pi-washout")
    return sc, run(sc)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def brute_force_pe(theta, K):
    """Pairwise loop, independent of the vectorised implementation."""
    import math

    n = len(theta)
    return np.array(
        [sum(K[i][j] * math.sin(theta[i] - theta[j]) for j in range(n)) for i in range(n)]
    )


def scipy_reference(sc, t_end):
    """Tight-tolerance DOP853 open-loop solution, integrated piecewise across the step."""
    from scipy.integrate import solve_ivp

    from vsmsync.equilibrium import solve_equilibrium

    spec, sched, n = sc.spec, sc.sched, sc.spec.n
    K = spec.coupling

    def f(p):
        def g(t, y):
            th, w = y[:n], y[n:]
            pe = (K * np.sin(th[:, None] - th[None, :])).sum(1)
            return np.concatenate([w, (p - pe - spec.damping * w) / spec.inertia])

        return g

    y0 = np.concatenate([solve_equilibrium(sched.p_base, spec).theta, np.zeros(n)])
    kw = dict(method="DOP853", rtol=1e-13, atol=1e-14)
    y1 = solve_ivp(f(sched.p_base), (0, sched.t0), y0, **kw).y[:, -1]
    return solve_ivp(f(sched.p_after), (sched.t0, t_end), y1, **kw).y[:, -1]


ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
