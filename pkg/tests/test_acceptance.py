"""Exit criteria for the three-oscillator study, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import time

import numpy as np

from conftest import brute_force_pe, record, scipy_reference
from vsmsync.cli import write_trajectory_csv
from vsmsync.equilibrium import jacobian, solve_equilibrium
from vsmsync.errors import InfeasibleError, NoConvergenceError
from vsmsync.metrics import power_sharing_table, transient_metrics
from vsmsync.netmodel import SimState, Variant, control_effort, electrical_power, lyapunov_energy, rhs, vector_field
from vsmsync.presets import table1_law, table1_scenario
from vsmsync.simulate import rk4_step, run

BAND = 0.005
TABLE_PM = np.array([1.9333, -0.96667, -0.96667])
SEPARATION_ORACLE = math.asin(1.9333 / 16)


def check(criterion, checks):
    """Record and assert a list of ``(label, ok, value)`` sub-checks."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{label}={value}{'' if good else ' (FAIL)'}" for label, good, value in checks)
    record(criterion, ok, detail)
    failed = [c[0] for c in checks if not c[1]]
    assert not failed, f"{criterion}: failed {failed}: {detail}"


def rows_of(run_pair):
    sc, tr = run_pair
    return power_sharing_table(tr, sc.sched, sc.spec, sc.law)


def test_c1_table2_open_loop_power_sharing(natural):
    sc = natural[0]
    rows = rows_of(natural)
    pm = np.array([r.pm for r in rows])
    gap = max(abs(r.pm - r.pe) for r in rows)
    check(
        "C1 open-loop steady-state sharing",
        [
            ("P_m==p_base+p_step", np.array_equal(pm, sc.sched.p_base + sc.sched.p_step), pm.round(5).tolist()),
            ("P_m~table", np.allclose(pm, TABLE_PM, atol=5e-5), TABLE_PM.tolist()),
            ("max|P_m-P_e|<=1e-3", gap <= 1e-3, f"{gap:.2e}"),
        ],
    )


def test_c2_table3_washout_power_sharing(washout):
    rows = rows_of(washout)
    u_end = max(abs(r.control) for r in rows)
    gap = max(abs(r.pm - r.pe) for r in rows)
    check(
        "C2 washout steady-state sharing",
        [
            ("max|u(t_end)|<=1e-5", u_end <= 1e-5, f"{u_end:.2e}"),
            ("max|P_m-P_e|<=1e-4", gap <= 1e-4, f"{gap:.2e}"),
        ],
    )


def test_c3_overshoot_contrast(natural, washout):
    a = transient_metrics(natural[1], 3.0, BAND)
    b = transient_metrics(washout[1], 3.0, BAND)
    ratio = b.peak_freq_dev / a.peak_freq_dev
    check(
        "C3 overshoot contrast",
        [
            ("open peak in [0.12,0.18]", 0.12 <= a.peak_freq_dev <= 0.18, f"{a.peak_freq_dev:.5f}"),
            ("washout peak<0.08", b.peak_freq_dev < 0.08, f"{b.peak_freq_dev:.5f}"),
            ("ratio<=0.55", ratio <= 0.55, f"{ratio:.4f}"),
        ],
    )


def test_c4_settling_contrast(natural, washout):
    a = transient_metrics(natural[1], 3.0, BAND)
    b = transient_metrics(washout[1], 3.0, BAND)
    check(
        "C4 settling contrast (band 0.005 rad/s)",
        [
            ("washout settling<5s", b.settled and b.settling_time < 5.0, f"{b.settling_time:.3f}s"),
            ("open settling>10s", a.settling_time > 10.0, f"{a.settling_time:.3f}s"),
        ],
    )


def test_c5_angular_separation_equality(natural, washout):
    def lead_lag(tr):
        th = tr.theta[-1]
        return max(abs(th[0] - th[1]), abs(th[0] - th[2]))

    sa, sb = lead_lag(natural[1]), lead_lag(washout[1])
    fa = transient_metrics(natural[1], 3.0).final_separation
    fb = transient_metrics(washout[1], 3.0).final_separation
    check(
        "C5 final angular separation",
        [
            ("open in [0.118,0.123]", 0.118 <= sa <= 0.123, f"{sa:.6f}"),
            ("washout in [0.118,0.123]", 0.118 <= sb <= 0.123, f"{sb:.6f}"),
            ("|open-washout|<1e-3", abs(sa - sb) < 1e-3, f"{abs(sa - sb):.1e}"),
            ("metric spread agrees", abs(fa - fb) < 1e-3 and abs(fa - sa) < 1e-12, f"{fa:.6f}"),
            ("vs asin(1.9333/16)", abs(sa - SEPARATION_ORACLE) < 1e-3, f"{SEPARATION_ORACLE:.5f}"),
        ],
    )


def test_c6_equilibrium_solver(rng):
    sc = table1_scenario("natural")
    pre = solve_equilibrium(sc.sched.p_base, sc.spec)
    post = solve_equilibrium(sc.sched.p_after, sc.spec)
    sep_err = abs((pre.theta[0] - pre.theta[1]) - math.asin(0.6 / 16))
    worst = 0.0
    h = 1e-6
    for _ in range(100):
        th = rng.uniform(-np.pi / 4, np.pi / 4, 3)
        fd = np.column_stack(
            [
                (electrical_power(th + h * e, sc.spec) - electrical_power(th - h * e, sc.spec)) / (2 * h)
                for e in np.eye(3)
            ]
        )
        worst = max(worst, np.max(np.abs(jacobian(th, sc.spec) - fd)))
    check(
        "C6 equilibrium solver",
        [
            ("pre residual<=1e-10", pre.residual_norm <= 1e-10, f"{pre.residual_norm:.1e}"),
            ("post residual<=1e-10", post.residual_norm <= 1e-10, f"{post.residual_norm:.1e}"),
            ("pre sep vs asin(0.6/16)<=1e-9", sep_err <= 1e-9, f"{sep_err:.1e}"),
            ("jacobian vs FD<=1e-6", worst <= 1e-6, f"{worst:.1e}"),
        ],
    )


def test_c7_property_suite(natural, washout, rng, tmp_path):
    sc = natural[0]
    spec = sc.spec
    checks = []

    thetas = rng.uniform(-10, 10, (1000, 3))
    flow = max(abs(electrical_power(th, spec).sum()) for th in thetas)
    checks.append(("flow conservation<=1e-12", flow <= 1e-12, f"{flow:.1e}"))

    shifts = rng.uniform(-50, 50, 1000)
    shift = max(
        np.max(np.abs(electrical_power(th + c, spec) - brute_force_pe(th, spec.coupling)))
        for th, c in zip(thetas, shifts)
    )
    checks.append(("shift invariance", shift <= 1e-10, f"{shift:.1e}"))

    # every integration step after the disturbance, open loop
    p = sc.sched.p_after
    f = vector_field(spec, sc.law, p)
    k0 = np.searchsorted(natural[1].times, 3.0)
    y = np.concatenate([natural[1].theta[k0], natural[1].omega[k0], natural[1].z[k0]])
    v_prev = lyapunov_energy(y[:3], y[3:6], p, spec)
    rise = -np.inf
    for k in range(8000):
        y = rk4_step(3.0 + k * 1e-3, y, 1e-3, lambda t, x: f(x))
        v = lyapunov_energy(y[:3], y[3:6], p, spec)
        rise = max(rise, v - v_prev)
        v_prev = v
    checks.append(("energy non-increasing (1e-8/step)", rise <= 1e-8, f"{rise:.1e}"))

    quiet = max(np.max(np.abs(tr.omega[tr.times < 3.0])) for _, tr in (natural, washout))
    checks.append(("pre-step |omega|<=1e-8", quiet <= 1e-8, f"{quiet:.1e}"))

    ref = scipy_reference(sc, 6.0)

    def err(dt):
        tr = run(sc.with_grid(dt=dt, t_end=6.0, sample_every=1000))
        return np.max(np.abs(np.concatenate([tr.theta[-1], tr.omega[-1]]) - ref))

    ratio = err(0.01) / err(0.005)
    checks.append(("RK4 order ratio 16+-3", 13.0 <= ratio <= 19.0, f"{ratio:.2f}"))

    law = table1_law(Variant.PI_WASHOUT)
    fixed = True
    for th in thetas[:200]:
        state = SimState(th, np.zeros(3), np.zeros(3))
        fixed &= bool(np.all(rhs(5.0, state, spec, law, sc.sched).z == 0.0))
        fixed &= bool(np.all(control_effort(state, law) == 0.0))
    checks.append(("washout fixed point u=0", fixed, fixed))

    blobs = []
    for k in range(2):
        tr = run(table1_scenario("pi-washout", t_end=6.0))
        path = tmp_path / f"run{k}.csv"
        write_trajectory_csv(tr, spec.inertia, path)
        blobs.append(path.read_bytes())
    checks.append(("byte-identical reruns", blobs[0] == blobs[1], len(blobs[0])))

    check("C7 property suite", checks)


def test_c8_failure_modes():
    spec = table1_scenario("natural").spec
    try:
        solve_equilibrium(np.array([0.6, -0.3, -0.2]), spec)
        unbalanced = False
    except InfeasibleError:
        unbalanced = True
    start = time.perf_counter()
    try:
        solve_equilibrium(np.array([17.0, -8.5, -8.5]), spec)
        capacity = False
    except NoConvergenceError:
        capacity = True
    elapsed = time.perf_counter() - start
    check(
        "C8 failure modes",
        [
            ("unbalanced->infeasible", unbalanced, unbalanced),
            ("|p|>sum K->no-convergence", capacity, capacity),
            ("terminates promptly", elapsed < 5.0, f"{elapsed:.3f}s"),
        ],
    )
