"""Command-line interface: ``vsmsync {run,compare,equilibrium,presets}``.

Exit codes: 0 success, 2 invalid configuration or infeasible input,
3 numerical failure (divergence or Newton non-convergence).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, dump_config, load_config, scenario_to_dict
from .equilibrium import eigenvalue_floor, solve_equilibrium
from .errors import (
    DivergenceError,
    InfeasibleError,
    InvalidInputError,
    NoConvergenceError,
    NumericError,
)
from .metrics import DEFAULT_BAND, coi_relative, order_parameter, power_sharing_table, transient_metrics
from .presets import PRESETS, table1_scenario
from .simulate import Trajectory, run

log = logging.getLogger("vsmsync")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def resolve_scenario(source: str, dt=None, t_end=None):
    """Load ``source`` as a config file, or as a preset name if no such file exists."""
    path = Path(source)
    if path.exists():
        name, scenario = load_config(path)
        label = name or path.stem
    elif source in PRESETS:
        label, scenario = source, table1_scenario(source)
    else:
        raise ConfigError(
            f"no config file or preset named {source!r} (presets: {', '.join(PRESETS)})"
        )
    if dt is not None or t_end is not None:
        try:
            scenario = scenario.with_grid(dt=dt, t_end=t_end)
        except ValueError as exc:
            raise ConfigError(f"invalid override: {exc}", source=source) from None
    return label, scenario


def trajectory_columns(traj: Trajectory, inertia) -> tuple[list[str], np.ndarray]:
    n = traj.n
    header = ["t"]
    for prefix in ("theta", "omega", "z", "u", "pe", "theta_rel"):
        header += [f"{prefix}_{i + 1}" for i in range(n)]
    header.append("r")
    rel = coi_relative(traj.theta, inertia)
    data = np.column_stack(
        [traj.times, traj.theta, traj.omega, traj.z, traj.control, traj.pe, rel, order_parameter(rel)]
    )
    return header, data


def write_trajectory_csv(traj: Trajectory, inertia, path) -> None:
    header, data = trajectory_columns(traj, inertia)
    lines = [",".join(header)]
    lines += [",".join(f"{x:.12g}" for x in row) for row in data]
    Path(path).write_text("\n".join(lines) + "\n")


def build_report(label, scenario, traj, band=DEFAULT_BAND) -> dict:
    spec, law, sched = scenario.spec, scenario.law, scenario.sched
    metrics = transient_metrics(traj, sched.t0, band=band, inertia=spec.inertia)
    rows = power_sharing_table(traj, sched, spec, law)
    eq = traj.equilibrium
    return {
        "name": label,
        "scenario": scenario_to_dict(scenario),
        "metrics": {**metrics.to_dict(), "band": band},
        "power_sharing": [vars(row) for row in rows],
        "equilibrium": {
            "theta": [float(x) for x in eq.theta],
            "iterations": eq.iterations,
            "residual_norm": eq.residual_norm,
            "eigenvalue_floor": eigenvalue_floor(eq.theta, spec),
        },
    }


def _emit_run(label, scenario, traj, output_dir: Path) -> dict:
    output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = output_dir / f"{label}.csv"
    json_path = output_dir / f"{label}.report.json"
    write_trajectory_csv(traj, scenario.spec.inertia, csv_path)
    report = build_report(label, scenario, traj)
    report["artifacts"] = {"trajectory_csv": str(csv_path), "report_json": str(json_path)}
    json_path.write_text(json.dumps(report, indent=2) + "\n")
    return report


def cmd_run(args) -> int:
    label, scenario = resolve_scenario(args.source, args.dt, args.t_end)
    traj = run(scenario)
    report = _emit_run(label, scenario, traj, Path(args.output_dir))
    m = report["metrics"]
    print(f"{label}: peak |omega| {m['peak_freq_dev']:.5f} rad/s, "
          f"settling {m['settling_time']:.3f} s, final separation {m['final_separation']:.5f} rad, "
          f"final |u| {m['final_control']:.3e} pu")
    print(f"  {'osc':>3} {'P_m':>10} {'u':>12} {'P_e':>10} {'error':>11}")
    for row in report["power_sharing"]:
        print(f"  {row['oscillator']:>3} {row['pm']:>10.5f} {row['control']:>12.3e} "
              f"{row['pe']:>10.5f} {row['error']:>11.2e}")
    print(f"wrote {report['artifacts']['trajectory_csv']} and {report['artifacts']['report_json']}")
    return EXIT_OK


def cmd_compare(args) -> int:
    label_a, sc_a = resolve_scenario(args.config_a, args.dt, args.t_end)
    label_b, sc_b = resolve_scenario(args.config_b, args.dt, args.t_end)
    if sc_a.spec != sc_b.spec or sc_a.sched != sc_b.sched:
        raise ConfigError("compared scenarios must share network parameters and power schedule")
    if label_a == label_b:
        label_a, label_b = f"{label_a}_a", f"{label_b}_b"

    eq = solve_equilibrium(sc_a.sched.p_base, sc_a.spec)
    traj_a = run(sc_a, equilibrium=eq)
    traj_b = run(sc_b, equilibrium=eq)
    if not np.array_equal(traj_a.theta[0], traj_b.theta[0]):
        raise AssertionError("runs did not start from the same equilibrium")

    out = Path(args.output_dir)
    rep_a = _emit_run(label_a, sc_a, traj_a, out)
    rep_b = _emit_run(label_b, sc_b, traj_b, out)
    ma, mb = rep_a["metrics"], rep_b["metrics"]
    keys = ("peak_freq_dev", "settling_time", "final_separation", "final_control")
    comparison = {
        "a": label_a,
        "b": label_b,
        "metrics": {label_a: ma, label_b: mb},
        "delta": {k: mb[k] - ma[k] for k in keys},
        "overshoot_ratio": mb["peak_freq_dev"] / ma["peak_freq_dev"] if ma["peak_freq_dev"] > 0 else None,
        "shared_equilibrium": [float(x) for x in eq.theta],
        "reports": [rep_a["artifacts"]["report_json"], rep_b["artifacts"]["report_json"]],
    }
    path = out / "comparison.json"
    path.write_text(json.dumps(comparison, indent=2) + "\n")

    print(f"{'metric':<18} {label_a:>14} {label_b:>14} {'delta':>12}")
    for k in keys:
        print(f"{k:<18} {ma[k]:>14.6g} {mb[k]:>14.6g} {comparison['delta'][k]:>12.3g}")
    ratio = comparison["overshoot_ratio"]
    print(f"overshoot ratio ({label_b}/{label_a}): {'n/a' if ratio is None else f'{ratio:.4f}'}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    _, scenario = resolve_scenario(args.source)
    sched = scenario.sched
    p = sched.p_after if args.post_step else sched.p_base
    res = solve_equilibrium(p, scenario.spec, tol=args.tol)
    theta = res.theta
    print("theta_eq [rad]: " + " ".join(f"{x:.12g}" for x in theta))
    print(f"separation [rad]: {theta.max() - theta.min():.12g}")
    print(f"residual [pu]: {res.residual_norm:.3e}")
    print(f"iterations: {res.iterations}")
    print(f"jacobian eigenvalue floor: {eigenvalue_floor(theta, scenario.spec):.6g}")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.dump:
        if args.dump not in PRESETS:
            raise ConfigError(f"unknown preset {args.dump!r}")
        sys.stdout.write(dump_config(table1_scenario(args.dump), name=args.dump))
        return EXIT_OK
    for name, variant in PRESETS.items():
        print(f"{name:<12} {variant.value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsmsync",
        description="Swing-network (second-order Kuramoto) simulator for grid-forming inverters.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def grid_flags(p):
        p.add_argument("--dt", type=float, help="integration step [s]")
        p.add_argument("--t-end", type=float, help="simulation horizon [s]")
        p.add_argument("--output-dir", default="vsmsync-out", help="directory for CSV/JSON output")

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("source", help="YAML config file or preset name")
    grid_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="simulate two scenarios sharing the same physics")
    p.add_argument("config_a")
    p.add_argument("config_b")
    grid_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("equilibrium", help="solve for equilibrium angles")
    p.add_argument("source", help="YAML config file or preset name")
    p.add_argument("--post-step", action="store_true", help="use the post-step power vector")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("presets", help="list built-in scenarios")
    p.add_argument("--dump", metavar="NAME", help="print the preset as a YAML config")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, NoConvergenceError, NumericError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
