"""Command-line front end: scenario loading, runs, reports, and inspection.

Subcommands
-----------
run            simulate a scenario, write trajectory.csv and reports
graph-info     connectivity, left eigenvector and lambda2 of the graph
solve-triplets regulation-equation solutions and residuals per agent
check-gains    sufficient-condition margins for the scenario's gains
oracle         centralized minimizer of the summed costs
sweep          run every gain preset and tabulate settling times

Exit codes: 0 converged (or informational subcommand succeeded), 2 run
completed without converging to the configured tolerance, 1 error.
"""

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from .controller import check_gain_conditions
from .costmodel import centralized_minimizer
from .errors import OocError
from .netgraph import spectral_info
from .plantmodel import check_regulation_rank, solve_regulation_equations
from .policy import DEFAULT
from .scenario_io import emit_scenario, load_scenario
from .scenarios import BUILTIN, builtin_scenario
from .simulator import (
    compute_metrics,
    output_error,
    run_scenario,
    scenario_constants,
    settling_time,
)

VERSION = "0.1.0"


# -- scenario resolution ---------------------------------------------------------

def _add_common_args(parser, with_out=False):
    parser.add_argument("scenario_pos", nargs="?", metavar="SCENARIO",
                        help="builtin name or path of a scenario file")
    parser.add_argument("--scenario", dest="scenario_opt", metavar="NAME|PATH",
                        help="builtin name or path of a scenario file")
    parser.add_argument("--preset", help="named gain preset of the scenario")
    parser.add_argument("--controller", choices=["state", "output"],
                        help="override the controller mode")
    parser.add_argument("--step", type=float, help="integration step h")
    parser.add_argument("--horizon", type=float, help="simulation horizon T")
    parser.add_argument("--seed", type=int, help="seed for randomized initial conditions")
    parser.add_argument("--tolerance", type=float,
                        help="convergence tolerance used for the exit code")
    if with_out:
        parser.add_argument("--out", help="output directory (default runs/<scenario>)")


def resolve_scenario(args):
    """Pick the scenario named by the flags and apply command-line overrides."""
    names = [n for n in (args.scenario_opt, args.scenario_pos) if n]
    if len(names) != 1:
        raise OocError("give exactly one scenario (positional or --scenario)")
    name = names[0]
    if name in BUILTIN:
        scenario = builtin_scenario(name)
    elif Path(name).exists():
        scenario = load_scenario(name)
    else:
        raise OocError(f"no builtin scenario or file named {name!r}")
    if args.preset:
        scenario = scenario.with_preset(args.preset)
    overrides = {}
    if args.controller:
        overrides["mode"] = args.controller
    if args.step is not None:
        overrides["step"] = args.step
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tolerance is not None:
        overrides["tolerance"] = args.tolerance
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
    return scenario


# -- output files ------------------------------------------------------------------

def output_labels(scenario):
    n, q = scenario.n_agents, scenario.q
    if q == 1:
        return [f"y_{i + 1}" for i in range(n)]
    return [f"y_{i + 1}_{c + 1}" for i in range(n) for c in range(q)]


def format_trajectory_csv(traj, scenario, y_star):
    """Wide CSV: t, one column per output component, stacked error norm."""
    err = output_error(traj, y_star)
    lines = [",".join(["t"] + output_labels(scenario) + ["err"])]
    for k in range(traj.times.size):
        cells = [repr(float(traj.times[k]))]
        cells += [repr(float(v)) for v in traj.outputs[k]]
        cells.append(repr(float(err[k])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def gain_check_summary(scenario, spectral=None):
    """Advisory feasibility check for the scenario's coupling gains.

    Returns a flat dict; ``feasible`` is None when no usable strong-convexity
    bound exists on the scenario's box.
    """
    consts = scenario_constants(scenario, spectral)
    summary = {
        "gain_check_m": consts["m"],
        "gain_check_M": consts["M"],
        "gain_check_normC": consts["normC"],
        "gain_check_m_source": consts["m_source"],
    }
    if consts["m"] <= DEFAULT.m_floor:
        summary.update({
            "gain_check_feasible": None,
            "gain_check_note": "no usable strong-convexity bound on the box",
        })
        return summary
    check = check_gain_conditions(
        consts["m"], consts["M"], consts["normC"], consts["r_min"],
        consts["lambda2"], scenario.coupling.gamma1, scenario.coupling.gamma2,
        mode=scenario.mode,
    )
    summary.update({
        "gain_check_feasible": check.feasible,
        "gain_check_delta": check.delta,
        "gain_check_margin_convexity": check.margins[0],
        "gain_check_margin_damping": check.margins[1],
        "gain_check_margin_network": check.margins[2],
    })
    return summary


def build_report(scenario, ode, traj, metrics, gain_summary, wall_seconds):
    """Flat report mapping; every entry is a scalar or short string."""
    converged = metrics.final_output_error <= scenario.tolerance
    report = {
        "scenario": scenario.name,
        "version": VERSION,
        "controller": scenario.mode,
        "gamma1": ode.coupling.gamma1,
        "gamma2": ode.coupling.gamma2,
        "horizon": scenario.horizon,
        "step": scenario.step,
        "stride": scenario.stride,
        "seed": scenario.seed,
        "tolerance": scenario.tolerance,
        "y_star_oracle": float(metrics.y_star[0]) if metrics.y_star.size == 1
        else list(map(float, metrics.y_star)),
        "converged": converged,
        "final_output_error": metrics.final_output_error,
        "optimality_residual": metrics.optimality_residual,
        "fitted_rate": metrics.fitted_rate,
        "fit_r2": metrics.fit_r2,
        "rv_drift": metrics.rv_drift,
        "z_mass_drift": metrics.z_mass_drift,
        "z_positivity_min": metrics.z_positivity_min,
        "z_eigvec_error": metrics.z_eigvec_error,
        "observer_error_final": metrics.observer_error_final,
        "wall_clock_s": round(wall_seconds, 3),
    }
    for eps, t_s in metrics.settling_times.items():
        report[f"settling_time_{eps:g}"] = t_s
    if scenario.declared_minimizer is not None:
        declared = float(scenario.declared_minimizer)
        oracle = float(metrics.y_star[0])
        report["y_star_declared"] = declared
        report["minimizer_mismatch"] = abs(oracle - declared) > scenario.tolerance
    report.update(gain_summary)
    return report


def format_report_kv(report):
    return "\n".join(f"{key} = {value}" for key, value in report.items()) + "\n"


def format_report_human(report, scenario):
    lines = [f"run report: {report['scenario']} (oocsim {VERSION})", ""]
    width = max(len(k) for k in report)
    for key, value in report.items():
        lines.append(f"  {key.ljust(width)}  {value}")
    if report.get("minimizer_mismatch"):
        lines += ["", "  note: the declared minimizer disagrees with the oracle;"]
        lines += ["        the oracle value is authoritative, see y_star_oracle."]
    lines += ["", "scenario configuration:", ""]
    lines.append(emit_scenario(scenario))
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------------

def cmd_run(args):
    scenario = resolve_scenario(args)
    start = time.perf_counter()
    ode, traj = run_scenario(scenario)
    wall = time.perf_counter() - start
    y_star = centralized_minimizer(scenario.costs)
    metrics = compute_metrics(
        traj, scenario, y_star, spectral=ode.spectral,
        settle_eps=(1e-2, scenario.tolerance),
    )
    gain_summary = gain_check_summary(scenario, ode.spectral)
    report = build_report(scenario, ode, traj, metrics, gain_summary, wall)

    out_dir = Path(args.out) if args.out else Path("runs") / scenario.name
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trajectory.csv").write_text(
        format_trajectory_csv(traj, scenario, y_star))
    (out_dir / "report.kv").write_text(format_report_kv(report))
    (out_dir / "report.txt").write_text(format_report_human(report, scenario))

    print(f"wrote {out_dir}/trajectory.csv")
    print(f"y* = {report['y_star_oracle']}  final error = {metrics.final_output_error:.3e}"
          f"  converged = {report['converged']}")
    return 0 if report["converged"] else 2


def cmd_graph_info(args):
    scenario = resolve_scenario(args)
    info = spectral_info(scenario.graph)
    print(f"scenario:           {scenario.name}")
    print(f"nodes:              {scenario.graph.n}")
    print(f"edges:              {len(scenario.graph.edge_list())}")
    print("strongly_connected: true")
    print("r:                  [" + ", ".join(f"{v:.6f}" for v in info.r) + "]")
    print(f"r_min:              {info.r_min:.6f}")
    print(f"lambda2:            {info.lambda2:.6f}")
    return 0


def cmd_solve_triplets(args):
    scenario = resolve_scenario(args)
    for i, plant in enumerate(scenario.plants):
        ok, rank = check_regulation_rank(plant)
        triplet = solve_regulation_equations(plant)
        print(f"agent {i + 1}: rank {'ok' if ok else 'FAIL'} ({rank}), "
              f"residual = {triplet.residual:.3e}")
        print(f"  Upsilon = {np.round(triplet.Upsilon.ravel(), 6).tolist()}")
        print(f"  Phi     = {np.round(triplet.Phi.ravel(), 6).tolist()}")
        print(f"  Psi     = {np.round(triplet.Psi.ravel(), 6).tolist()}")
    return 0


def cmd_check_gains(args):
    scenario = resolve_scenario(args)
    summary = gain_check_summary(scenario)
    print(f"scenario: {scenario.name}  mode: {scenario.mode}  "
          f"gamma1 = {scenario.coupling.gamma1:g}  gamma2 = {scenario.coupling.gamma2:g}")
    for key, value in summary.items():
        print(f"{key} = {value}")
    if summary["gain_check_feasible"] is False:
        print("note: the conditions are sufficient only; "
              "runs with infeasible gains may still converge")
    return 0


def cmd_oracle(args):
    scenario = resolve_scenario(args)
    y_star = centralized_minimizer(scenario.costs)
    residual = np.linalg.norm(
        sum(cost.gradient(y_star) for cost in scenario.costs))
    print(f"y_star = {float(y_star[0]) if y_star.size == 1 else y_star.tolist()}")
    print(f"gradient_sum_norm = {residual:.3e}")
    if scenario.declared_minimizer is not None:
        declared = float(scenario.declared_minimizer)
        gap = abs(float(y_star[0]) - declared)
        print(f"declared_minimizer = {declared}")
        print(f"declared_gap = {gap:.3e}")
        if gap > scenario.tolerance:
            print("note: oracle disagrees with the declared minimizer; "
                  "the oracle is authoritative")
    return 0


def cmd_sweep(args):
    scenario = resolve_scenario(args)
    if not scenario.gain_presets:
        raise OocError(f"scenario {scenario.name!r} has no gain presets to sweep")
    eps = args.tolerance if args.tolerance is not None else 1e-2
    rows = []
    for preset in scenario.gain_presets:
        sc = scenario.with_preset(preset)
        start = time.perf_counter()
        ode, traj = run_scenario(sc)
        wall = time.perf_counter() - start
        y_star = centralized_minimizer(sc.costs)
        err = output_error(traj, y_star)
        settle = settling_time(traj.times, err, eps)
        final = float(err[-1])
        rows.append((preset, sc.coupling.gamma1, sc.coupling.gamma2,
                     settle, final, wall))
        if args.out:
            sub = Path(args.out) / preset
            sub.mkdir(parents=True, exist_ok=True)
            (sub / "trajectory.csv").write_text(
                format_trajectory_csv(traj, sc, y_star))

    print(f"settling threshold: {eps:g}")
    print(f"{'preset':<10} {'gamma1':>8} {'gamma2':>8} {'settling_time':>14} "
          f"{'final_err':>12} {'wall_s':>8}")
    for preset, g1, g2, settle, final, wall in rows:
        settle_s = f"{settle:.3f}" if settle is not None else "never"
        print(f"{preset:<10} {g1:>8g} {g2:>8g} {settle_s:>14} {final:>12.3e} {wall:>8.1f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["preset,gamma1,gamma2,settling_time,final_err"]
        for preset, g1, g2, settle, final, _ in rows:
            lines.append(f"{preset},{g1!r},{g2!r},"
                         f"{settle if settle is not None else ''},{final!r}")
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oocsim",
        description="Distributed optimal output consensus: simulation and analysis",
    )
    parser.add_argument("--version", action="version", version=f"oocsim {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    handlers = {
        "run": (cmd_run, True, "simulate and write trajectory + reports"),
        "graph-info": (cmd_graph_info, False, "graph spectra and connectivity"),
        "solve-triplets": (cmd_solve_triplets, False, "regulation-equation solutions"),
        "check-gains": (cmd_check_gains, False, "coupling-gain feasibility (advisory)"),
        "oracle": (cmd_oracle, False, "centralized minimizer of the summed costs"),
        "sweep": (cmd_sweep, True, "run all gain presets, tabulate settling times"),
    }
    for name, (handler, with_out, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        _add_common_args(p, with_out=with_out)
        p.set_defaults(handler=handler)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except OocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
