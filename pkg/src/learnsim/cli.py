"""Command-line interface.

Exit codes: 0 success, 1 a reproduction check failed, 2 configuration error,
3 numerical instability, 4 no feasible plan found.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from learnsim.config import ConfigError, apply_overrides, dump_tree, parse_config, read_tree
from learnsim.engine import NumericalInstabilityError, SimConfig, simulate
from learnsim.optimizer import format_report, hill_climb
from learnsim.scenarios import TASK_IDS, preset_tree, run_scenario

EXIT_OK = 0
EXIT_CHECKS = 1
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_INFEASIBLE = 4


def _load(path, sets: dict):
    try:
        tree = read_tree(path)
    except OSError as exc:
        raise ConfigError(f"<root>: cannot read {path}: {exc.strerror}") from None
    if isinstance(tree, dict) and sets:
        tree = apply_overrides(tree, sets)
    return parse_config(tree)


def _common_sets(args) -> dict:
    sets = {}
    if args.dt is not None:
        sets["sim.dt"] = args.dt
    if args.format is not None:
        sets["output.format"] = args.format
    return sets


def _plot(runs, path, title):
    try:
        from learnsim import plotting
        plotting.plot_trajectories(runs, path, title=title)
    except Exception as exc:  # plotting never decides the exit status
        print(f"warning: plot not written: {exc}", file=sys.stderr)


def cmd_simulate(args) -> int:
    rc = _load(args.config, _common_sets(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    expanded = rc.expand()
    for label, cfg in expanded:
        tr = simulate(cfg.params, cfg.schedule, cfg.policy, cfg.sim)
        name = "trajectory.csv" if len(expanded) == 1 else f"trajectory_{label}.csv"
        tr.to_csv(out / name)
        runs.append((label, tr))
        f = tr.final
        print(f"{label or rc.name}: t={f['t']:.2f} z1={f['z1']:.6f} z2={f['z2']:.6f} "
              f"z={f['z']:.6f} work={f['p_cum']:.6f} -> {out / name}")
        if tr.gate_trip_time is not None:
            print(f"  gate trip at t={tr.gate_trip_time:.2f}")
        if tr.switch_time is not None:
            print(f"  aspiration switch at t={tr.switch_time:.2f}")
    if rc.invented:
        print("invented defaults: " + ", ".join(rc.invented))
    if rc.output_format == "csv+svg":
        _plot(runs, out / "plot.svg", rc.name)
    return EXIT_OK


def cmd_optimize(args) -> int:
    sets = _common_sets(args)
    for flag, key in (("seed", "rng_seed"), ("budget", "budget"), ("restarts", "restarts"),
                      ("mode", "mode"), ("step_scale", "step_scale")):
        v = getattr(args, flag)
        if v is not None:
            sets[f"optimize.search.{key}"] = v
    rc = _load(args.config, sets)
    if rc.problem is None:
        raise ConfigError("optimize: section required for the optimize command")
    prob = rc.problem
    result = hill_climb(prob)
    text = format_report(prob, result)
    if rc.invented:
        text += "invented defaults: " + ", ".join(rc.invented) + "\n"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(text)
    sys.stdout.write(text)
    if not result.feasible:
        return EXIT_INFEASIBLE
    sched, pol = prob.plan(result.best)
    tr = simulate(prob.params, sched, pol,
                  SimConfig(t_end=prob.constraints.t_eval, dt=prob.dt,
                            record_every=rc.sim.record_every))
    tr.to_csv(out / "trajectory.csv")
    if rc.output_format == "csv+svg":
        _plot([(None, tr)], out / "plot.svg", f"{rc.name} (optimized)")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    tasks = TASK_IDS if args.task == "all" else (args.task,)
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    failed = []
    for task in tasks:
        ov = dict(overrides)
        if args.seed is not None and task in ("task4", "task5"):
            ov["rng_seed"] = args.seed
        out = Path(args.out) / task
        res = run_scenario(task, ov, out_dir=out, fmt=args.format)
        status = "PASS" if res.passed else "FAIL"
        print(f"== {task}: {status} ({out})")
        sys.stdout.write(res.checks_text())
        if not res.passed:
            failed.append(task)
    if len(tasks) > 1:
        print(f"== summary: {len(tasks) - len(failed)}/{len(tasks)} passed"
              + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_CHECKS if failed else EXIT_OK


def cmd_preset(args) -> int:
    text = dump_tree(preset_tree(args.task))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="runs", help="output directory (default: runs)")
    common.add_argument("--dt", type=float, default=None, help="override the time step")
    common.add_argument("--seed", type=int, default=None,
                        help="search RNG seed (simulations are deterministic and ignore it)")
    common.add_argument("--format", choices=("csv", "csv+svg"), default=None,
                        help="artifacts to write (default: from config)")

    parser = argparse.ArgumentParser(
        prog="learnsim",
        description="Simulate learning/forgetting models and optimize lesson plans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="integrate a configured run")
    p.add_argument("config", help="YAML or JSON run configuration")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", parents=[common], help="hill-climb a configured lesson plan")
    p.add_argument("config", help="YAML or JSON run configuration with an optimize section")
    p.add_argument("--budget", type=int, default=None, help="total evaluations across restarts")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--mode", choices=("joint", "coordinate"), default=None)
    p.add_argument("--step-scale", dest="step_scale", type=float, default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reproduce", parents=[common], help="run a reference task and its checks")
    p.add_argument("task", choices=TASK_IDS + ("all",))
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("preset", help="print a reference task's config")
    p.add_argument("task", choices=TASK_IDS)
    p.add_argument("-o", "--output", default=None, help="write to this file instead of stdout")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
