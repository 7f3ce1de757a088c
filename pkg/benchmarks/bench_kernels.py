#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernels.

Times full recorded runs, terminal-state runs and a short hill climb on the
task 4 and task 5 presets with each backend.
"""

import argparse
import time

from learnsim import _backend, _pykernels
from learnsim.engine import simulate
from learnsim.optimizer import hill_climb, with_search
from learnsim.scenarios import preset


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(budget):
    out = []
    for task in ("task4", "task5"):
        rc = preset(task)
        out.append((f"{task} recorded run", lambda rc=rc: simulate(rc.params, rc.schedule, rc.policy, rc.sim)))
        out.append((f"{task} terminal run",
                    lambda rc=rc: simulate(rc.params, rc.schedule, rc.policy, rc.sim, record=False)))
        prob = with_search(rc.problem, budget=budget, restarts=1)
        out.append((f"{task} hill climb ({budget} evals)", lambda p=prob: hill_climb(p)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--budget", type=int, default=500)
    args = ap.parse_args()

    try:
        from learnsim import _kernels
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return
    backends = {"cython": _kernels, "python": _pykernels}
    saved = _backend.kernels
    print(f"{'case':34s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speedup':>8s}")
    try:
        for name, fn in cases(args.budget):
            times = {}
            for label, mod in backends.items():
                _backend.kernels = mod
                times[label] = best_of(fn, args.repeat)
            c, p = times["cython"], times["python"]
            print(f"{name:34s} {c * 1e3:12.2f} {p * 1e3:12.2f} {p / c:8.1f}")
    finally:
        _backend.kernels = saved


if __name__ == "__main__":
    main()
