"""Random-perturbation hill climbing over lesson plans.

A candidate is either the lesson durations (one shared value or one per
lesson) or the per-lesson requirement levels.  A move is accepted iff the
perturbed plan is feasible and strictly cheaper in learner work.  Until a
feasible plan is found, moves are accepted when they reduce total constraint
violation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from learnsim import _backend
from learnsim.engine import SimConfig, _policy_arrays, _seeded, check_step_size, simulate
from learnsim.models import OneCompParams, TwoCompT2Params
from learnsim.policies import ExplicitWindows, PerLessonLevels, step_segments
from learnsim import _pykernels as codes


@dataclass(frozen=True)
class Durations:
    """Optimize lesson lengths; lessons start at fixed times."""

    starts: tuple[float, ...]
    shared: bool = True

    @property
    def n_lessons(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class Levels:
    """Optimize one constant requirement level per fixed-length lesson."""

    starts: tuple[float, ...]
    duration: float
    level_max: float = math.inf

    @property
    def n_lessons(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class Constraints:
    t_eval: float
    z_min: float
    strength_frac: float
    p_max_lesson: float | None = None
    # > 0 turns the knowledge inequalities strict by this margin
    strict_eps: float = 0.0


@dataclass(frozen=True)
class SearchSettings:
    step_scale: float = 5.0
    budget: int = 20_000
    restarts: int = 10
    rng_seed: int = 0
    mode: str = "joint"
    init: tuple[float, ...] | None = None
    level_init: float = 100.0

    def __post_init__(self):
        if self.mode not in ("joint", "coordinate"):
            raise ValueError(f"mode must be 'joint' or 'coordinate', got {self.mode!r}")
        if self.budget < 0 or self.restarts < 1:
            raise ValueError("budget must be >= 0 and restarts >= 1")
        if not self.step_scale > 0:
            raise ValueError("step_scale must be > 0")


@dataclass(frozen=True)
class OptimizationProblem:
    params: OneCompParams | TwoCompT2Params
    decision: Durations | Levels
    constraints: Constraints
    policy: object = None  # requirement policy for Durations problems
    dt: float = 0.01
    search: SearchSettings = field(default_factory=SearchSettings)

    def __post_init__(self):
        starts = self.decision.starts
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("lesson starts must be strictly increasing")
        if isinstance(self.decision, Durations) and self.policy is None:
            raise ValueError("a Durations problem needs a requirement policy")
        if starts and starts[-1] >= self.constraints.t_eval:
            raise ValueError("every lesson must start before t_eval")

    # -- decision space

    @property
    def dim(self) -> int:
        d = self.decision
        if isinstance(d, Durations) and d.shared:
            return 1
        return d.n_lessons

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.decision
        if isinstance(d, Levels):
            return np.zeros(self.dim), np.full(self.dim, d.level_max)
        ends = list(d.starts[1:]) + [self.constraints.t_eval]
        gaps = np.array([e - s for s, e in zip(d.starts, ends)])
        if d.shared:
            return np.zeros(1), np.array([gaps.min()])
        return np.zeros(self.dim), gaps

    def initial(self) -> np.ndarray:
        if self.search.init is not None:
            x = np.array(self.search.init, dtype=float)
            if x.shape != (self.dim,):
                raise ValueError(f"init must have {self.dim} entries")
            return x
        lo, hi = self.bounds()
        if isinstance(self.decision, Levels):
            return np.minimum(np.full(self.dim, self.search.level_init), hi)
        return (lo + hi) / 2

    def clamp(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds()
        return np.minimum(np.maximum(x, lo), hi)

    def plan(self, x):
        """``(schedule, policy)`` realizing candidate ``x``."""
        d = self.decision
        if isinstance(d, Levels):
            windows = [(s, d.duration) for s in d.starts]
            return ExplicitWindows(windows), PerLessonLevels(tuple(float(v) for v in x))
        durs = [float(x[0])] * d.n_lessons if d.shared else [float(v) for v in x]
        return ExplicitWindows(list(zip(d.starts, durs))), self.policy

    def sim_config(self) -> SimConfig:
        return SimConfig(t_end=self.constraints.t_eval, dt=self.dt)


@dataclass
class FeasibilityReport:
    feasible: bool
    z_final: float
    z2_final: float
    z_ok: bool
    strength_ok: bool
    load_ok: bool
    per_lesson_work: list[float]
    violated: list[str]
    margins: dict[str, float]

    def violation(self, c: Constraints) -> float:
        """Scale-free total constraint violation (0 iff feasible)."""
        v = max(0.0, -self.margins["z_min"]) / c.z_min
        v += max(0.0, -self.margins["strength"]) / max(c.strength_frac * c.z_min, 1e-12)
        if c.p_max_lesson is not None:
            v += sum(max(0.0, w - c.p_max_lesson) for w in self.per_lesson_work) / c.p_max_lesson
        return v


def check_constraints(z1: float, z2: float, lesson_work, c: Constraints) -> FeasibilityReport:
    z = z1 + z2
    z_margin = z - c.z_min
    s_margin = z2 - c.strength_frac * c.z_min
    z_ok = z_margin >= c.strict_eps
    s_ok = s_margin >= c.strict_eps
    work = [float(w) for w in lesson_work]
    if c.p_max_lesson is None:
        load_ok, load_margin = True, math.inf
    else:
        load_margin = c.p_max_lesson - max(work, default=0.0)
        load_ok = load_margin >= 0
    violated = [name for name, ok in (("z_min", z_ok), ("strength_frac", s_ok),
                                      ("p_max_lesson", load_ok)) if not ok]
    return FeasibilityReport(
        feasible=not violated, z_final=z, z2_final=z2, z_ok=z_ok, strength_ok=s_ok,
        load_ok=load_ok, per_lesson_work=work, violated=violated,
        margins={"z_min": z_margin, "strength": s_margin, "p_max_lesson": load_margin},
    )


class _Evaluator:
    """Cached kernel call for one problem; mirrors ``simulate(record=False)``."""

    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        p = problem.params
        check_step_size(p, problem.dt)
        cfg = problem.sim_config()
        self.n_steps = cfg.n_steps
        self.dt = cfg.dt
        self.z0 = _seeded(p, cfg)
        if isinstance(p, OneCompParams):
            self.model = codes.ONE_COMP
            self.pvec = np.array([p.alpha, p.gamma, p.b, p.cutoff_c])
        else:
            self.model = codes.TWO_COMP_T2
            self.pvec = np.array([p.alpha1, p.alpha2, p.gamma1, p.gamma2])
        d = problem.decision
        self.n_lessons = d.n_lessons
        if isinstance(d, Levels):
            sched, _ = problem.plan(np.zeros(d.n_lessons))
            self.fixed_segments = self._segments(sched)
            self.policy_arrays = _policy_arrays(PerLessonLevels((0.0,) * d.n_lessons))
        else:
            self.fixed_segments = None
            self.policy_arrays = _policy_arrays(problem.policy)

    def _segments(self, schedule):
        lo, hi, les = step_segments(schedule, self.dt, self.n_steps + 1)
        return (np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64),
                np.asarray(les, dtype=np.int64))

    def __call__(self, x: np.ndarray) -> tuple[float, FeasibilityReport]:
        prob = self.problem
        code, hp, hc, lp, lc, cval, latched, levels = self.policy_arrays
        if self.fixed_segments is not None:
            segs = self.fixed_segments
            levels = np.ascontiguousarray(x, dtype=float)
        else:
            sched, _ = prob.plan(x)
            segs = self._segments(sched)
        lesson_work = np.zeros(self.n_lessons)
        z1, z2, p, status, _ = _backend.kernels.run_terminal(
            self.model, self.pvec, float(self.z0[0]), float(self.z0[1]), float(self.dt),
            self.n_steps, *segs, lesson_work,
            code, hp, hc, lp, lc, cval, latched, levels,
        )
        if status:
            return math.inf, check_constraints(math.nan, math.nan, lesson_work, prob.constraints)
        return p, check_constraints(z1, z2, lesson_work, prob.constraints)


def _check_candidate(problem: OptimizationProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"candidate must have {problem.dim} entries, got shape {x.shape}")
    lo, hi = problem.bounds()
    if not np.all(np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
        raise ValueError(f"candidate {x.tolist()} is outside the bounds [{lo.tolist()}, {hi.tolist()}]")
    return x


def evaluate(candidate, problem: OptimizationProblem) -> tuple[float, FeasibilityReport]:
    """Work at ``t_eval`` and the constraint report for one candidate."""
    x = _check_candidate(problem, candidate)
    sched, policy = problem.plan(x)
    traj = simulate(problem.params, sched, policy, problem.sim_config(), record=False)
    f = traj.final
    return f["p_cum"], check_constraints(f["z1"], f["z2"], traj.per_lesson_work, problem.constraints)


@dataclass
class RestartResult:
    best: np.ndarray
    work: float
    feasible: bool
    trace: list[tuple[np.ndarray, float]]
    evaluations: int
    violation: float


@dataclass
class OptimizationResult:
    best: np.ndarray
    work: float
    report: FeasibilityReport
    trace: list[tuple[np.ndarray, float]]
    restarts: list[RestartResult]
    evaluations: int
    feasible: bool
    message: str = ""


def _climb(problem, evaluator, rng, budget) -> RestartResult:
    c = problem.constraints
    s = problem.search
    x = problem.clamp(problem.initial())
    work, rep = evaluator(x)
    viol = rep.violation(c)
    used = 0
    dim = problem.dim

    def perturb(x):
        y = x.copy()
        if s.mode == "joint" or dim == 1:
            y += rng.uniform(-s.step_scale, s.step_scale, size=dim)
        else:
            j = rng.integers(dim)
            y[j] += rng.uniform(-s.step_scale, s.step_scale)
        return problem.clamp(y)

    # feasibility phase: descend on total violation
    while viol > 0 and used < budget:
        y = perturb(x)
        w2, rep2 = evaluator(y)
        used += 1
        v2 = rep2.violation(c)
        if v2 < viol:
            x, work, viol = y, w2, v2
    if viol > 0:
        return RestartResult(x, work, False, [], used, viol)

    trace = [(x.copy(), work)]
    while used < budget:
        y = perturb(x)
        w2, rep2 = evaluator(y)
        used += 1
        if rep2.feasible and w2 < work:
            x, work = y, w2
            trace.append((x.copy(), work))
    return RestartResult(x, work, True, trace, used, 0.0)


def hill_climb(problem: OptimizationProblem) -> OptimizationResult:
    """Best-of-restarts random-perturbation search.

    ``search.budget`` is the total number of evaluations, split evenly across
    restarts.  Every restart starts from the same initial candidate and owns
    an independent random stream spawned from ``rng_seed``.
    """
    s = problem.search
    evaluator = _Evaluator(problem)
    streams = np.random.SeedSequence(s.rng_seed).spawn(s.restarts)
    base, extra = divmod(s.budget, s.restarts)
    runs = [
        _climb(problem, evaluator, np.random.default_rng(seq), base + (1 if r < extra else 0))
        for r, seq in enumerate(streams)
    ]
    total = sum(r.evaluations for r in runs)
    feasible = [r for r in runs if r.feasible]
    if feasible:
        best = min(feasible, key=lambda r: r.work)
        work, report = evaluator(best.best)
        return OptimizationResult(best.best, work, report, best.trace, runs, total, True)
    closest = min(runs, key=lambda r: r.violation)
    work, report = evaluator(closest.best)
    c = problem.constraints
    margins = {
        "z_min": max(0.0, -report.margins["z_min"]) / c.z_min,
        "strength_frac": max(0.0, -report.margins["strength"]) / max(c.strength_frac * c.z_min, 1e-12),
        "p_max_lesson": (max(0.0, -report.margins["p_max_lesson"]) / c.p_max_lesson
                         if c.p_max_lesson is not None else 0.0),
    }
    binding = max(margins, key=margins.get)
    msg = (f"no feasible plan within {s.budget} evaluations; "
           f"binding constraint: {binding} (closest plan violates {', '.join(report.violated)})")
    return OptimizationResult(closest.best, work, report, [], runs, total, False, msg)


def with_search(problem: OptimizationProblem, **changes) -> OptimizationProblem:
    """Copy of ``problem`` with some search settings replaced."""
    return replace(problem, search=replace(problem.search, **changes))


def _fmt_vec(x) -> str:
    return "(" + ", ".join(f"{v:.4f}" for v in np.atleast_1d(x)) + ")"


def format_report(problem: OptimizationProblem, result: OptimizationResult) -> str:
    """Structured plain-text optimization report (no timings, so reruns are byte-identical)."""
    c = problem.constraints
    s = problem.search
    rep = result.report
    kind = "levels" if isinstance(problem.decision, Levels) else (
        "shared duration" if problem.dim == 1 else "durations")
    lines = [
        f"decision: {kind} over {problem.decision.n_lessons} lessons starting at "
        f"{_fmt_vec(problem.decision.starts)}",
        f"search: mode={s.mode} step_scale={s.step_scale:g} budget={s.budget} "
        f"restarts={s.restarts} rng_seed={s.rng_seed}",
        f"constraints: z({c.t_eval:g}) >= {c.z_min:g}; z2 >= {c.strength_frac:g}*{c.z_min:g}"
        + ("" if c.p_max_lesson is None else f"; per-lesson work <= {c.p_max_lesson:g}"),
        f"status: {'feasible' if result.feasible else 'INFEASIBLE'}",
    ]
    if result.message:
        lines.append(f"message: {result.message}")
    lines += [
        f"best: {_fmt_vec(result.best)}",
        f"work: {result.work:.6f}",
        f"z_final: {rep.z_final:.6f}",
        f"z2_final: {rep.z2_final:.6f}",
        f"margin z_min: {rep.margins['z_min']:.6f}",
        f"margin strength: {rep.margins['strength']:.6f}",
        f"active-constraint margin: {min(rep.margins['z_min'], rep.margins['strength']):.6f}",
        "per-lesson work: " + _fmt_vec(rep.per_lesson_work),
    ]
    if c.p_max_lesson is not None:
        lines.append(f"margin p_max_lesson: {rep.margins['p_max_lesson']:.6f}")
    lines.append("violated: " + (", ".join(rep.violated) if rep.violated else "none"))
    lines.append(f"evaluations: {result.evaluations}")
    lines.append(f"trace length: {len(result.trace)}")
    if result.trace:
        lines.append(f"trace first work: {result.trace[0][1]:.6f}")
        lines.append(f"trace last work: {result.trace[-1][1]:.6f}")
    lines.append("restarts:")
    for i, r in enumerate(result.restarts):
        state = f"work {r.work:.6f}" if r.feasible else f"infeasible (violation {r.violation:.6g})"
        lines.append(f"  {i}: {_fmt_vec(r.best)} {state} accepted={max(len(r.trace) - 1, 0)}")
    return "\n".join(lines) + "\n"
