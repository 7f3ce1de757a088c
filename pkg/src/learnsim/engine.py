"""Fixed-step explicit Euler integration with post-step clamping.

``simulate`` dispatches single-requirement models (one-component, type-2) to
the compiled kernel, and the year-matrix cohort model to a Python loop.
``simulate_pr1`` replays the historical Pascal listing for the school-years
task, quirks included.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from learnsim import _backend
from learnsim import _pykernels as codes
from learnsim.models import (
    OneCompParams,
    TwoCompT1Params,
    TwoCompT2Params,
    two_comp_t1_rate,
)
from learnsim.policies import (
    Congruent,
    PerLessonLevels,
    Polynomial,
    SchoolYears,
    TwoTier,
    YearMatrix,
    step_segments,
)

CSV_PRECISION = "%.9g"


class NumericalInstabilityError(RuntimeError):
    """The explicit scheme cannot be trusted with this step size."""


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    dt: float = 0.01
    z1_init: float = 0.0
    z2_init: float = 0.0
    seed_knowledge: float = 0.0
    record_every: int = 1
    pr1_compat: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be > 0, got {self.t_end!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        for name in ("z1_init", "z2_init", "seed_knowledge"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be >= 0, got {v!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    """Recorded samples plus work bookkeeping.

    Samples hold the state *before* each recorded step, so ``u`` and ``k`` are
    the values the step was computed with.  The last sample is the terminal
    state.  Year-matrix runs carry ``u1``/``u2`` instead of ``u`` and the
    per-class knowledge in ``cohort_z1``/``cohort_z2`` (one column per year).
    """

    t: np.ndarray
    k: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    p_cum: np.ndarray
    per_lesson_work: np.ndarray
    u: np.ndarray | None = None
    u1: np.ndarray | None = None
    u2: np.ndarray | None = None
    gate: np.ndarray | None = None
    cohort_z1: np.ndarray | None = None
    cohort_z2: np.ndarray | None = None
    gate_trip_time: float | None = None
    switch_time: float | None = None
    mode: str = "corrected"
    final: dict = field(default_factory=dict)

    @property
    def z(self) -> np.ndarray:
        return self.z1 + self.z2

    @property
    def columns(self) -> list[str]:
        if self.u is not None:
            return ["t", "k", "u", "z1", "z2", "z", "p_cum"]
        return ["t", "k", "u1", "u2", "z1", "z2", "z", "p_cum"]

    def rows(self):
        cols = {"t": self.t, "k": self.k, "u": self.u, "u1": self.u1, "u2": self.u2,
                "z1": self.z1, "z2": self.z2, "z": self.z, "p_cum": self.p_cum}
        data = [cols[c] for c in self.columns]
        return zip(*data)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows():
                w.writerow([str(int(v)) if i == 1 else CSV_PRECISION % v
                            for i, v in enumerate(row)])


def read_csv(path) -> dict[str, np.ndarray]:
    """Load a trajectory CSV into column arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def check_step_size(params, dt: float, alpha_scale=(1.0,)) -> None:
    """Reject step sizes where one Euler step overshoots equilibrium.

    For a linear relaxation ``dz/dt = -lam*z + c`` the explicit step flips the
    sign of the deviation once ``lam*dt >= 1``.  Only the b = 0 case is
    linear; with b > 0 the check is skipped.
    """
    smax = max(alpha_scale)
    if isinstance(params, OneCompParams):
        lams = {"gamma": params.gamma}
        if params.b == 0:
            lams["alpha"] = params.alpha + params.gamma
    elif isinstance(params, TwoCompT1Params):
        lams = {"gamma1": params.gamma1, "gamma2": params.gamma2}
        if params.b == 0:
            lams["alpha1"] = params.alpha1 * smax + params.gamma1
            lams["alpha2"] = params.alpha2 * smax + params.gamma2
    else:
        lams = {"alpha1": params.alpha1 + params.alpha2 + params.gamma1,
                "gamma2": params.gamma2}
    for name, lam in lams.items():
        if lam * dt >= 1.0:
            raise NumericalInstabilityError(
                f"dt={dt} overshoots: rate constant {lam:g} ({name}) times dt is "
                f"{lam * dt:g} >= 1; use dt < {1.0 / lam:g}"
            )


def _seeded(params, cfg: SimConfig) -> tuple[float, float]:
    z1, z2 = cfg.z1_init, cfg.z2_init
    if getattr(params, "b", 0.0) > 0 and cfg.seed_knowledge > 0:
        z1 += cfg.seed_knowledge
        if isinstance(params, TwoCompT1Params):
            z2 += cfg.seed_knowledge
    return z1, z2


_EMPTY = np.zeros(0)


def _policy_arrays(policy):
    k = codes
    hi = lo = Polynomial(())
    cval, latched, levels = 0.0, True, _EMPTY
    if isinstance(policy, Polynomial):
        code, hi = k.POLY, policy
    elif isinstance(policy, TwoTier):
        code, hi, lo, cval, latched = k.TWOTIER, policy.high, policy.low, policy.cutoff_c, policy.latched
    elif isinstance(policy, Congruent):
        code, cval = k.CONGRUENT, policy.cutoff_c
    elif isinstance(policy, PerLessonLevels):
        code, levels = k.LEVELS, np.asarray(policy.levels, dtype=float)
    else:
        raise TypeError(f"{type(policy).__name__} needs a two-component type-1 model")

    def split(poly):
        pw = np.array([t[0] for t in poly.terms], dtype=float)
        co = np.array([t[1] for t in poly.terms], dtype=float)
        return pw, co

    hp, hc = split(hi)
    lp, lc = split(lo)
    return code, hp, hc, lp, lc, float(cval), bool(latched), levels


def simulate(params, schedule, policy, cfg: SimConfig, *, record: bool = True) -> Trajectory:
    """Integrate ``params`` under ``schedule`` and ``policy``.

    Work accumulates ``k * max(u - z, 0) * dt`` per step, totalled and binned
    per lesson.  With ``record=False`` only the terminal state and work
    totals are kept (the optimizer's fast path).
    """
    if isinstance(params, TwoCompT1Params) or isinstance(policy, YearMatrix):
        if cfg.pr1_compat:
            return simulate_pr1(cfg, params, policy)
        return _simulate_cohort(params, schedule, policy, cfg, record=record)
    if not isinstance(params, (OneCompParams, TwoCompT2Params)):
        raise TypeError(f"unsupported model parameters {type(params).__name__}")
    if isinstance(policy, PerLessonLevels) and len(policy.levels) != schedule.n_lessons:
        raise ValueError(
            f"{len(policy.levels)} levels for {schedule.n_lessons} lessons"
        )
    check_step_size(params, cfg.dt)

    kern = _backend.kernels
    n_steps = cfg.n_steps
    lo, hi, les = step_segments(schedule, cfg.dt, n_steps + 1)
    seg_lo = np.asarray(lo, dtype=np.int64)
    seg_hi = np.asarray(hi, dtype=np.int64)
    seg_les = np.asarray(les, dtype=np.int64)
    lesson_work = np.zeros(schedule.n_lessons)
    code, hp, hc, lp, lc, cval, latched, levels = _policy_arrays(policy)

    if isinstance(params, OneCompParams):
        model = codes.ONE_COMP
        pvec = np.array([params.alpha, params.gamma, params.b, params.cutoff_c])
    else:
        model = codes.TWO_COMP_T2
        pvec = np.array([params.alpha1, params.alpha2, params.gamma1, params.gamma2])

    z1, z2 = _seeded(params, cfg)
    dt = cfg.dt
    if not record:
        z1, z2, p, status, _ = kern.run_terminal(
            model, pvec, float(z1), float(z2), float(dt), n_steps,
            seg_lo, seg_hi, seg_les, lesson_work,
            code, hp, hc, lp, lc, cval, latched, levels,
        )
        if status:
            raise NumericalInstabilityError(
                f"non-finite state after integrating to t={cfg.t_end}; reduce dt (now {dt})"
            )
        empty = np.zeros(0)
        return Trajectory(
            t=empty, k=empty, u=empty, z1=empty, z2=empty, p_cum=empty,
            per_lesson_work=lesson_work,
            final={"t": n_steps * dt, "z1": z1, "z2": z2, "z": z1 + z2, "p_cum": p},
        )

    every = cfg.record_every
    n_rec = n_steps // every + 2
    rec_t = np.empty(n_rec)
    rec_k = np.empty(n_rec, dtype=np.uint8)
    rec_u = np.empty(n_rec)
    rec_z1 = np.empty(n_rec)
    rec_z2 = np.empty(n_rec)
    rec_p = np.empty(n_rec)
    rec_g = np.empty(n_rec, dtype=np.uint8)

    z1, z2, p, got, status, gate_step, switch_step = kern.run_single(
        model, pvec, float(z1), float(z2), float(cfg.dt), n_steps,
        seg_lo, seg_hi, seg_les, lesson_work,
        code, hp, hc, lp, lc, cval, latched, levels,
        every, rec_t, rec_k, rec_u, rec_z1, rec_z2, rec_p, rec_g,
    )
    if status:
        raise NumericalInstabilityError(
            f"non-finite state after integrating to t={cfg.t_end}; reduce dt (now {cfg.dt})"
        )
    rec_t, rec_k, rec_u, rec_z1, rec_z2, rec_p, rec_g = (
        a[:got] for a in (rec_t, rec_k, rec_u, rec_z1, rec_z2, rec_p, rec_g)
    )

    return Trajectory(
        t=rec_t, k=rec_k, u=rec_u, z1=rec_z1, z2=rec_z2, p_cum=rec_p,
        per_lesson_work=lesson_work,
        gate=rec_g.astype(bool) if model == codes.ONE_COMP else None,
        gate_trip_time=gate_step * dt if gate_step >= 0 else None,
        switch_time=switch_step * dt if switch_step >= 0 else None,
        final={"t": n_steps * dt, "z1": z1, "z2": z2, "z": z1 + z2, "p_cum": p},
    )


def _simulate_cohort(params, schedule, policy, cfg: SimConfig, *, record: bool = True) -> Trajectory:
    """Year-matrix model: one (z1, z2) pair per school year's material.

    Only the current year's material is taught, and only during the teaching
    months; all material decays continuously.
    """
    if not isinstance(params, TwoCompT1Params):
        raise TypeError("YearMatrix requires TwoCompT1Params")
    if not isinstance(policy, YearMatrix):
        raise TypeError("a two-component type-1 model needs a YearMatrix policy")
    if not isinstance(schedule, SchoolYears):
        raise TypeError("YearMatrix runs need a SchoolYears schedule")
    if schedule.years != policy.years:
        raise ValueError(f"schedule has {schedule.years} years, matrices have {policy.years}")
    check_step_size(params, cfg.dt, policy.alpha_scale)

    years = policy.years
    per_class = [
        TwoCompT1Params(params.alpha1 * s, params.alpha2 * s, params.gamma1, params.gamma2, params.b)
        for s in policy.alpha_scale
    ]
    n_steps = cfg.n_steps
    dt = cfg.dt
    lo, hi, les = step_segments(schedule, dt, n_steps + 1)
    seed1, seed2 = _seeded(params, cfg)
    # initial knowledge is attributed to the first year's material
    c1 = [0.0] * years
    c2 = [0.0] * years
    c1[0], c2[0] = seed1, seed2
    lesson_work = np.zeros(years)
    p = 0.0
    every = cfg.record_every
    out = {name: [] for name in ("t", "k", "u1", "u2", "p")}
    coh1, coh2 = [], []
    si = 0
    for n in range(n_steps + 1):
        while si < len(lo) and hi[si] <= n:
            si += 1
        if si < len(lo) and lo[si] <= n:
            k, year = 1, les[si]
        else:
            k, year = 0, min(int(n * dt // policy.year_length), years - 1)
        u1, u2 = policy.u1[year], policy.u2[year]
        t = n * dt
        if record and (n % every == 0 or n == n_steps):
            out["t"].append(t)
            out["k"].append(k)
            out["u1"].append(u1)
            out["u2"].append(u2)
            out["p"].append(p)
            coh1.append(list(c1))
            coh2.append(list(c2))
        if n == n_steps:
            break
        if k:
            w = (max(u1 - c1[year], 0.0) + max(u2 - c2[year], 0.0)) * dt
            p += w
            lesson_work[year] += w
        for i in range(years):
            ki = 1 if (k and i == year) else 0
            r1, r2 = two_comp_t1_rate(c1[i], c2[i], policy.u1[i], policy.u2[i], ki, ki, per_class[i])
            a = c1[i] + r1 * dt
            b = c2[i] + r2 * dt
            c1[i] = a if a > 0.0 else 0.0
            c2[i] = b if b > 0.0 else 0.0
    total1, total2 = sum(c1), sum(c2)
    if not (math.isfinite(total1) and math.isfinite(total2)):
        raise NumericalInstabilityError(f"non-finite state; reduce dt (now {dt})")
    final = {"t": n_steps * dt, "z1": total1, "z2": total2, "z": total1 + total2, "p_cum": p,
             "cohort_z1": list(c1), "cohort_z2": list(c2)}
    if not record:
        empty = np.zeros(0)
        return Trajectory(t=empty, k=empty, z1=empty, z2=empty, p_cum=empty,
                          per_lesson_work=lesson_work, u1=empty, u2=empty, final=final)
    cz1 = np.array(coh1)
    cz2 = np.array(coh2)
    return Trajectory(
        t=np.array(out["t"]), k=np.array(out["k"], dtype=np.uint8),
        u1=np.array(out["u1"]), u2=np.array(out["u2"]),
        z1=cz1.sum(axis=1), z2=cz2.sum(axis=1), p_cum=np.array(out["p"]),
        per_lesson_work=lesson_work, cohort_z1=cz1, cohort_z2=cz2,
        mode="corrected", final=final,
    )


# Constants of the historical listing.  Its alfa array is (1, 1.5, ..., 6)
# and every update multiplies by an extra 0.01.
PR1_U1 = (50, 46, 42, 36, 30, 25, 20, 15, 10, 10, 10)
PR1_U2 = (4, 8, 14, 18, 24, 28, 33, 38, 46, 58, 62)
PR1_ALFA = (1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6)
PR1_G1 = 0.002
PR1_G2 = 0.01


def simulate_pr1(cfg: SimConfig, params: TwoCompT1Params | None = None,
                 policy: YearMatrix | None = None) -> Trajectory:
    """Replay the listing's loop in double precision.

    Quirks kept on purpose: time accumulates as ``t += dt``; the current class
    is ``round(t) div 12 + 1`` with round-half-even; the vacation flag is
    computed and then overwritten by the per-class gate, so teaching carries
    on through the vacation months.  Samples are taken after each update.
    """
    if params is None:
        params = TwoCompT1Params(0.01, 0.01, PR1_G1, PR1_G2)
    if policy is None:
        policy = YearMatrix(PR1_U1, PR1_U2, PR1_ALFA)
    g1, g2 = params.gamma1, params.gamma2
    u1, u2 = policy.u1, policy.u2
    alfa = policy.alpha_scale
    a1, a2 = params.alpha1, params.alpha2
    years = policy.years
    dt = cfg.dt
    z1 = [0.0] * years
    z2 = [0.0] * years
    t = 0.0
    every = cfg.record_every
    out_t, out_k, out_u1, out_u2 = [0.0], [0], [u1[0]], [u2[0]]
    coh1, coh2 = [list(z1)], [list(z2)]
    n_steps = cfg.n_steps
    for n in range(1, n_steps + 1):
        t = t + dt
        j = round(t) // 12 + 1
        for i in range(1, years + 1):
            k = 1 if j == i else 0
            z1[i - 1] = z1[i - 1] + k * alfa[i - 1] * a1 * (u1[i - 1] - z1[i - 1]) * dt - g1 * z1[i - 1] * dt
            z2[i - 1] = z2[i - 1] + k * alfa[i - 1] * a2 * (u2[i - 1] - z2[i - 1]) * dt - g2 * z2[i - 1] * dt
            if z1[i - 1] < 0:
                z1[i - 1] = 0.0
            if z2[i - 1] < 0:
                z2[i - 1] = 0.0
        if n % every == 0 or n == n_steps:
            yi = min(j, years) - 1
            out_t.append(t)
            out_k.append(1 if j <= years else 0)
            out_u1.append(u1[yi])
            out_u2.append(u2[yi])
            coh1.append(list(z1))
            coh2.append(list(z2))
    cz1 = np.array(coh1)
    cz2 = np.array(coh2)
    zeros = np.zeros(len(out_t))
    return Trajectory(
        t=np.array(out_t), k=np.array(out_k, dtype=np.uint8),
        u1=np.array(out_u1, dtype=float), u2=np.array(out_u2, dtype=float),
        z1=cz1.sum(axis=1), z2=cz2.sum(axis=1), p_cum=zeros,
        per_lesson_work=np.zeros(years), cohort_z1=cz1, cohort_z2=cz2,
        mode="pr1_compat",
        final={"t": t, "z1": sum(z1), "z2": sum(z2), "z": sum(z1) + sum(z2),
               "p_cum": 0.0, "cohort_z1": list(z1), "cohort_z2": list(z2)},
    )


def _phi(x: float, t: float) -> float:
    """(1 - exp(-x t)) / x, continuous at x = 0."""
    if abs(x * t) < 1e-12:
        return t
    return -math.expm1(-x * t) / x


def _mix(s: float, g: float, t: float) -> float:
    """Integral of exp(-g (t - tau)) * exp(-s tau) over [0, t]."""
    if abs((g - s) * t) < 1e-9:
        return t * math.exp(-0.5 * (s + g) * t)
    return (math.exp(-s * t) - math.exp(-g * t)) / (g - s)


def closed_form_t2_congruent(p: TwoCompT2Params, cutoff_c: float, z1_0: float, z2_0: float,
                             t: float) -> tuple[float, float]:
    """Exact solution of the type-2 model under a constant gap ``u - z = C``.

    dz1/dt = a1*C - (a2 + g1) z1,   dz2/dt = a2 z1 - g2 z2.
    """
    s = p.alpha2 + p.gamma1
    g = p.gamma2
    src = p.alpha1 * cutoff_c
    z1 = z1_0 * math.exp(-s * t) + src * _phi(s, t)
    # z2 = decayed initial + a2 * (convolution of exp(-g .) with z1)
    if abs(s * t) < 1e-12:
        ramp = (t - _phi(g, t)) / g if abs(g * t) >= 1e-12 else 0.5 * t * t
    else:
        ramp = (_phi(g, t) - _mix(s, g, t)) / s
    z2 = z2_0 * math.exp(-g * t) + p.alpha2 * (z1_0 * _mix(s, g, t) + src * ramp)
    return z1, z2
