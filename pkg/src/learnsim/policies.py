"""Lesson schedules (when k = 1) and teacher requirement policies (what U is)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class ExplicitWindows:
    """Lessons as half-open ``[start, start + duration)`` intervals."""

    windows: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "windows", tuple((float(s), float(d)) for s, d in self.windows)
        )
        prev_end = -math.inf
        for i, (start, dur) in enumerate(self.windows):
            if not (math.isfinite(start) and math.isfinite(dur)):
                raise ValueError(f"window {i} is not finite")
            if dur < 0:
                raise ValueError(f"window {i} has negative duration {dur}")
            if start < prev_end:
                raise ValueError(f"window {i} starts at {start}, before the previous one ends")
            prev_end = start + dur

    def lesson_windows(self) -> tuple[tuple[float, float], ...]:
        return self.windows

    @property
    def n_lessons(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class SchoolYears:
    """Teaching during the first ``session_length`` units of every year.

    Nothing is taught after ``final_cut`` (default: end of the last session).
    Lesson indices are 0-based school years.
    """

    years: int = 11
    year_length: float = 12.0
    session_length: float = 9.0
    final_cut: float | None = None

    def __post_init__(self):
        if self.years < 1:
            raise ValueError("years must be >= 1")
        if not 0 <= self.session_length <= self.year_length:
            raise ValueError("session_length must lie in [0, year_length]")
        if self.final_cut is None:
            cut = self.years * self.year_length - (self.year_length - self.session_length)
            object.__setattr__(self, "final_cut", float(cut))

    def lesson_windows(self) -> tuple[tuple[float, float], ...]:
        out = []
        for y in range(self.years):
            start = y * self.year_length
            dur = min(self.session_length, max(0.0, self.final_cut - start))
            out.append((start, dur))
        return tuple(out)

    @property
    def n_lessons(self) -> int:
        return self.years


LessonSchedule = ExplicitWindows | SchoolYears


def activity(t: float, schedule: LessonSchedule) -> tuple[int, int | None]:
    """Return ``(k, lesson_index)``; the index is None outside lessons."""
    for i, (start, dur) in enumerate(schedule.lesson_windows()):
        if start <= t < start + dur:
            return 1, i
    return 0, None


def _first_step_at_or_after(x: float, dt: float) -> int:
    # smallest n >= 0 with n*dt >= x, using the same float product the
    # per-step predicate would use
    n = max(0, math.ceil(x / dt))
    while n > 0 and (n - 1) * dt >= x:
        n -= 1
    while n * dt < x:
        n += 1
    return n


def step_segments(
    schedule: LessonSchedule, dt: float, n_points: int
) -> tuple[list[int], list[int], list[int]]:
    """Active step ranges ``[lo, hi)`` with their lesson index.

    Step ``n`` sits at ``t = n*dt``; the result agrees with :func:`activity`
    evaluated at every such point in ``range(n_points)``.
    """
    los, his, lessons = [], [], []
    for i, (start, dur) in enumerate(schedule.lesson_windows()):
        lo = min(_first_step_at_or_after(start, dt), n_points)
        hi = min(_first_step_at_or_after(start + dur, dt), n_points)
        if hi > lo:
            los.append(lo)
            his.append(hi)
            lessons.append(i)
    return los, his, lessons


# ----------------------------------------------------------------- policies


@dataclass(frozen=True)
class Polynomial:
    """``U(t) = sum(coeff * t**power)``."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((float(pw), float(c)) for pw, c in self.terms)
        )
        for pw, c in self.terms:
            if not (math.isfinite(pw) and math.isfinite(c)) or pw < 0:
                raise ValueError(f"bad polynomial term ({pw}, {c})")

    def __call__(self, t: float) -> float:
        s = 0.0
        for pw, c in self.terms:
            s += c * t**pw
        return s


@dataclass(frozen=True)
class TwoTier:
    """Aim for the ``high`` track, drop to ``low`` once its gap exceeds C."""

    high: Polynomial
    low: Polynomial
    cutoff_c: float
    latched: bool = True

    def __post_init__(self):
        if not self.cutoff_c > 0:
            raise ValueError("cutoff_c must be > 0")


@dataclass(frozen=True)
class YearMatrix:
    u1: tuple[float, ...]
    u2: tuple[float, ...]
    alpha_scale: tuple[float, ...]
    year_length: float = 12.0

    def __post_init__(self):
        for name in ("u1", "u2", "alpha_scale"):
            vals = tuple(float(v) for v in getattr(self, name))
            if any(v < 0 or not math.isfinite(v) for v in vals):
                raise ValueError(f"{name} entries must be finite and >= 0")
            object.__setattr__(self, name, vals)
        if not len(self.u1) == len(self.u2) == len(self.alpha_scale):
            raise ValueError("u1, u2 and alpha_scale must have one entry per year")

    @property
    def years(self) -> int:
        return len(self.u1)


@dataclass(frozen=True)
class Congruent:
    """Keep the requirement exactly ``cutoff_c`` above current knowledge."""

    cutoff_c: float

    def __post_init__(self):
        if not self.cutoff_c > 0:
            raise ValueError("cutoff_c must be > 0")


@dataclass(frozen=True)
class PerLessonLevels:
    levels: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.levels)
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise ValueError("levels must be finite and >= 0")
        object.__setattr__(self, "levels", vals)


RequirementPolicy = Polynomial | TwoTier | YearMatrix | Congruent | PerLessonLevels


@dataclass
class TierLatch:
    """Trajectory-local state of a :class:`TwoTier` policy."""

    switched: bool = False
    switch_time: float | None = field(default=None)


def requirement(
    t: float,
    state,
    policy: RequirementPolicy,
    lesson_index: int | None = None,
    k: int = 1,
    latch: TierLatch | None = None,
):
    """Requirement level at ``t`` given pre-step knowledge ``state``.

    ``state`` is the total ``z`` or a ``(z1, z2)`` pair.  Returns a float, or a
    ``(u1, u2)`` pair for :class:`YearMatrix`.
    """
    z = state if isinstance(state, (int, float)) else sum(state)
    if isinstance(policy, Polynomial):
        return policy(t)
    if isinstance(policy, TwoTier):
        if not policy.latched:
            high = policy.high(t)
            return policy.low(t) if high - z > policy.cutoff_c else high
        if latch is None:
            latch = TierLatch()
        if not latch.switched and policy.high(t) - z > policy.cutoff_c:
            latch.switched = True
            latch.switch_time = t
        return policy.low(t) if latch.switched else policy.high(t)
    if isinstance(policy, YearMatrix):
        y = lesson_index
        if y is None:
            y = min(int(t // policy.year_length), policy.years - 1)
        return policy.u1[y], policy.u2[y]
    if isinstance(policy, Congruent):
        return z + policy.cutoff_c if k else z
    if isinstance(policy, PerLessonLevels):
        if lesson_index is None:
            return 0.0
        return policy.levels[lesson_index]
    raise TypeError(f"unknown policy {type(policy).__name__}")
