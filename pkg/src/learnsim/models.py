"""Rate functions and parameter types for the three knowledge-dynamics models.

Everything here is a pure function of its arguments.  Time stepping lives in
:mod:`learnsim.engine`; the compiled kernels inline these expressions with the
same operation order, so any change here must be mirrored in ``_kernels.pyx``
and ``_pykernels.py``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


def _check_nonneg(obj, *names: str) -> None:
    for name in names:
        value = getattr(obj, name)
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"{name} must be a finite number >= 0, got {value!r}")


@dataclass(frozen=True)
class OneCompParams:
    """Single-component learner.

    ``gamma`` is the reciprocal of the e-folding retention time.
    ``cutoff_c`` is the largest requirement gap the learner still works on.
    """

    alpha: float
    gamma: float
    b: float = 0.0
    cutoff_c: float = 15.0

    def __post_init__(self):
        _check_nonneg(self, "alpha", "gamma", "b")
        if not math.isfinite(self.cutoff_c) or self.cutoff_c <= 0:
            raise ValueError(f"cutoff_c must be > 0, got {self.cutoff_c!r}")


@dataclass(frozen=True)
class TwoCompT1Params:
    """Two independent components (everyday and rarely used knowledge)."""

    alpha1: float
    alpha2: float
    gamma1: float
    gamma2: float
    b: float = 0.0

    def __post_init__(self):
        _check_nonneg(self, "alpha1", "alpha2", "gamma1", "gamma2", "b")


@dataclass(frozen=True)
class TwoCompT2Params:
    """Weak knowledge ``z1`` consolidating into strong knowledge ``z2``.

    ``alpha1`` is the acquisition rate and ``alpha2`` the weak-to-strong
    transfer rate.  Both only act during lessons.
    """

    alpha1: float
    alpha2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        _check_nonneg(self, "alpha1", "alpha2", "gamma1", "gamma2")
        if self.gamma2 > self.gamma1:
            warnings.warn(
                f"gamma2={self.gamma2} exceeds gamma1={self.gamma1}: strong "
                "knowledge would be forgotten faster than weak knowledge",
                stacklevel=3,
            )


ModelParams = OneCompParams | TwoCompT1Params | TwoCompT2Params


def gate_open(z: float, u: float, cutoff_c: float) -> bool:
    """True while the learner is still motivated (boundary inclusive)."""
    return u <= z + cutoff_c


def one_comp_rate(z: float, u: float, k: float, p: OneCompParams) -> float:
    if u <= z + p.cutoff_c:
        return k * p.alpha * z**p.b * (u - z) - p.gamma * z
    # gap too wide: no learning even during a lesson
    return -p.gamma * z


def two_comp_t1_rate(
    z1: float,
    z2: float,
    u1: float,
    u2: float,
    k1: float,
    k2: float,
    p: TwoCompT1Params,
) -> tuple[float, float]:
    """Rates of the two uncoupled components.

    Separate activity flags let a caller teach one component (or one school
    year's material) while the other only decays.
    """
    r1 = k1 * p.alpha1 * (u1 - z1) * z1**p.b - p.gamma1 * z1
    r2 = k2 * p.alpha2 * (u2 - z2) * z2**p.b - p.gamma2 * z2
    return r1, r2


def two_comp_t2_rate(
    z1: float, z2: float, u: float, k: float, p: TwoCompT2Params
) -> tuple[float, float]:
    z = z1 + z2
    r1 = k * p.alpha1 * (u - z) - k * p.alpha2 * z1 - p.gamma1 * z1
    r2 = k * p.alpha2 * z1 - p.gamma2 * z2
    return r1, r2


def strength_coefficient(z1: float, z2: float) -> float:
    """Fraction of knowledge that is consolidated; 0 when there is none."""
    total = z1 + z2
    if total <= 0:
        return 0.0
    return z2 / total
