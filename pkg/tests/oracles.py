"""Independent references for the test suite.

Written from the model equations with plain Python lists and scipy; nothing
here imports the package's integrators.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp


def t2_step(z1, z2, u, k, a1, a2, g1, g2, dt):
    """One explicit Euler step of the weak/strong model, clamped."""
    z = z1 + z2
    d1 = k * a1 * (u - z) - k * a2 * z1 - g1 * z1
    d2 = k * a2 * z1 - g2 * z2
    return max(z1 + d1 * dt, 0.0), max(z2 + d2 * dt, 0.0)


def t2_euler(windows, level_of, a1, a2, g1, g2, dt, t_end):
    """Naive Euler over explicit windows; ``level_of(i, z)`` gives u in lesson i.

    Returns (z1, z2, total work, per-lesson work).
    """
    n = int(round(t_end / dt))
    z1 = z2 = 0.0
    work = 0.0
    per = [0.0] * len(windows)
    for step in range(n):
        t = step * dt
        lesson = None
        for i, (s, d) in enumerate(windows):
            if s <= t < s + d:
                lesson = i
        if lesson is None:
            z1, z2 = t2_step(z1, z2, 0.0, 0, a1, a2, g1, g2, dt)
            continue
        u = level_of(lesson, z1 + z2)
        w = max(u - z1 - z2, 0.0) * dt
        work += w
        per[lesson] += w
        z1, z2 = t2_step(z1, z2, u, 1, a1, a2, g1, g2, dt)
    return z1, z2, work, per


def congruent_ode(a1, a2, g1, g2, C, z1_0, z2_0, t):
    """Constant-gap linear system solved by a high-accuracy adaptive integrator."""

    def rhs(_, y):
        return [a1 * C - (a2 + g1) * y[0], a2 * y[0] - g2 * y[1]]

    sol = solve_ivp(rhs, (0.0, t), [z1_0, z2_0], method="DOP853", rtol=1e-12, atol=1e-12)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def one_comp_euler(alpha, gamma, C, u_of, dt, t_end):
    """Single-component learner under a continuous lesson; returns (z_end, first trip time)."""
    n = int(round(t_end / dt))
    z = 0.0
    trip = None
    for step in range(n):
        t = step * dt
        u = u_of(t)
        if u > z + C:
            if trip is None:
                trip = t
            dz = -gamma * z
        else:
            dz = alpha * (u - z) - gamma * z
        z = max(z + dz * dt, 0.0)
    return z, trip


def plateau(a1, a2, g1, C):
    return a1 * C / (a2 + g1)


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def trapezoid(ts, ys):
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(ts)))


def isclose(a, b, rel_tol=1e-12, abs_tol=0.0):
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=abs_tol)
