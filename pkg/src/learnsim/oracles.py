"""Independent reference computations used by the checks.

``pr1_listing`` is a statement-by-statement transcription of the historical
Free Pascal program for the school-years task (graphics calls dropped,
``single`` replaced by Python floats).  It deliberately shares no code with
``learnsim.engine``.
"""

import math


def pascal_round(x):
    # Free Pascal Round: nearest integer, ties to even
    return round(x)


def pr1_listing(n_iter=13200, dt=0.01, every=1):
    """Run the listing's REPEAT loop ``n_iter`` times.

    Returns a list of ``(t, Z1[1..11], Z2[1..11])`` snapshots taken after
    every ``every``-th iteration (plus the initial state).
    """
    g1 = 0.002
    g2 = 0.01
    U1 = [None, 50, 46, 42, 36, 30, 25, 20, 15, 10, 10, 10]
    U2 = [None, 4, 8, 14, 18, 24, 28, 33, 38, 46, 58, 62]
    alfa = [None, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6]
    Z1 = [None] + [0.0] * 11
    Z2 = [None] + [0.0] * 11
    t = 0.0
    snaps = [(t, Z1[1:], Z2[1:])]
    it = 0
    while it < n_iter:
        it += 1
        t = t + dt
        U = 0
        k = 1
        if (pascal_round(t) % 12 >= 9) or (t > 12 * 11 - 3):
            k = 0
        j = pascal_round(t) // 12 + 1
        ZZ1 = 0
        for i in range(1, 12):
            ZZ1 = ZZ1 + Z1[i]
        ZZ2 = 0
        for i in range(1, 12):
            ZZ2 = ZZ2 + Z2[i]
        for i in range(1, 12):
            if j == i:
                k = 1
            else:
                k = 0
            Z1[i] = Z1[i] + k * alfa[i] * 0.01 * (U1[i] - Z1[i]) * dt - g1 * Z1[i] * dt
            Z2[i] = Z2[i] + k * alfa[i] * 0.01 * (U2[i] - Z2[i]) * dt - g2 * Z2[i] * dt
            if Z1[i] < 0:
                Z1[i] = 0
            if Z2[i] < 0:
                Z2[i] = 0
        if it % every == 0 or it == n_iter:
            snaps.append((t, Z1[1:], Z2[1:]))
    return snaps


def max_relative_error(a, b, floor=1e-300):
    """max |a - b| / max(|b|, floor) over paired sequences."""
    worst = 0.0
    for x, y in zip(a, b):
        denom = max(abs(y), floor)
        if x == y:
            continue
        worst = max(worst, abs(x - y) / denom)
    return worst


def congruent_plateau(alpha1, alpha2, gamma1, cutoff_c):
    """Steady weak knowledge under a constant gap: a1*C / (a2 + g1)."""
    return alpha1 * cutoff_c / (alpha2 + gamma1)


def trapezoid(ts, ys):
    return math.fsum(0.5 * (ys[i] + ys[i + 1]) * (ts[i + 1] - ts[i]) for i in range(len(ts) - 1))
