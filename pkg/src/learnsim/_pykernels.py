"""Pure-Python Euler kernel; reference twin of ``_kernels.pyx``.

Both implementations must perform the same floating-point operations in the
same order so that their trajectories agree bit for bit.
"""

import math

ONE_COMP = 0
TWO_COMP_T2 = 1

POLY = 0
TWOTIER = 1
CONGRUENT = 2
LEVELS = 3


def _pow(x, y):
    # C pow() saturates to inf where Python raises
    try:
        return x**y
    except OverflowError:
        return math.inf


def _poly(t, powers, coeffs):
    s = 0.0
    for j in range(len(powers)):
        s += coeffs[j] * _pow(t, powers[j])
    return s


def run_single(
    model, params, z1, z2, dt, n_steps,
    seg_lo, seg_hi, seg_lesson, lesson_work,
    policy, hi_pow, hi_coef, lo_pow, lo_coef, cval, latched, levels,
    record_every, rec_t, rec_k, rec_u, rec_z1, rec_z2, rec_p, rec_gate,
):
    """Integrate a single-requirement model for ``n_steps`` Euler steps.

    Effort is ``k * max(u - z, 0) * dt``: a requirement below current
    knowledge costs nothing.

    Returns ``(z1, z2, p, n_rec, status, gate_step, switch_step)``; status 1
    flags a non-finite state.
    """
    p0, p1, p2, p3 = (float(v) for v in params[:4])
    levels = [float(v) for v in levels]
    z1 = float(z1)
    z2 = float(z2)
    nseg = len(seg_lo)
    si = 0
    p = 0.0
    n_rec = 0
    gate_step = -1
    switch_step = -1
    switched = False
    hi_pow = [float(v) for v in hi_pow]
    hi_coef = [float(v) for v in hi_coef]
    lo_pow = [float(v) for v in lo_pow]
    lo_coef = [float(v) for v in lo_coef]

    for n in range(n_steps + 1):
        while si < nseg and seg_hi[si] <= n:
            si += 1
        if si < nseg and seg_lo[si] <= n:
            k = 1
            li = seg_lesson[si]
        else:
            k = 0
            li = -1
        t = n * dt
        z = z1 + z2

        if policy == POLY:
            u = _poly(t, hi_pow, hi_coef)
        elif policy == TWOTIER:
            if switched:
                u = _poly(t, lo_pow, lo_coef)
            else:
                u = _poly(t, hi_pow, hi_coef)
                if u - z > cval:
                    u = _poly(t, lo_pow, lo_coef)
                    if latched:
                        switched = True
                        switch_step = n
                    elif switch_step < 0:
                        switch_step = n
        elif policy == CONGRUENT:
            u = z + cval if k else z
        else:
            u = levels[li] if k else 0.0

        tripped = model == ONE_COMP and u > z1 + p3
        if tripped and k and gate_step < 0:
            gate_step = n

        if record_every and (n % record_every == 0 or n == n_steps):
            rec_t[n_rec] = t
            rec_k[n_rec] = k
            rec_u[n_rec] = u
            rec_z1[n_rec] = z1
            rec_z2[n_rec] = z2
            rec_p[n_rec] = p
            rec_gate[n_rec] = tripped
            n_rec += 1
        if n == n_steps:
            break

        if model == ONE_COMP:
            # params: alpha, gamma, b, cutoff
            if k:
                if tripped:
                    r1 = -p1 * z1
                else:
                    r1 = p0 * _pow(z1, p2) * (u - z1) - p1 * z1
                g = u - z1
                w = g * dt if g > 0.0 else 0.0
                p += w
                lesson_work[li] += w
            else:
                r1 = -p1 * z1
            z1 = z1 + r1 * dt
            if z1 < 0.0:
                z1 = 0.0
        else:
            # params: alpha1, alpha2, gamma1, gamma2
            if k:
                r1 = p0 * (u - z) - p1 * z1 - p2 * z1
                r2 = p1 * z1 - p3 * z2
                g = u - z
                w = g * dt if g > 0.0 else 0.0
                p += w
                lesson_work[li] += w
            else:
                r1 = -p2 * z1
                r2 = -p3 * z2
            z1 = z1 + r1 * dt
            if z1 < 0.0:
                z1 = 0.0
            z2 = z2 + r2 * dt
            if z2 < 0.0:
                z2 = 0.0

    status = 0 if (math.isfinite(z1) and math.isfinite(z2) and math.isfinite(p)) else 1
    return z1, z2, p, n_rec, status, gate_step, switch_step


# ------------------------------------------------------------------------
# Terminal-state path.  Type-2 chunks with constant coefficients (lesson
# gaps, constant levels, congruent lessons) are affine maps of
# (z1, z2, 1, W); n Euler steps collapse into one matrix power.


def _matmul4(a, b):
    out = [0.0] * 16
    for i in range(4):
        for j in range(4):
            s = 0.0
            for m in range(4):
                s += a[4 * i + m] * b[4 * m + j]
            out[4 * i + j] = s
    return out


def _matpow4(a, n):
    result = [1.0, 0.0, 0.0, 0.0,
              0.0, 1.0, 0.0, 0.0,
              0.0, 0.0, 1.0, 0.0,
              0.0, 0.0, 0.0, 1.0]
    base = a
    while n:
        if n & 1:
            result = _matmul4(result, base)
        n >>= 1
        if n:
            base = _matmul4(base, base)
    return result


def _propagate(mat, n, z1, z2):
    a = _matpow4(mat, n)
    x = (z1, z2, 1.0, 0.0)
    out = [0.0] * 4
    for i in range(4):
        s = 0.0
        for m in range(4):
            s += a[4 * i + m] * x[m]
        out[i] = s
    z1n = out[0] if out[0] > 0.0 else 0.0
    z2n = out[1] if out[1] > 0.0 else 0.0
    return z1n, z2n, out[3]


def _decay_matrix(g1, g2, dt):
    return [1.0 - dt * g1, 0.0, 0.0, 0.0,
            0.0, 1.0 - dt * g2, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0]


def _lesson_matrix(a1, a2, g1, g2, dt, u, congruent):
    if congruent:
        # u - z is held at the cutoff, so the a1 term no longer feeds back
        return [1.0 - dt * (a2 + g1), 0.0, dt * a1 * u, 0.0,
                dt * a2, 1.0 - dt * g2, 0.0, 0.0,
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, dt * u, 1.0]
    return [1.0 - dt * (a1 + a2 + g1), -dt * a1, dt * a1 * u, 0.0,
            dt * a2, 1.0 - dt * g2, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            -dt, -dt, dt * u, 1.0]


def _step_levels(z1, z2, u, n, a1, a2, g1, g2, dt):
    w_sum = 0.0
    for _ in range(n):
        z = z1 + z2
        r1 = a1 * (u - z) - a2 * z1 - g1 * z1
        r2 = a2 * z1 - g2 * z2
        g = u - z
        if g > 0.0:
            w_sum += g * dt
        z1 = z1 + r1 * dt
        if z1 < 0.0:
            z1 = 0.0
        z2 = z2 + r2 * dt
        if z2 < 0.0:
            z2 = 0.0
    return z1, z2, w_sum


def run_terminal(
    model, params, z1, z2, dt, n_steps,
    seg_lo, seg_hi, seg_lesson, lesson_work,
    policy, hi_pow, hi_coef, lo_pow, lo_coef, cval, latched, levels,
):
    """Terminal state and work only.

    Returns ``(z1, z2, p, status, n_fast)`` where ``n_fast`` counts chunks
    handled by the matrix-power path.
    """
    if model != TWO_COMP_T2 or policy not in (CONGRUENT, LEVELS):
        e = []
        out = run_single(
            model, params, z1, z2, dt, n_steps, seg_lo, seg_hi, seg_lesson, lesson_work,
            policy, hi_pow, hi_coef, lo_pow, lo_coef, cval, latched, levels,
            0, e, e, e, e, e, e, e,
        )
        return out[0], out[1], out[2], out[4], 0

    a1, a2, g1, g2 = (float(v) for v in params[:4])
    levels = [float(v) for v in levels]
    z1 = float(z1)
    z2 = float(z2)
    cval = float(cval)
    decay = _decay_matrix(g1, g2, dt)
    p = 0.0
    n_fast = 0
    cur = 0
    for s in range(len(seg_lo)):
        lo = seg_lo[s]
        hi = min(seg_hi[s], n_steps)
        if lo >= n_steps:
            break
        if lo > cur:
            z1, z2, _ = _propagate(decay, lo - cur, z1, z2)
            n_fast += 1
        li = seg_lesson[s]
        n = hi - lo
        if policy == CONGRUENT:
            z1, z2, w = _propagate(_lesson_matrix(a1, a2, g1, g2, dt, cval, True), n, z1, z2)
            n_fast += 1
        else:
            u = levels[li]
            # starting at or below the level, z stays below it: no clamping
            # and no clipped effort, so the chunk is exactly affine
            if z1 + z2 <= u:
                z1, z2, w = _propagate(_lesson_matrix(a1, a2, g1, g2, dt, u, False), n, z1, z2)
                n_fast += 1
            else:
                z1, z2, w = _step_levels(z1, z2, u, n, a1, a2, g1, g2, dt)
        p += w
        lesson_work[li] += w
        cur = hi
    if n_steps > cur:
        z1, z2, _ = _propagate(decay, n_steps - cur, z1, z2)
        n_fast += 1
    status = 0 if (math.isfinite(z1) and math.isfinite(z2) and math.isfinite(p)) else 1
    return z1, z2, p, status, n_fast
