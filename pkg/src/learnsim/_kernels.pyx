# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler kernel.  Mirrors ``_pykernels.run_single`` operation by
operation; build with FP contraction off so results match bit for bit."""

from libc.math cimport pow, isfinite

cdef enum:
    ONE_COMP = 0
    TWO_COMP_T2 = 1

cdef enum:
    POLY = 0
    TWOTIER = 1
    CONGRUENT = 2
    LEVELS = 3


cdef inline double _poly(double t, const double[::1] powers, const double[::1] coeffs) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(powers.shape[0]):
        s += coeffs[j] * pow(t, powers[j])
    return s


def run_single(
    int model, const double[::1] params, double z1, double z2, double dt, long long n_steps,
    const long long[::1] seg_lo, const long long[::1] seg_hi, const long long[::1] seg_lesson,
    double[::1] lesson_work,
    int policy, const double[::1] hi_pow, const double[::1] hi_coef,
    const double[::1] lo_pow, const double[::1] lo_coef, double cval, bint latched,
    const double[::1] levels,
    long long record_every, double[::1] rec_t, unsigned char[::1] rec_k, double[::1] rec_u,
    double[::1] rec_z1, double[::1] rec_z2, double[::1] rec_p, unsigned char[::1] rec_gate,
):
    cdef double p0 = params[0], p1 = params[1], p2 = params[2], p3 = params[3]
    cdef Py_ssize_t nseg = seg_lo.shape[0]
    cdef Py_ssize_t si = 0
    cdef double p = 0.0, t, z, u, r1, r2, w, g
    cdef long long n, n_rec = 0, gate_step = -1, switch_step = -1
    cdef long long li
    cdef int k
    cdef bint switched = False, tripped
    cdef int status

    with nogil:
        n = 0
        while n <= n_steps:
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
                if k:
                    u = z + cval
                else:
                    u = z
            else:
                if k:
                    u = levels[li]
                else:
                    u = 0.0

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
                if k:
                    if tripped:
                        r1 = -p1 * z1
                    else:
                        r1 = p0 * pow(z1, p2) * (u - z1) - p1 * z1
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
            n += 1

    status = 0 if (isfinite(z1) and isfinite(z2) and isfinite(p)) else 1
    return z1, z2, p, n_rec, status, gate_step, switch_step


# Terminal-state path; see _pykernels.run_terminal.

cdef void _matmul4(const double* a, const double* b, double* out) noexcept nogil:
    cdef int i, j, m
    cdef double s
    for i in range(4):
        for j in range(4):
            s = 0.0
            for m in range(4):
                s += a[4 * i + m] * b[4 * m + j]
            out[4 * i + j] = s


cdef void _matpow4(const double* a, long long n, double* result) noexcept nogil:
    cdef double base[16]
    cdef double tmp[16]
    cdef int i
    for i in range(16):
        result[i] = 0.0
        base[i] = a[i]
    result[0] = 1.0
    result[5] = 1.0
    result[10] = 1.0
    result[15] = 1.0
    while n:
        if n & 1:
            _matmul4(result, base, tmp)
            for i in range(16):
                result[i] = tmp[i]
        n >>= 1
        if n:
            _matmul4(base, base, tmp)
            for i in range(16):
                base[i] = tmp[i]


cdef void _propagate(const double* mat, long long n, double* z1, double* z2, double* w) noexcept nogil:
    cdef double a[16]
    cdef double x[4]
    cdef double out[4]
    cdef double s
    cdef int i, m
    _matpow4(mat, n, a)
    x[0] = z1[0]
    x[1] = z2[0]
    x[2] = 1.0
    x[3] = 0.0
    for i in range(4):
        s = 0.0
        for m in range(4):
            s += a[4 * i + m] * x[m]
        out[i] = s
    z1[0] = out[0] if out[0] > 0.0 else 0.0
    z2[0] = out[1] if out[1] > 0.0 else 0.0
    w[0] = out[3]


cdef void _eye(double* m) noexcept nogil:
    cdef int i
    for i in range(16):
        m[i] = 0.0
    m[0] = 1.0
    m[5] = 1.0
    m[10] = 1.0
    m[15] = 1.0


cdef void _lesson_matrix(double* m, double a1, double a2, double g1, double g2, double dt,
                         double u, bint congruent) noexcept nogil:
    _eye(m)
    if congruent:
        m[0] = 1.0 - dt * (a2 + g1)
        m[2] = dt * a1 * u
        m[4] = dt * a2
        m[5] = 1.0 - dt * g2
        m[14] = dt * u
    else:
        m[0] = 1.0 - dt * (a1 + a2 + g1)
        m[1] = -dt * a1
        m[2] = dt * a1 * u
        m[4] = dt * a2
        m[5] = 1.0 - dt * g2
        m[12] = -dt
        m[13] = -dt
        m[14] = dt * u


def run_terminal(
    int model, const double[::1] params, double z1, double z2, double dt, long long n_steps,
    const long long[::1] seg_lo, const long long[::1] seg_hi, const long long[::1] seg_lesson,
    double[::1] lesson_work,
    int policy, const double[::1] hi_pow, const double[::1] hi_coef,
    const double[::1] lo_pow, const double[::1] lo_coef, double cval, bint latched,
    const double[::1] levels,
):
    cdef double[::1] e
    cdef unsigned char[::1] eb
    if model != TWO_COMP_T2 or (policy != CONGRUENT and policy != LEVELS):
        e = _EMPTY_D
        eb = _EMPTY_B
        out = run_single(model, params, z1, z2, dt, n_steps, seg_lo, seg_hi, seg_lesson,
                         lesson_work, policy, hi_pow, hi_coef, lo_pow, lo_coef, cval, latched,
                         levels, 0, e, eb, e, e, e, e, eb)
        return out[0], out[1], out[2], out[4], 0

    cdef double a1 = params[0], a2 = params[1], g1 = params[2], g2 = params[3]
    cdef double decay[16]
    cdef double mat[16]
    cdef double p = 0.0, w, u, z, r1, r2, g
    cdef long long n_fast = 0, cur = 0, lo, hi, n, j
    cdef Py_ssize_t s, li
    cdef int status

    _eye(decay)
    decay[0] = 1.0 - dt * g1
    decay[5] = 1.0 - dt * g2

    with nogil:
        for s in range(seg_lo.shape[0]):
            lo = seg_lo[s]
            hi = seg_hi[s]
            if hi > n_steps:
                hi = n_steps
            if lo >= n_steps:
                break
            if lo > cur:
                _propagate(decay, lo - cur, &z1, &z2, &w)
                n_fast += 1
            li = seg_lesson[s]
            n = hi - lo
            if policy == CONGRUENT:
                _lesson_matrix(mat, a1, a2, g1, g2, dt, cval, True)
                _propagate(mat, n, &z1, &z2, &w)
                n_fast += 1
            else:
                u = levels[li]
                if z1 + z2 <= u:
                    _lesson_matrix(mat, a1, a2, g1, g2, dt, u, False)
                    _propagate(mat, n, &z1, &z2, &w)
                    n_fast += 1
                else:
                    w = 0.0
                    for j in range(n):
                        z = z1 + z2
                        r1 = a1 * (u - z) - a2 * z1 - g1 * z1
                        r2 = a2 * z1 - g2 * z2
                        g = u - z
                        if g > 0.0:
                            w += g * dt
                        z1 = z1 + r1 * dt
                        if z1 < 0.0:
                            z1 = 0.0
                        z2 = z2 + r2 * dt
                        if z2 < 0.0:
                            z2 = 0.0
            p += w
            lesson_work[li] += w
            cur = hi
        if n_steps > cur:
            _propagate(decay, n_steps - cur, &z1, &z2, &w)
            n_fast += 1

    status = 0 if (isfinite(z1) and isfinite(z2) and isfinite(p)) else 1
    return z1, z2, p, status, n_fast


import numpy as _np
_EMPTY_D = _np.zeros(0)
_EMPTY_B = _np.zeros(0, dtype=_np.uint8)
