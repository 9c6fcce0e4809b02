# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  See ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport (cos, sin, sinh, cosh, log, log1p, exp, expm1, sqrt,
                        fabs, INFINITY, NAN)

cnp.import_array()

cdef double LOG2 = 0.6931471805599453


cdef inline double _dist0(double tau, double vs) noexcept nogil:
    # d_p(0, z) from bipolar coordinates; branches match the numpy version
    cdef double c = cos(vs), at = fabs(tau), sh, sn, t, lx
    if c <= 0.0:
        return INFINITY
    if at <= 20.0:
        sh = sinh(0.5 * at)
        sn = sin(0.5 * vs)
        t = 2.0 * (sh * sh + sn * sn) / c
        return log1p(t + sqrt(t * (t + 2.0)))
    lx = at - LOG2 + log1p(exp(-2.0 * at)) - log(c)
    return lx + log1p(sqrt(-expm1(-2.0 * lx)))


cdef inline double _logcos(double vs) noexcept nogil:
    cdef double c = cos(vs)
    if c <= 0.0:
        return -INFINITY if c == 0.0 else NAN
    return log(c)


def partial_sums(gammas, double start=0.0):
    cdef const double[::1] g = np.ascontiguousarray(gammas, dtype=np.float64)
    cdef Py_ssize_t i, n = g.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc = start
    with nogil:
        for i in range(n):
            acc = acc + g[i]
            o[i] = acc
    return out


def z_walk_path(coins, gammas, arcs, double omega0, double varsigma0):
    cdef const cnp.uint8_t[::1] c = np.ascontiguousarray(coins, dtype=np.uint8)
    cdef const double[::1] g = np.ascontiguousarray(gammas, dtype=np.float64)
    cdef const double[::1] a = np.ascontiguousarray(arcs, dtype=np.float64)
    cdef Py_ssize_t i, n = c.shape[0], kg = 0, ka = 0
    if n == 0:
        return np.empty(0), np.empty(0)
    cdef Py_ssize_t need_g = 0
    for i in range(n):
        need_g += c[i] != 0
    if g.shape[0] < need_g or a.shape[0] < n - need_g:
        raise ValueError("not enough gamma or arc draws for the coin sequence")
    omega = np.empty(n, dtype=np.float64)
    vsig = np.empty(n, dtype=np.float64)
    cdef double[::1] om = omega
    cdef double[::1] vv = vsig
    cdef double w = omega0, v = varsigma0
    with nogil:
        for i in range(n):
            if c[i]:
                w = w + g[kg]
                kg += 1
            else:
                v = a[ka]
                ka += 1
            om[i] = w
            vv[i] = v
    return omega, vsig


def record_fields(tau, varsigma, double sat_tau):
    cdef const double[::1] t = np.ascontiguousarray(tau, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(varsigma, dtype=np.float64)
    cdef Py_ssize_t i, n = t.shape[0]
    x = np.empty(n); y = np.empty(n); bp = np.empty(n); bm = np.empty(n); d = np.empty(n)
    sat = np.empty(n, dtype=np.uint8)
    cdef double[::1] xv = x, yv = y, bpv = bp, bmv = bm, dv = d
    cdef cnp.uint8_t[::1] sv = sat
    cdef double tt, den, lc
    with nogil:
        for i in range(n):
            tt = t[i]
            lc = _logcos(s[i])
            if fabs(tt) > sat_tau:
                sv[i] = 1
                xv[i] = 1.0 if tt > 0 else -1.0
                yv[i] = 0.0
            else:
                sv[i] = 0
                den = cosh(tt) + cos(s[i])
                xv[i] = sinh(tt) / den
                yv[i] = sin(s[i]) / den
            bpv[i] = -(tt + lc)
            bmv[i] = tt - lc
            dv[i] = _dist0(tt, s[i])
    return x, y, sat, bp, bm, d


def lil_scan(tau, varsigma, long long n_first, long long burn_in, double[::1] sups, ck_idx):
    cdef const double[::1] t = np.ascontiguousarray(tau, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(varsigma, dtype=np.float64)
    cdef const cnp.int64_t[::1] ck = np.ascontiguousarray(ck_idx, dtype=np.int64)
    cdef Py_ssize_t i, j, m = ck.shape[0], n = t.shape[0], k = 0
    ck_sups = np.empty((m, 3)); ck_vals = np.empty((m, 3))
    cdef double[:, ::1] cs = ck_sups, cv = ck_vals
    cdef double nn, norm, lc, r0, r1, r2
    cdef double s0 = sups[0], s1 = sups[1], s2 = sups[2]
    with nogil:
        for i in range(n):
            nn = <double>(n_first + i)
            norm = sqrt(2.0 * nn * log(log(nn)))
            lc = _logcos(s[i])
            r0 = -(t[i] + lc) / norm
            r1 = (t[i] - lc) / norm
            r2 = _dist0(t[i], s[i]) / norm
            if n_first + i >= burn_in:
                if r0 > s0: s0 = r0
                if r1 > s1: s1 = r1
                if r2 > s2: s2 = r2
            while k < m and ck[k] == i:
                cs[k, 0] = s0; cs[k, 1] = s1; cs[k, 2] = s2
                cv[k, 0] = r0; cv[k, 1] = r1; cv[k, 2] = r2
                k += 1
    if k != m:
        raise ValueError("checkpoint indices must be sorted and within the chunk")
    sups[0] = s0; sups[1] = s1; sups[2] = s2
    return ck_sups, ck_vals
