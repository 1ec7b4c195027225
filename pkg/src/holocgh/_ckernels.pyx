# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counterparts of ``_pykernels``; same signatures and semantics.

Reductions use four interleaved partial sums combined in a fixed order, so
results are deterministic but not bit-identical to the numpy fallback.
The two-loop recursion fuses each axpy with the following dot product,
halving the passes over the history buffers.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log

cnp.import_array()

DEF CE_EPS = 1e-10
DEF AMP_FLOOR = 1e-12

MSE, CE = 0, 1


def recon_backprop(const double complex[:, ::1] F, const double[:, ::1] target, int kind):
    cdef Py_ssize_t h = F.shape[0], w = F.shape[1], N = h * w, p
    cdef double n = <double>N
    if target.shape[0] != h or target.shape[1] != w:
        raise ValueError("target and field shapes differ")
    R_arr = np.empty((h, w), dtype=np.float64)
    g_arr = np.empty((h, w), dtype=np.float64)
    up_arr = np.empty((h, w), dtype=np.complex128)
    cdef double[::1] R = R_arr.reshape(-1)
    cdef double[::1] g = g_arr.reshape(-1)
    cdef double complex[::1] up = up_arr.reshape(-1)
    cdef const double complex[::1] f = np.asarray(F).reshape(-1)
    cdef const double[::1] t = np.asarray(target).reshape(-1)
    cdef double a, re, im, y, d, tt, c, k, gp
    cdef double sa2 = 0.0, st2 = 0.0, loss = 0.0, dot = 0.0
    cdef bint degenerate

    with nogil:
        for p in range(N):
            re = f[p].real
            im = f[p].imag
            a = sqrt(re * re + im * im)
            R[p] = a
            sa2 += a * a
            st2 += t[p] * t[p]
        degenerate = not sa2 > 0.0
        c = 1.0 if degenerate else sqrt(st2 / sa2)

        # g holds dL/dR, R still holds |F|
        for p in range(N):
            a = R[p]
            y = c * a
            tt = t[p]
            if kind == 0:
                d = y - tt
                loss += d * d
                gp = 2.0 * d / n
            elif y < CE_EPS:
                loss -= tt * log(CE_EPS)
                gp = 0.0
            else:
                loss -= tt * log(y)
                gp = -tt / (n * y)
            g[p] = gp
            dot += gp * a
        loss /= n

        k = 0.0 if degenerate else c * dot / sa2
        for p in range(N):
            a = R[p]
            if a < AMP_FLOOR:
                up[p] = 0.0
            else:
                up[p] = ((c * g[p] - k * a) / a) * f[p]
            R[p] = c * a
    return loss, R_arr, up_arr, bool(degenerate)


def phase_project(const double complex[:, ::1] hfield, const double complex[:, ::1] b):
    cdef Py_ssize_t h = hfield.shape[0], w = hfield.shape[1], i, j
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(h):
            for j in range(w):
                out[i, j] = hfield[i, j].real * b[i, j].imag - hfield[i, j].imag * b[i, j].real
    return out_arr


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t p, end = n - n % 4
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    for p in range(0, end, 4):
        s0 += a[p] * b[p]
        s1 += a[p + 1] * b[p + 1]
        s2 += a[p + 2] * b[p + 2]
        s3 += a[p + 3] * b[p + 3]
    for p in range(end, n):
        s0 += a[p] * b[p]
    return (s0 + s1) + (s2 + s3)


cdef inline double _axpy_dot(double* q, double alpha, const double* x,
                             const double* z, Py_ssize_t n) noexcept nogil:
    """q += alpha * x, returning z . q (new q); z may be NULL."""
    cdef Py_ssize_t p, end = n - n % 4
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    if z == NULL:
        for p in range(n):
            q[p] += alpha * x[p]
        return 0.0
    for p in range(0, end, 4):
        q[p] += alpha * x[p]
        q[p + 1] += alpha * x[p + 1]
        q[p + 2] += alpha * x[p + 2]
        q[p + 3] += alpha * x[p + 3]
        s0 += z[p] * q[p]
        s1 += z[p + 1] * q[p + 1]
        s2 += z[p + 2] * q[p + 2]
        s3 += z[p + 3] * q[p + 3]
    for p in range(end, n):
        q[p] += alpha * x[p]
        s0 += z[p] * q[p]
    return (s0 + s1) + (s2 + s3)


def two_loop(const double[:, ::1] s_buf, const double[:, ::1] y_buf,
             const double[::1] rho, order, const double[::1] grad, double gamma):
    cdef Py_ssize_t m = len(order), n = grad.shape[0], k, p
    cdef Py_ssize_t[::1] slots = np.asarray(order, dtype=np.intp)
    cdef double[::1] alpha = np.empty(max(m, 1))
    out = np.array(grad, dtype=np.float64, copy=True)
    cdef double[::1] qv = out
    cdef double* q = &qv[0]
    cdef double dot, beta
    if m == 0:
        return -out
    with nogil:
        # first loop, newest pair first
        dot = _dot(&s_buf[slots[m - 1], 0], q, n)
        for k in range(m - 1, -1, -1):
            alpha[k] = rho[slots[k]] * dot
            dot = _axpy_dot(q, -alpha[k], &y_buf[slots[k], 0],
                            &s_buf[slots[k - 1], 0] if k > 0 else NULL, n)
        for p in range(n):
            q[p] *= gamma
        # second loop, oldest pair first
        dot = _dot(&y_buf[slots[0], 0], q, n)
        for k in range(m):
            beta = rho[slots[k]] * dot
            dot = _axpy_dot(q, alpha[k] - beta, &s_buf[slots[k], 0],
                            &y_buf[slots[k + 1], 0] if k + 1 < m else NULL, n)
        for p in range(n):
            q[p] = -q[p]
    return out
