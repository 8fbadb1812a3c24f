# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched simulation kernel.

Scalar per-particle RK4 loops over the candidate batch; the GIL is released
for the whole integration so callers can overlap batches across threads.
Arithmetic (stage ordering, left-associated integer powers) matches the
pure-numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite, sin

cnp.import_array()

COMPILED = True


cdef inline double powi(double base, int e) noexcept nogil:
    cdef double out = 1.0
    cdef int i
    for i in range(e):
        out *= base
    return out


cdef inline double term_val(int kind, int a, int b, double x, double v) noexcept nogil:
    cdef double sgn, mag
    if kind == 0:
        return 1.0
    if kind == 1:
        return powi(x, a) * powi(v, b)
    if kind == 2:
        return sin(x) if a == 0 else sin(v)
    if kind == 3:
        return fabs(x) if a == 0 else fabs(v)
    sgn = x if a == 0 else v
    mag = x if b == 0 else v
    return sgn * fabs(mag)


cdef inline double rhs(const int[:, ::1] codes, const double* theta, int N,
                       double x, double v) noexcept nogil:
    cdef double acc = 0.0
    cdef int j
    for j in range(N):
        acc += theta[j] * term_val(codes[j, 0], codes[j, 1], codes[j, 2], x, v)
    return acc


def simulate_batch(codes, thetas, double x0, double v0, t, int substeps, double blowup):
    """Integrate B candidate models over the output grid `t`.

    Returns (acc (B, m), x (B, m), v (B, m), ok (B,)); diverged rows are
    flagged ok=False and filled with +inf. See the fallback backend for the
    full contract.
    """
    codes_arr = np.ascontiguousarray(codes, dtype=np.int32)
    thetas_arr = np.ascontiguousarray(thetas, dtype=np.float64)
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")

    cdef const int[:, ::1] cv = codes_arr
    cdef const double[:, ::1] th = thetas_arr
    cdef const double[::1] tv = t_arr
    cdef Py_ssize_t B = th.shape[0]
    cdef Py_ssize_t m = tv.shape[0]
    cdef int N = cv.shape[0]

    acc_arr = np.empty((B, m))
    x_arr = np.empty((B, m))
    v_arr = np.empty((B, m))
    ok_arr = np.ones(B, dtype=np.uint8)
    cdef double[:, ::1] accv = acc_arr
    cdef double[:, ::1] xsv = x_arr
    cdef double[:, ::1] vsv = v_arr
    cdef unsigned char[::1] okv = ok_arr

    cdef Py_ssize_t b, i, j
    cdef int s, ok
    cdef const double* theta
    cdef double x, v, h, tprev
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v

    with nogil:
        for b in range(B):
            theta = &th[b, 0]
            x = x0
            v = v0
            tprev = 0.0
            ok = 1
            k1v = rhs(cv, theta, N, x, v)
            for i in range(m):
                h = (tv[i] - tprev) / substeps
                tprev = tv[i]
                for s in range(substeps):
                    if s > 0:
                        k1v = rhs(cv, theta, N, x, v)
                    k1x = v
                    k2x = v + (0.5 * h) * k1v
                    k2v = rhs(cv, theta, N, x + (0.5 * h) * k1x, k2x)
                    k3x = v + (0.5 * h) * k2v
                    k3v = rhs(cv, theta, N, x + (0.5 * h) * k2x, k3x)
                    k4x = v + h * k3v
                    k4v = rhs(cv, theta, N, x + h * k3x, k4x)
                    x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                    v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
                    if not (fabs(x) <= blowup and fabs(v) <= blowup):
                        ok = 0
                        break
                if ok == 0:
                    break
                k1v = rhs(cv, theta, N, x, v)
                accv[b, i] = k1v
                xsv[b, i] = x
                vsv[b, i] = v
                if not isfinite(k1v):
                    ok = 0
                    break
            if ok == 0:
                okv[b] = 0
                for j in range(m):
                    accv[b, j] = INFINITY
                    xsv[b, j] = INFINITY
                    vsv[b, j] = INFINITY

    return acc_arr, x_arr, v_arr, ok_arr.astype(bool)
