# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Hill-equation kernels: fixed-step RK4 monodromy integration.

Same interface as the numpy fallback in ``_hill_py``; the grid scan runs
the per-point step loop in C and releases the GIL so chunked threading
scales.
"""

from libc.math cimport cos, pi

import numpy as np

BACKEND = "compiled"


cdef inline void _rk4(double* u1, double* v1, double* u2, double* v2,
                      double w0, double wh, double w1, double h) noexcept nogil:
    cdef double a1 = u1[0], b1 = v1[0], a2 = u2[0], b2 = v2[0]
    cdef double k1u1, k1v1, k1u2, k1v2
    cdef double k2u1, k2v1, k2u2, k2v2
    cdef double k3u1, k3v1, k3u2, k3v2
    cdef double k4u1, k4v1, k4u2, k4v2
    cdef double c = h / 6.0

    k1u1 = b1; k1v1 = -w0 * a1
    k1u2 = b2; k1v2 = -w0 * a2

    k2u1 = b1 + 0.5 * h * k1v1
    k2v1 = -wh * (a1 + 0.5 * h * k1u1)
    k2u2 = b2 + 0.5 * h * k1v2
    k2v2 = -wh * (a2 + 0.5 * h * k1u2)

    k3u1 = b1 + 0.5 * h * k2v1
    k3v1 = -wh * (a1 + 0.5 * h * k2u1)
    k3u2 = b2 + 0.5 * h * k2v2
    k3v2 = -wh * (a2 + 0.5 * h * k2u2)

    k4u1 = b1 + h * k3v1
    k4v1 = -w1 * (a1 + h * k3u1)
    k4u2 = b2 + h * k3v2
    k4v2 = -w1 * (a2 + h * k3u2)

    u1[0] = a1 + c * (k1u1 + 2 * k2u1 + 2 * k3u1 + k4u1)
    v1[0] = b1 + c * (k1v1 + 2 * k2v1 + 2 * k3v1 + k4v1)
    u2[0] = a2 + c * (k1u2 + 2 * k2u2 + 2 * k3u2 + k4u2)
    v2[0] = b2 + c * (k1v2 + 2 * k2v2 + 2 * k3v2 + k4v2)


def hill_monodromy_samples(w_samples, double h):
    """Monodromy matrix from W sampled at step endpoints and midpoints."""
    cdef double[::1] w = np.ascontiguousarray(w_samples, dtype=np.float64)
    if w.shape[0] < 3 or w.shape[0] % 2 == 0:
        raise ValueError("w_samples must have odd length 2*steps + 1 >= 3")
    cdef Py_ssize_t steps = (w.shape[0] - 1) // 2
    cdef double u1 = 1.0, v1 = 0.0, u2 = 0.0, v2 = 1.0
    cdef Py_ssize_t k
    with nogil:
        for k in range(steps):
            _rk4(&u1, &v1, &u2, &v2, w[2 * k], w[2 * k + 1], w[2 * k + 2], h)
    return np.array([[u1, u2], [v1, v2]], dtype=np.float64)


def fundamental_trajectory(w_samples, double h):
    """Fundamental-solution arrays (u1, v1, u2, v2) at the step grid."""
    cdef double[::1] w = np.ascontiguousarray(w_samples, dtype=np.float64)
    if w.shape[0] < 3 or w.shape[0] % 2 == 0:
        raise ValueError("w_samples must have odd length 2*steps + 1 >= 3")
    cdef Py_ssize_t steps = (w.shape[0] - 1) // 2
    out_arr = np.empty((4, steps + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double u1 = 1.0, v1 = 0.0, u2 = 0.0, v2 = 1.0
    cdef Py_ssize_t k
    out[0, 0] = u1; out[1, 0] = v1; out[2, 0] = u2; out[3, 0] = v2
    with nogil:
        for k in range(steps):
            _rk4(&u1, &v1, &u2, &v2, w[2 * k], w[2 * k + 1], w[2 * k + 2], h)
            out[0, k + 1] = u1
            out[1, k + 1] = v1
            out[2, k + 1] = u2
            out[3, k + 1] = v2
    return out_arr


def mathieu_scan_traces(a_flat, q_flat, int steps):
    """Monodromy trace and determinant over flattened (a, q) points."""
    cdef double[::1] a = np.ascontiguousarray(a_flat, dtype=np.float64)
    cdef double[::1] q = np.ascontiguousarray(q_flat, dtype=np.float64)
    if a.shape[0] != q.shape[0]:
        raise ValueError("a and q grids must have matching shapes")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    cdef Py_ssize_t n = a.shape[0]
    cdef double h = pi / steps
    traces_arr = np.empty(n, dtype=np.float64)
    dets_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] traces = traces_arr
    cdef double[::1] dets = dets_arr

    cos_arr = np.empty(2 * steps + 1, dtype=np.float64)
    cdef double[::1] cs = cos_arr
    cdef Py_ssize_t j
    for j in range(2 * steps + 1):
        cs[j] = cos(2.0 * (0.5 * h * j))

    cdef double u1, v1, u2, v2, ai, qi
    cdef Py_ssize_t i, k
    with nogil:
        for i in range(n):
            ai = a[i]
            qi = q[i]
            u1 = 1.0; v1 = 0.0; u2 = 0.0; v2 = 1.0
            for k in range(steps):
                _rk4(&u1, &v1, &u2, &v2,
                     ai - 2.0 * qi * cs[2 * k],
                     ai - 2.0 * qi * cs[2 * k + 1],
                     ai - 2.0 * qi * cs[2 * k + 2],
                     h)
            traces[i] = u1 + v2
            dets[i] = u1 * v2 - u2 * v1
    return traces_arr, dets_arr
