"""Pure-numpy fallback kernels for Hill-equation monodromy integration.

Mirrors the compiled interface in ``_hill_cy``; selected automatically when
the extension is unavailable (or forced via TRAPCALC_FORCE_PYTHON_KERNELS).
The grid scan is vectorized over all grid points, so the step loop is the
only Python-level iteration.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _rk4_step_vec(u1, v1, u2, v2, w0, w_half, w1, h):
    # u' = v, v' = -W u for both fundamental columns at once
    k1u1, k1v1 = v1, -w0 * u1
    k1u2, k1v2 = v2, -w0 * u2

    k2u1 = v1 + 0.5 * h * k1v1
    k2v1 = -w_half * (u1 + 0.5 * h * k1u1)
    k2u2 = v2 + 0.5 * h * k1v2
    k2v2 = -w_half * (u2 + 0.5 * h * k1u2)

    k3u1 = v1 + 0.5 * h * k2v1
    k3v1 = -w_half * (u1 + 0.5 * h * k2u1)
    k3u2 = v2 + 0.5 * h * k2v2
    k3v2 = -w_half * (u2 + 0.5 * h * k2u2)

    k4u1 = v1 + h * k3v1
    k4v1 = -w1 * (u1 + h * k3u1)
    k4u2 = v2 + h * k3v2
    k4v2 = -w1 * (u2 + h * k3u2)

    c = h / 6.0
    return (
        u1 + c * (k1u1 + 2 * k2u1 + 2 * k3u1 + k4u1),
        v1 + c * (k1v1 + 2 * k2v1 + 2 * k3v1 + k4v1),
        u2 + c * (k1u2 + 2 * k2u2 + 2 * k3u2 + k4u2),
        v2 + c * (k1v2 + 2 * k2v2 + 2 * k3v2 + k4v2),
    )


def hill_monodromy_samples(w_samples: np.ndarray, h: float) -> np.ndarray:
    """Monodromy matrix from W sampled at step endpoints and midpoints.

    w_samples has length 2*steps + 1: w_samples[2k] = W(t_k) and
    w_samples[2k+1] = W(t_k + h/2).
    """
    w = np.asarray(w_samples, dtype=float)
    if w.size < 3 or w.size % 2 == 0:
        raise ValueError("w_samples must have odd length 2*steps + 1 >= 3")
    steps = (w.size - 1) // 2
    u1, v1, u2, v2 = 1.0, 0.0, 0.0, 1.0
    for k in range(steps):
        u1, v1, u2, v2 = _rk4_step_vec(
            u1, v1, u2, v2, w[2 * k], w[2 * k + 1], w[2 * k + 2], h
        )
    return np.array([[u1, u2], [v1, v2]], dtype=float)


def fundamental_trajectory(w_samples: np.ndarray, h: float):
    """Fundamental-solution arrays (u1, v1, u2, v2) at the step grid.

    Output length steps + 1 including the initial point.
    """
    w = np.asarray(w_samples, dtype=float)
    if w.size < 3 or w.size % 2 == 0:
        raise ValueError("w_samples must have odd length 2*steps + 1 >= 3")
    steps = (w.size - 1) // 2
    out = np.empty((4, steps + 1), dtype=float)
    u1, v1, u2, v2 = 1.0, 0.0, 0.0, 1.0
    out[:, 0] = (u1, v1, u2, v2)
    for k in range(steps):
        u1, v1, u2, v2 = _rk4_step_vec(
            u1, v1, u2, v2, w[2 * k], w[2 * k + 1], w[2 * k + 2], h
        )
        out[:, k + 1] = (u1, v1, u2, v2)
    return out


def mathieu_scan_traces(a_flat: np.ndarray, q_flat: np.ndarray, steps: int):
    """Monodromy trace and determinant over flattened (a, q) points.

    Integrates u'' + (a - 2 q cos 2t) u = 0 over one period [0, pi] with
    fixed-step RK4, all grid points advanced together.
    """
    a = np.ascontiguousarray(a_flat, dtype=float)
    q = np.ascontiguousarray(q_flat, dtype=float)
    if a.shape != q.shape:
        raise ValueError("a and q grids must have matching shapes")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    h = np.pi / steps
    n = a.size
    u1 = np.ones(n)
    v1 = np.zeros(n)
    u2 = np.zeros(n)
    v2 = np.ones(n)
    ts = np.arange(steps) * h
    cos0 = np.cos(2.0 * ts)
    cos_half = np.cos(2.0 * (ts + 0.5 * h))
    cos1 = np.cos(2.0 * (ts + h))
    for k in range(steps):
        w0 = a - 2.0 * q * cos0[k]
        w_half = a - 2.0 * q * cos_half[k]
        w1 = a - 2.0 * q * cos1[k]
        u1, v1, u2, v2 = _rk4_step_vec(u1, v1, u2, v2, w0, w_half, w1, h)
    traces = u1 + v2
    dets = u1 * v2 - u2 * v1
    return traces, dets
