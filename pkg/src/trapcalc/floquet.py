"""Hill-equation stability for driven ion traps.

The reduced radial/axial motion is zeta'' + W(t) zeta = 0 with a periodic
coefficient W built either directly (Mathieu form a - 2q cos 2t) or from a
trap configuration. The monodromy matrix over one period decides stability:
|trace| < 2 stable, |trace| > 2 unstable, a 1e-9 band around 2 is classified
marginal. Stable systems carry a quasienergy ladder with spacing 2 mu.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    FrameSingularityError,
    NumericError,
    UnstableSystemError,
    UnsupportedConfigurationError,
)

__all__ = [
    "TrapConfig",
    "HillCoefficients",
    "FloquetResult",
    "StabilityMap",
    "QuasienergyLadder",
    "EvolutionFrame",
    "cyclotron_frequency",
    "mathieu_parameters",
    "hill_from_trap",
    "mathieu_hill",
    "constant_hill",
    "monodromy",
    "mathieu_stability_scan",
    "trap_stability_scan",
    "coupled_radial_monodromy",
    "quasienergy",
    "evolution_frame",
    "thread_budget",
]

MARGINAL_BAND = 1e-9


def thread_budget() -> int:
    """Worker bound from TRAPCALC_THREADS (0 or unset means auto)."""
    raw = os.environ.get("TRAPCALC_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TRAPCALC_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("TRAPCALC_THREADS must be >= 0")
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, min(n, 32))


@dataclass(frozen=True)
class TrapConfig:
    """Electrode/field parameters for a quadrupole trap.

    kind: 'paul' (rf only), 'penning' (static + magnetic), or 'combined'.
    U0, V0: static and rf electrode voltages; Omega: rf drive frequency;
    r0, z0: radial/axial electrode scale; B0: axial magnetic field;
    Q, mass: ion charge and mass.
    """

    kind: str
    U0: float = 0.0
    V0: float = 0.0
    Omega: float = 0.0
    r0: float = 1.0
    z0: float = 1.0
    B0: float = 0.0
    Q: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.kind not in ("paul", "penning", "combined"):
            raise UnsupportedConfigurationError(
                f"kind must be paul/penning/combined, got {self.kind!r}"
            )
        if self.mass <= 0:
            raise UnsupportedConfigurationError("mass must be positive")
        if self.Q == 0:
            raise UnsupportedConfigurationError("charge must be nonzero")
        if self.geometry_scale <= 0:
            raise UnsupportedConfigurationError("r0^2 + 2 z0^2 must be positive")
        if self.kind == "paul":
            if self.B0 != 0:
                raise UnsupportedConfigurationError("paul trap carries no B field")
            if self.Omega <= 0:
                raise UnsupportedConfigurationError("paul trap needs Omega > 0")
        if self.kind == "penning":
            if self.V0 != 0:
                raise UnsupportedConfigurationError("penning trap carries no rf drive")
            if self.B0 == 0:
                raise UnsupportedConfigurationError("penning trap needs B0 != 0")
        if self.kind == "combined":
            if self.Omega <= 0 or self.B0 == 0:
                raise UnsupportedConfigurationError(
                    "combined trap needs Omega > 0 and B0 != 0"
                )

    @property
    def geometry_scale(self) -> float:
        return self.r0**2 + 2.0 * self.z0**2


def cyclotron_frequency(cfg: TrapConfig) -> float:
    return cfg.Q * cfg.B0 / cfg.mass


def _field_coefficients(cfg: TrapConfig, axis: str, rotating_frame: bool):
    """Constant and cosine parts (w0, w1) of W(t) = w0 + w1 cos(Omega t)."""
    if axis not in ("axial", "radial"):
        raise UnsupportedConfigurationError(f"axis must be axial/radial, got {axis!r}")
    r2 = cfg.geometry_scale
    ka = cfg.Q / (cfg.mass * r2)
    if axis == "axial":
        return -4.0 * ka * cfg.U0, -4.0 * ka * cfg.V0
    w0 = 2.0 * ka * cfg.U0
    w1 = 2.0 * ka * cfg.V0
    if cfg.B0 != 0:
        if not rotating_frame:
            raise UnsupportedConfigurationError(
                "radial motion with B0 != 0 couples the transverse axes; "
                "pass rotating_frame=True for the decoupled description"
            )
        w0 += 0.25 * cyclotron_frequency(cfg) ** 2
    return w0, w1


def mathieu_parameters(
    cfg: TrapConfig, axis: str, rotating_frame: bool = False
) -> tuple[float, float]:
    """Dimensionless (a, q) of the equivalent a - 2q cos(2 tau) equation.

    Uses tau = Omega t / 2; requires a driven configuration (Omega > 0).
    """
    if cfg.Omega <= 0:
        raise UnsupportedConfigurationError(
            "Mathieu parameters need a drive (Omega > 0)"
        )
    w0, w1 = _field_coefficients(cfg, axis, rotating_frame)
    return 4.0 * w0 / cfg.Omega**2, -2.0 * w1 / cfg.Omega**2


def _sample(fn, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    try:
        out = np.asarray(fn(t), dtype=float)
        if out.shape == t.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(x)) for x in t])


@dataclass(frozen=True)
class HillCoefficients:
    """Periodic coefficient bundle for zeta'' + W(t) zeta = 0.

    W derives from the control parameters as W = lam - 2 c' - 4 c^2; for
    trap-derived coefficients c vanishes and W = lam. Periodicity of W is
    validated on 16 sample points at construction.
    """

    w: object
    lam: object
    c: object
    period: float

    def __post_init__(self):
        if not (self.period > 0 and np.isfinite(self.period)):
            raise ValueError(f"period must be positive, got {self.period!r}")
        ts = np.linspace(0.0, self.period, 16, endpoint=False)
        w0 = _sample(self.w, ts)
        w1 = _sample(self.w, ts + self.period)
        if not np.all(np.isfinite(w0)):
            raise NumericError("W(t) produced non-finite samples")
        scale = max(1.0, float(np.max(np.abs(w0))))
        if float(np.max(np.abs(w1 - w0))) > 1e-9 * scale:
            raise ValueError("W(t + period) deviates from W(t); period is wrong")

    @classmethod
    def from_control(cls, lam, c, period: float, c_dot=None) -> "HillCoefficients":
        """Build from control parameters lam(t), c(t).

        c_dot defaults to a centered difference of c with h = period * 1e-5.
        """
        if c_dot is None:
            h = period * 1e-5

            def c_dot(t, _c=c, _h=h):
                return (
                    _sample(_c, np.asarray(t, dtype=float) + _h)
                    - _sample(_c, np.asarray(t, dtype=float) - _h)
                ) / (2.0 * _h)

        def w(t, _lam=lam, _c=c, _cd=c_dot):
            t = np.asarray(t, dtype=float)
            return _sample(_lam, t) - 2.0 * _sample(_cd, t) - 4.0 * _sample(_c, t) ** 2

        return cls(w=w, lam=lam, c=c, period=period)


def mathieu_hill(a: float, q: float) -> HillCoefficients:
    """W(t) = a - 2 q cos(2 t), period pi."""

    def w(t, _a=a, _q=q):
        return _a - 2.0 * _q * np.cos(2.0 * np.asarray(t, dtype=float))

    return HillCoefficients(w=w, lam=w, c=lambda t: np.zeros_like(
        np.asarray(t, dtype=float)), period=math.pi)


def constant_hill(w0: float, period: float = 1.0) -> HillCoefficients:
    """Constant-coefficient equation observed over an arbitrary interval."""

    def w(t, _w0=w0):
        return np.full_like(np.asarray(t, dtype=float), _w0)

    return HillCoefficients(w=w, lam=w, c=lambda t: np.zeros_like(
        np.asarray(t, dtype=float)), period=period)


def hill_from_trap(
    cfg: TrapConfig, axis: str, rotating_frame: bool = False
) -> HillCoefficients:
    """Reduced single-axis Hill coefficients for a trap configuration.

    Axial motion never feels B0. Radial motion with B0 != 0 requires
    rotating_frame=True (frame rotating at omega_c/2), which adds
    omega_c^2/4 to the static part. A drive-free configuration has no
    intrinsic period; the conventional observation interval 1.0 is used.
    """
    w0, w1 = _field_coefficients(cfg, axis, rotating_frame)
    period = 2.0 * math.pi / cfg.Omega if cfg.Omega > 0 else 1.0

    def w(t, _w0=w0, _w1=w1, _om=cfg.Omega):
        t = np.asarray(t, dtype=float)
        if _om > 0:
            return _w0 + _w1 * np.cos(_om * t)
        return np.full_like(t, _w0)

    return HillCoefficients(w=w, lam=w, c=lambda t: np.zeros_like(
        np.asarray(t, dtype=float)), period=period)


@dataclass(frozen=True)
class FloquetResult:
    """Monodromy summary for one Hill equation over one period."""

    monodromy_matrix: np.ndarray
    trace: float
    det: float
    mu: float | None
    stable: bool
    marginal: bool
    growth_rate: float
    steps: int

    @property
    def classification(self) -> str:
        if self.marginal:
            return "marginal"
        return "stable" if self.stable else "unstable"


def _classify(trace: float):
    """(mu, stable, marginal, growth_rate) from the monodromy trace."""
    at = abs(trace)
    marginal = abs(2.0 - at) <= MARGINAL_BAND
    stable = (at < 2.0) and not marginal
    mu = float(np.arccos(np.clip(trace / 2.0, -1.0, 1.0))) if at <= 2.0 else None
    growth = float(np.arccosh(at / 2.0)) if at > 2.0 else 0.0
    return mu, stable, marginal, growth


def monodromy(hill: HillCoefficients, steps: int = 4096) -> FloquetResult:
    """Fixed-step RK4 monodromy over one period from unit initial columns.

    The determinant must return to 1 (Wronskian conservation); drift beyond
    1e-6 raises a numeric error. Doubling steps moves the trace by O(h^4).
    """
    if steps < 16:
        raise ValueError("steps must be >= 16")
    h = hill.period / steps
    ts = 0.5 * h * np.arange(2 * steps + 1)
    w = _sample(hill.w, ts)
    if not np.all(np.isfinite(w)):
        raise NumericError("W(t) produced non-finite samples")
    m = _kernels.hill_monodromy_samples(w, h)
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    if not np.isfinite(tr) or not np.isfinite(det):
        raise NumericError("monodromy integration overflowed")
    if abs(det - 1.0) > 1e-6:
        raise NumericError(
            f"monodromy determinant drifted to {det:.12g}; "
            f"increase steps (used {steps})"
        )
    mu, stable, marginal, growth = _classify(tr)
    return FloquetResult(
        monodromy_matrix=m,
        trace=tr,
        det=det,
        mu=mu,
        stable=stable,
        marginal=marginal,
        growth_rate=growth,
        steps=steps,
    )


@dataclass(frozen=True)
class StabilityMap:
    """Grid scan results; arrays indexed [i_a, i_q].

    In axis-pair mode trace/mu/det describe the scanned (axial) equation
    while ``stable`` additionally requires the partner radial equation at
    (-a/2, -q/2) to be stable.
    """

    a_values: np.ndarray
    q_values: np.ndarray
    trace: np.ndarray
    det: np.ndarray
    mu: np.ndarray
    stable: np.ndarray
    marginal: np.ndarray
    steps: int
    axis_pair: bool = field(default=False)


def _scan_traces(a_flat, q_flat, steps):
    """Kernel dispatch with chunked threading under the thread budget."""
    workers = thread_budget()
    n = a_flat.size
    chunk = 4096
    if workers == 1 or n <= chunk:
        return _kernels.mathieu_scan_traces(a_flat, q_flat, steps)
    bounds = list(range(0, n, chunk))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(
                lambda lo: _kernels.mathieu_scan_traces(
                    a_flat[lo : lo + chunk], q_flat[lo : lo + chunk], steps
                ),
                bounds,
            )
        )
    traces = np.concatenate([p[0] for p in parts])
    dets = np.concatenate([p[1] for p in parts])
    return traces, dets


def _classify_arrays(trace: np.ndarray):
    at = np.abs(trace)
    marginal = np.abs(2.0 - at) <= MARGINAL_BAND
    stable = (at < 2.0) & ~marginal
    mu = np.where(at <= 2.0, np.arccos(np.clip(trace / 2.0, -1.0, 1.0)), np.nan)
    return mu, stable, marginal


def mathieu_stability_scan(
    a_values,
    q_values,
    steps: int = 4096,
    axis_pair: bool = False,
) -> StabilityMap:
    """Classify a - 2q cos 2t over the (a, q) grid.

    axis_pair treats the grid as axial parameters and requires the paired
    radial equation at (-a/2, -q/2) to be stable as well (ideal-quadrupole
    voltage ratio between the two axes).
    """
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    q_values = np.atleast_1d(np.asarray(q_values, dtype=float))
    aa, qq = np.meshgrid(a_values, q_values, indexing="ij")
    traces, dets = _scan_traces(aa.ravel(), qq.ravel(), steps)
    bad = np.abs(dets - 1.0) > 1e-6
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NumericError(
            f"monodromy determinant drifted at (a, q) = "
            f"({aa.ravel()[i]:.6g}, {qq.ravel()[i]:.6g}); increase steps"
        )
    shape = aa.shape
    trace = traces.reshape(shape)
    det = dets.reshape(shape)
    mu, stable, marginal = _classify_arrays(trace)
    if axis_pair:
        tr2, det2 = _scan_traces(-0.5 * aa.ravel(), -0.5 * qq.ravel(), steps)
        if np.any(np.abs(det2 - 1.0) > 1e-6):
            raise NumericError("partner-axis monodromy determinant drifted")
        _, stable2, _ = _classify_arrays(tr2.reshape(shape))
        stable = stable & stable2
    return StabilityMap(
        a_values=a_values,
        q_values=q_values,
        trace=trace,
        det=det,
        mu=mu,
        stable=stable,
        marginal=marginal,
        steps=steps,
        axis_pair=axis_pair,
    )


def trap_stability_scan(
    cfg: TrapConfig,
    u0_values,
    v0_values,
    rotating_frame: bool = False,
    steps: int = 4096,
) -> dict:
    """Combined axial+radial stability over an (U0, V0) voltage grid.

    Returns per-axis StabilityMap objects (keyed 'axial'/'radial', with the
    maps' a/q axes holding the voltage-derived Mathieu parameters along the
    grid) plus 'stable', the pointwise AND of the two classifications, and
    the voltage axes under 'u0_values'/'v0_values'.
    """
    u0_values = np.atleast_1d(np.asarray(u0_values, dtype=float))
    v0_values = np.atleast_1d(np.asarray(v0_values, dtype=float))
    out: dict = {"u0_values": u0_values, "v0_values": v0_values}
    combined = None
    for axis in ("axial", "radial"):
        a_list = np.empty((u0_values.size, v0_values.size))
        q_list = np.empty_like(a_list)
        for i, u0 in enumerate(u0_values):
            for j, v0 in enumerate(v0_values):
                c2 = TrapConfig(
                    kind=cfg.kind,
                    U0=float(u0),
                    V0=float(v0),
                    Omega=cfg.Omega,
                    r0=cfg.r0,
                    z0=cfg.z0,
                    B0=cfg.B0,
                    Q=cfg.Q,
                    mass=cfg.mass,
                )
                a_list[i, j], q_list[i, j] = mathieu_parameters(
                    c2, axis, rotating_frame
                )
        traces, dets = _scan_traces(a_list.ravel(), q_list.ravel(), steps)
        trace = traces.reshape(a_list.shape)
        mu, stable, marginal = _classify_arrays(trace)
        out[axis] = StabilityMap(
            a_values=a_list[:, 0],
            q_values=q_list[0, :],
            trace=trace,
            det=dets.reshape(a_list.shape),
            mu=mu,
            stable=stable,
            marginal=marginal,
            steps=steps,
        )
        combined = stable if combined is None else (combined & stable)
    out["stable"] = combined
    return out


def coupled_radial_monodromy(cfg: TrapConfig, steps: int = 4096):
    """Lab-frame 4x4 monodromy of the magnetically coupled radial pair.

    State order (x1, v1, x2, v2); returns (M, eigenvalues). Volume
    preservation requires det M = 1. For a configuration whose
    rotating-frame Hill exponent is mu, the multipliers are
    exp(+-i (mu +- omega_c T / 2)).
    """
    if cfg.Omega <= 0:
        raise UnsupportedConfigurationError("coupled scan needs a driven trap")
    om_c = cyclotron_frequency(cfg)
    r2 = cfg.geometry_scale
    period = 2.0 * math.pi / cfg.Omega

    def k_of_t(t):
        return 2.0 * cfg.Q * (cfg.U0 + cfg.V0 * math.cos(cfg.Omega * t)) / (
            cfg.mass * r2
        )

    def a_mat(t):
        k = k_of_t(t)
        return np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [-k, 0.0, 0.0, om_c],
                [0.0, 0.0, 0.0, 1.0],
                [0.0, -om_c, -k, 0.0],
            ]
        )

    h = period / steps
    m = np.eye(4)
    for i in range(steps):
        t = i * h
        a0 = a_mat(t)
        ah = a_mat(t + 0.5 * h)
        a1 = a_mat(t + h)
        k1 = a0 @ m
        k2 = ah @ (m + 0.5 * h * k1)
        k3 = ah @ (m + 0.5 * h * k2)
        k4 = a1 @ (m + h * k3)
        m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return m, np.linalg.eigvals(m)


@dataclass(frozen=True)
class QuasienergyLadder:
    """Discrete level set mu (2 j + e0), j = 0..j_max.

    levels are defined as mu * e0 + spacing * j with spacing = 2 * mu, so
    the spacing is exactly 2 mu by construction.
    """

    mu: float
    e0: float
    spacing: float
    levels: np.ndarray


def quasienergy(
    result: FloquetResult, e0: float = 1.0, j_max: int = 16
) -> QuasienergyLadder:
    """Quasienergy ladder of a stable Hill system; errors otherwise."""
    if not result.stable or result.mu is None:
        raise UnstableSystemError(
            f"no discrete quasienergy ladder: system is {result.classification}"
        )
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    spacing = 2.0 * result.mu
    levels = result.mu * e0 + spacing * np.arange(j_max + 1, dtype=float)
    return QuasienergyLadder(
        mu=result.mu, e0=e0, spacing=spacing, levels=levels
    )


@dataclass(frozen=True)
class EvolutionFrame:
    """Log-modulus / phase decomposition of an auxiliary Hill solution.

    alpha = ln|zeta|, tau = unwrapped arg zeta, beta = (alpha' - 4c)/2 with
    alpha' from centered differences (one-sided at the ends).
    """

    t: np.ndarray
    zeta: np.ndarray
    alpha: np.ndarray
    tau: np.ndarray
    beta: np.ndarray


def evolution_frame(
    hill: HillCoefficients,
    t_grid,
    zeta0: complex = 1.0,
    zeta_dot0: complex = 1.0j,
    min_steps_per_period: int = 4096,
) -> EvolutionFrame:
    """Integrate zeta'' + W zeta = 0 and return the frame functions.

    The grid must be uniform and ascending. A modulus below 1e-12 anywhere
    raises FrameSingularityError carrying the first singular time.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise ValueError("t_grid must be a 1d grid with >= 3 points")
    dt = np.diff(t)
    if np.any(dt <= 0) or abs(dt.max() - dt.min()) > 1e-12 * max(abs(t[-1]), 1.0):
        raise ValueError("t_grid must be uniformly spaced and ascending")
    step = float(dt[0])
    sub = max(1, int(np.ceil(min_steps_per_period * step / hill.period)))
    h = step / sub
    n_fine = (t.size - 1) * sub
    ts = t[0] + 0.5 * h * np.arange(2 * n_fine + 1)
    w = _sample(hill.w, ts)
    if not np.all(np.isfinite(w)):
        raise NumericError("W(t) produced non-finite samples")
    traj = _kernels.fundamental_trajectory(w, h)
    u1 = traj[0, ::sub]
    u2 = traj[2, ::sub]
    zeta = complex(zeta0) * u1 + complex(zeta_dot0) * u2
    mod = np.abs(zeta)
    low = mod < 1e-12
    if np.any(low):
        raise FrameSingularityError(
            "auxiliary solution modulus fell below 1e-12",
            t_singular=float(t[int(np.argmax(low))]),
        )
    alpha = np.log(mod)
    tau = np.unwrap(np.angle(zeta))
    alpha_dot = np.gradient(alpha, t)
    c_vals = _sample(hill.c, t)
    beta = 0.5 * (alpha_dot - 4.0 * c_vals)
    return EvolutionFrame(t=t, zeta=zeta, alpha=alpha, tau=tau, beta=beta)
