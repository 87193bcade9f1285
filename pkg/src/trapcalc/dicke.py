"""Few-ion Dicke Hamiltonians and driven-oscillator coherence checks.

The composite space is field (x) ion_1 (x) ... (x) ion_n with the field as
the slowest Kronecker factor. Each ion is a two-level system ordered
(excited, ground), so sigma_z = diag(1/2, -1/2) and sigma_minus lowers the
excited state into the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .coherent import coherent_state
from .errors import NumericError, ShapeMismatchError
from .fock import (
    FockVector,
    OperatorMatrix,
    TruncationPolicy,
    fidelity,
    ladder_operators,
)

__all__ = [
    "DickeConfig",
    "SpinOperatorSet",
    "spin_operators",
    "field_ladder",
    "dicke_hamiltonian",
    "excitation_operator",
    "dicke_initial_state",
    "dicke_trajectory",
    "semiclassical_field_hamiltonian",
    "classical_label_trajectory",
    "DrivenCoherenceResult",
    "driven_coherence_check",
]

_MAX_TOTAL_DIM = 4096

_SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.diag([0.5, -0.5]).astype(complex)


@dataclass(frozen=True)
class DickeConfig:
    """Field frequency omega, level splitting epsilon, coupling lambda."""

    n_ions: int
    omega: float
    epsilon: float
    coupling: complex
    field_dim: int = 32

    def __post_init__(self):
        if not 1 <= self.n_ions <= 4:
            raise ValueError(f"n_ions must be 1..4, got {self.n_ions}")
        if self.omega <= 0:
            raise ValueError("field frequency must be positive")
        if self.field_dim < 2:
            raise ValueError("field dimension must be >= 2")
        total = self.field_dim * 2 ** self.n_ions
        if total > _MAX_TOTAL_DIM:
            raise ValueError(
                f"total dimension {total} exceeds the {_MAX_TOTAL_DIM} cap"
            )
        object.__setattr__(self, "coupling", complex(self.coupling))

    @property
    def total_dim(self) -> int:
        return self.field_dim * 2 ** self.n_ions

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(dim=self.total_dim)

    @property
    def field_policy(self) -> TruncationPolicy:
        return TruncationPolicy(dim=self.field_dim)


def _embed(config: DickeConfig, field_block: np.ndarray, ion_blocks: dict) -> np.ndarray:
    """Kron product with per-ion 2x2 blocks at the given ion slots."""
    out = np.asarray(field_block, dtype=complex)
    eye2 = np.eye(2, dtype=complex)
    for k in range(config.n_ions):
        out = np.kron(out, ion_blocks.get(k, eye2))
    return out


def field_ladder(config: DickeConfig) -> tuple[OperatorMatrix, OperatorMatrix]:
    a, ad = ladder_operators(config.field_policy)
    return (
        OperatorMatrix(_embed(config, a.entries, {}), config.policy),
        OperatorMatrix(_embed(config, ad.entries, {}), config.policy),
    )


@dataclass(frozen=True)
class SpinOperatorSet:
    """Per-ion raising/lowering/z plus the collective ladder operators.

    e12 lowers one excitation somewhere in the chain, e21 raises one, and
    e_diff = sum(excited projectors - ground projectors).
    """

    sigma_plus: tuple
    sigma_minus: tuple
    sigma_z: tuple
    e12: OperatorMatrix
    e21: OperatorMatrix
    e_diff: OperatorMatrix


def spin_operators(config: DickeConfig) -> SpinOperatorSet:
    eye_field = np.eye(config.field_dim, dtype=complex)
    plus, minus, zs = [], [], []
    for k in range(config.n_ions):
        plus.append(OperatorMatrix(
            _embed(config, eye_field, {k: _SIGMA_PLUS}), config.policy))
        minus.append(OperatorMatrix(
            _embed(config, eye_field, {k: _SIGMA_MINUS}), config.policy))
        zs.append(OperatorMatrix(
            _embed(config, eye_field, {k: _SIGMA_Z}), config.policy,
            hermitian=True))
    e12 = np.sum([m.entries for m in minus], axis=0)
    e21 = np.sum([p.entries for p in plus], axis=0)
    e_diff = 2.0 * np.sum([z.entries for z in zs], axis=0)
    return SpinOperatorSet(
        sigma_plus=tuple(plus),
        sigma_minus=tuple(minus),
        sigma_z=tuple(zs),
        e12=OperatorMatrix(e12, config.policy),
        e21=OperatorMatrix(e21, config.policy),
        e_diff=OperatorMatrix(e_diff, config.policy, hermitian=True),
    )


def dicke_hamiltonian(config: DickeConfig, hbar: float = 1.0) -> OperatorMatrix:
    """H = hbar w a^dag a + (eps/2) e_diff
          + (1/sqrt(N)) ( lam a^dag e12 + conj(lam) a e21 ).

    The coupling term trades one field quantum against one collective ion
    excitation, so a^dag a + sum sigma_z + N/2 is conserved.
    """
    a, ad = field_ladder(config)
    spins = spin_operators(config)
    lam = config.coupling
    root_n = np.sqrt(config.n_ions)
    h = hbar * config.omega * (ad.entries @ a.entries)
    h = h + 0.5 * config.epsilon * spins.e_diff.entries
    coupling = (lam / root_n) * (ad.entries @ spins.e12.entries)
    h = h + coupling + coupling.conj().T
    return OperatorMatrix(h, config.policy, hermitian=True)


def excitation_operator(config: DickeConfig) -> OperatorMatrix:
    """a^dag a + sum_k sigma_z^(k) + N/2; commutes with the Hamiltonian."""
    a, ad = field_ladder(config)
    spins = spin_operators(config)
    total = ad.entries @ a.entries
    total = total + 0.5 * spins.e_diff.entries
    total = total + 0.5 * config.n_ions * np.eye(config.total_dim)
    return OperatorMatrix(total, config.policy, hermitian=True)


def dicke_initial_state(config: DickeConfig, alpha: complex = 0.0,
                        excited: tuple = None) -> FockVector:
    """Coherent field label (x) product ion state.

    excited[k] = True puts ion k in its upper level; default all ground.
    """
    if excited is None:
        excited = (False,) * config.n_ions
    if len(excited) != config.n_ions:
        raise ShapeMismatchError(
            f"excited flags must have length {config.n_ions}"
        )
    field = coherent_state(alpha, config.field_policy).coeffs
    state = field
    up = np.array([1.0, 0.0], dtype=complex)
    down = np.array([0.0, 1.0], dtype=complex)
    for flag in excited:
        state = np.kron(state, up if flag else down)
    return FockVector(state, config.policy)


def dicke_trajectory(
    config: DickeConfig,
    initial: FockVector,
    t_final: float,
    steps: int,
    hbar: float = 1.0,
) -> dict:
    """Evolve under the time-independent Hamiltonian.

    Returns arrays t, alpha (field <a>), energy (<H>), excitation (<M>),
    sampled at every step including t=0.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = dicke_hamiltonian(config, hbar=hbar)
    a, _ = field_ladder(config)
    m_op = excitation_operator(config)
    dt = t_final / steps
    u = expm(-1j * dt / hbar * h.entries)
    if not np.all(np.isfinite(u)):
        raise NumericError("propagator overflowed")
    psi = initial.normalized().coeffs.copy()
    t = np.linspace(0.0, t_final, steps + 1)
    alpha = np.empty(steps + 1, dtype=complex)
    energy = np.empty(steps + 1)
    excitation = np.empty(steps + 1)

    def record(k, vec):
        alpha[k] = np.vdot(vec, a.entries @ vec)
        energy[k] = np.real(np.vdot(vec, h.entries @ vec))
        excitation[k] = np.real(np.vdot(vec, m_op.entries @ vec))

    record(0, psi)
    for k in range(1, steps + 1):
        psi = u @ psi
        record(k, psi)
    return {"t": t, "alpha": alpha, "energy": energy, "excitation": excitation}


def semiclassical_field_hamiltonian(omega: float, drive, policy: TruncationPolicy,
                                    hbar: float = 1.0):
    """Field-only Hamiltonian with the ion current replaced by a c-number
    drive: H(t) = hbar w a^dag a + lam(t) a^dag + conj(lam(t)) a.

    Returns a callable t -> OperatorMatrix.
    """
    a, ad = ladder_operators(policy)
    number = ad.entries @ a.entries

    def at(t: float) -> OperatorMatrix:
        lam = complex(drive(t))
        h = hbar * omega * number + lam * ad.entries + np.conj(lam) * a.entries
        return OperatorMatrix(h, policy, hermitian=True)

    return at


def classical_label_trajectory(
    omega: float,
    drive,
    alpha0: complex,
    t_grid: np.ndarray,
    hbar: float = 1.0,
    substeps: int = 4,
) -> np.ndarray:
    """RK4 integration of i alpha' = w alpha + lam(t)/hbar on t_grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise ValueError("need at least two time points")

    def rhs(t, alpha):
        return -1j * (omega * alpha + complex(drive(t)) / hbar)

    out = np.empty(t_grid.size, dtype=complex)
    out[0] = complex(alpha0)
    alpha = complex(alpha0)
    for k in range(t_grid.size - 1):
        t0, t1 = t_grid[k], t_grid[k + 1]
        h = (t1 - t0) / substeps
        t = t0
        for _ in range(substeps):
            k1 = rhs(t, alpha)
            k2 = rhs(t + 0.5 * h, alpha + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, alpha + 0.5 * h * k2)
            k4 = rhs(t + h, alpha + h * k3)
            alpha = alpha + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[k + 1] = alpha
    return out


@dataclass(frozen=True)
class DrivenCoherenceResult:
    t: np.ndarray
    alpha: np.ndarray
    infidelity: np.ndarray

    @property
    def max_infidelity(self) -> float:
        return float(np.max(self.infidelity))


def driven_coherence_check(
    omega: float,
    drive,
    alpha0: complex,
    t_final: float,
    steps: int,
    policy: TruncationPolicy,
    hbar: float = 1.0,
    n_report: int = 65,
) -> DrivenCoherenceResult:
    """Quantum evolution of a coherent label under a classical drive.

    The state is stepped with midpoint exponentials
    psi_{k+1} = exp(-i dt H(t_k + dt/2) / hbar) psi_k and compared at
    n_report sample times against the coherent state whose label solves
    the classical equation; the infidelity stays at integrator accuracy
    because the family is closed under this Hamiltonian.
    """
    if steps < n_report - 1:
        raise ValueError("steps must be at least n_report - 1")
    h_at = semiclassical_field_hamiltonian(omega, drive, policy, hbar=hbar)
    t_grid = np.linspace(0.0, t_final, steps + 1)
    dt = t_final / steps
    psi = coherent_state(alpha0, policy).coeffs.copy()
    labels = classical_label_trajectory(omega, drive, alpha0, t_grid, hbar=hbar)

    report_idx = np.unique(np.linspace(0, steps, n_report).round().astype(int))
    report_t = []
    report_alpha = []
    report_inf = []
    next_report = 0
    for k in range(steps + 1):
        if next_report < report_idx.size and k == report_idx[next_report]:
            target = coherent_state(labels[k], policy)
            fid = fidelity(FockVector(psi, policy), target)
            report_t.append(t_grid[k])
            report_alpha.append(labels[k])
            report_inf.append(max(0.0, 1.0 - fid))
            next_report += 1
        if k < steps:
            hk = h_at(t_grid[k] + 0.5 * dt)
            psi = expm(-1j * dt / hbar * hk.entries) @ psi
    return DrivenCoherenceResult(
        t=np.array(report_t),
        alpha=np.array(report_alpha),
        infidelity=np.array(report_inf),
    )
