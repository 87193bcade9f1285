"""Multimode bosonic states: displacement, pair squeezing, field observables.

Modes live on a tensor product of equal-size truncated number spaces.
Mode 0 is the slowest (leftmost) Kronecker factor throughout, so the
flattened index is n_0 * dim^(k-1) + ... + n_{k-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coherent import check_alpha_trust, displacement_operator
from .errors import ShapeMismatchError, TruncationRiskError
from .fock import (
    FockVector,
    OperatorMatrix,
    TruncationPolicy,
    ladder_operators,
    operator_exponential,
)
from .squeeze import check_z_trust

__all__ = [
    "ModeSet",
    "MultimodeLabels",
    "mode_operator",
    "mode_ladder",
    "multimode_vacuum",
    "multimode_displacement",
    "multimode_squeeze",
    "multimode_state",
    "multimode_hamiltonian",
    "electric_field_operator",
    "electric_field_expectation",
    "electric_field_moments",
    "mode_tail_masses",
]

_MAX_TOTAL_DIM = 4096


@dataclass(frozen=True)
class ModeSet:
    """Mode frequencies plus the shared per-mode truncation size."""

    omegas: tuple
    per_mode_dim: int = 8
    coupling_scale: float = 1.0
    tail_tol: float = 1e-10

    def __post_init__(self):
        omegas = tuple(float(w) for w in self.omegas)
        if len(omegas) < 1:
            raise ValueError("need at least one mode")
        if any(w <= 0 for w in omegas):
            raise ValueError("mode frequencies must be positive")
        if self.per_mode_dim < 2:
            raise ValueError("per-mode dimension must be >= 2")
        total = self.per_mode_dim ** len(omegas)
        if total > _MAX_TOTAL_DIM:
            raise ValueError(
                f"total dimension {total} exceeds the {_MAX_TOTAL_DIM} cap; "
                "reduce per_mode_dim or the number of modes"
            )
        object.__setattr__(self, "omegas", omegas)

    @property
    def n_modes(self) -> int:
        return len(self.omegas)

    @property
    def total_dim(self) -> int:
        return self.per_mode_dim ** self.n_modes

    @property
    def mode_policy(self) -> TruncationPolicy:
        return TruncationPolicy(dim=self.per_mode_dim, tail_tol=self.tail_tol)

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(dim=self.total_dim, tail_tol=self.tail_tol)


def mode_operator(modes: ModeSet, single: np.ndarray, mode_index: int) -> OperatorMatrix:
    """Embed a per-mode matrix at the given slot (mode 0 leftmost)."""
    if not 0 <= mode_index < modes.n_modes:
        raise ValueError(f"mode index {mode_index} out of range")
    single = np.asarray(single, dtype=complex)
    if single.shape != (modes.per_mode_dim, modes.per_mode_dim):
        raise ShapeMismatchError(
            f"expected ({modes.per_mode_dim}, {modes.per_mode_dim}) block, "
            f"got {single.shape}"
        )
    out = np.eye(1, dtype=complex)
    eye = np.eye(modes.per_mode_dim, dtype=complex)
    for k in range(modes.n_modes):
        out = np.kron(out, single if k == mode_index else eye)
    return OperatorMatrix(out, modes.policy)


def mode_ladder(modes: ModeSet, mode_index: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    a1, ad1 = ladder_operators(modes.mode_policy)
    return (
        mode_operator(modes, a1.entries, mode_index),
        mode_operator(modes, ad1.entries, mode_index),
    )


@dataclass(frozen=True)
class MultimodeLabels:
    """Displacements alpha_i plus the symmetric pair-squeeze matrix beta."""

    alphas: tuple
    beta: np.ndarray = None

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        n = len(alphas)
        if n < 1:
            raise ValueError("need at least one mode label")
        beta = self.beta
        if beta is None:
            beta = np.zeros((n, n), dtype=complex)
        beta = np.asarray(beta, dtype=complex)
        if beta.shape != (n, n):
            raise ShapeMismatchError(
                f"beta must be ({n}, {n}) to match {n} displacement labels, "
                f"got {beta.shape}"
            )
        if np.max(np.abs(beta - beta.T)) > 1e-12:
            raise ValueError("pair-squeeze matrix beta must be symmetric")
        beta = beta.copy()
        beta.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "beta", beta)

    @property
    def n_modes(self) -> int:
        return len(self.alphas)

    def check_trust(self, modes: ModeSet):
        """Per-mode displacement bound plus a squeeze bound via the
        singular values of beta (tanh of each must sit inside the
        single-mode trust region)."""
        policy = modes.mode_policy
        for a in self.alphas:
            check_alpha_trust(a, policy)
        sv = np.linalg.svd(self.beta, compute_uv=False)
        if sv.size and sv[0] > 0:
            check_z_trust(complex(np.tanh(sv[0])), policy)


def multimode_vacuum(modes: ModeSet) -> FockVector:
    coeffs = np.zeros(modes.total_dim, dtype=complex)
    coeffs[0] = 1.0
    return FockVector(coeffs, modes.policy)


def multimode_displacement(modes: ModeSet, labels: MultimodeLabels) -> OperatorMatrix:
    """Product of per-mode displacements, assembled as a Kronecker product."""
    if labels.n_modes != modes.n_modes:
        raise ShapeMismatchError(
            f"{labels.n_modes} labels for {modes.n_modes} modes"
        )
    policy = modes.mode_policy
    out = np.eye(1, dtype=complex)
    for alpha in labels.alphas:
        out = np.kron(out, displacement_operator(alpha, policy).entries)
    return OperatorMatrix(out, modes.policy)


def multimode_squeeze(modes: ModeSet, labels: MultimodeLabels) -> OperatorMatrix:
    """exp( (1/2) sum_ij beta_ij a_i^dag a_j^dag - h.c. )."""
    if labels.n_modes != modes.n_modes:
        raise ShapeMismatchError(
            f"{labels.n_modes} labels for {modes.n_modes} modes"
        )
    n = modes.n_modes
    ladders = [mode_ladder(modes, k) for k in range(n)]
    gen = np.zeros((modes.total_dim, modes.total_dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            bij = labels.beta[i, j]
            if bij == 0:
                continue
            gen += 0.5 * bij * (ladders[i][1].entries @ ladders[j][1].entries)
    gen = gen - gen.conj().T
    return operator_exponential(OperatorMatrix(gen, modes.policy))


def multimode_state(modes: ModeSet, labels: MultimodeLabels) -> FockVector:
    """D(alpha) S(beta) |vacuum>, with trust and per-mode tail checks."""
    labels.check_trust(modes)
    state = multimode_squeeze(modes, labels).apply(multimode_vacuum(modes))
    state = multimode_displacement(modes, labels).apply(state)
    tails = mode_tail_masses(modes, state)
    worst = int(np.argmax(tails))
    if tails[worst] > modes.tail_tol:
        raise TruncationRiskError(
            f"mode {worst} keeps tail mass {tails[worst]:.3e} above "
            f"{modes.tail_tol:.1e}",
            suggested_dim=2 * modes.per_mode_dim,
        )
    return state


def mode_tail_masses(modes: ModeSet, state: FockVector) -> np.ndarray:
    """Occupation mass in the top 10% band of each mode's marginal."""
    shape = (modes.per_mode_dim,) * modes.n_modes
    prob = np.abs(state.coeffs.reshape(shape)) ** 2
    norm = prob.sum()
    start = modes.mode_policy.tail_start
    tails = np.empty(modes.n_modes)
    for k in range(modes.n_modes):
        marginal = np.sum(prob, axis=tuple(i for i in range(modes.n_modes) if i != k))
        tails[k] = marginal[start:].sum() / norm
    return tails


def multimode_hamiltonian(
    modes: ModeSet,
    f: np.ndarray = None,
    g: np.ndarray = None,
    drive: np.ndarray = None,
    hbar: float = 1.0,
) -> OperatorMatrix:
    """Quadratic mode Hamiltonian.

    H = sum_i hbar w_i (n_i + 1/2)
        + sum_ij ( f_ij a_i^dag a_j^dag + conj(f_ij) a_j a_i )
        + sum_ij g_ij a_i^dag a_j
        + sum_i ( drive_i a_i^dag + conj(drive_i) a_i )

    f must be symmetric and g Hermitian so that H is Hermitian.
    """
    n = modes.n_modes
    dim = modes.total_dim
    ladders = [mode_ladder(modes, k) for k in range(n)]
    h = np.zeros((dim, dim), dtype=complex)
    for i, w in enumerate(modes.omegas):
        a, ad = ladders[i]
        h += hbar * w * (ad.entries @ a.entries + 0.5 * np.eye(dim))
    if f is not None:
        f = np.asarray(f, dtype=complex)
        if f.shape != (n, n):
            raise ShapeMismatchError(f"f must be ({n}, {n}), got {f.shape}")
        if np.max(np.abs(f - f.T)) > 1e-12:
            raise ValueError("pair-creation matrix f must be symmetric")
        for i in range(n):
            for j in range(n):
                if f[i, j] != 0:
                    term = f[i, j] * (ladders[i][1].entries @ ladders[j][1].entries)
                    h += term + term.conj().T
    if g is not None:
        g = np.asarray(g, dtype=complex)
        if g.shape != (n, n):
            raise ShapeMismatchError(f"g must be ({n}, {n}), got {g.shape}")
        if np.max(np.abs(g - g.conj().T)) > 1e-12:
            raise ValueError("beam-splitter matrix g must be Hermitian")
        for i in range(n):
            for j in range(n):
                if g[i, j] != 0:
                    h += g[i, j] * (ladders[i][1].entries @ ladders[j][0].entries)
    if drive is not None:
        drive = np.asarray(drive, dtype=complex)
        if drive.shape != (n,):
            raise ShapeMismatchError(f"drive must have shape ({n},)")
        for i in range(n):
            if drive[i] != 0:
                term = drive[i] * ladders[i][1].entries
                h += term + term.conj().T
    return OperatorMatrix(h, modes.policy, hermitian=True)


def electric_field_operator(modes: ModeSet, t: float) -> OperatorMatrix:
    """E(t) = 2 lam sum_i sqrt(w_i) ( a_i e^{-i w_i t} + a_i^dag e^{+i w_i t} )."""
    dim = modes.total_dim
    out = np.zeros((dim, dim), dtype=complex)
    lam = modes.coupling_scale
    for i, w in enumerate(modes.omegas):
        a, ad = mode_ladder(modes, i)
        phase = np.exp(-1j * w * t)
        out += 2.0 * lam * np.sqrt(w) * (phase * a.entries + np.conj(phase) * ad.entries)
    return OperatorMatrix(out, modes.policy, hermitian=True)


def electric_field_expectation(modes: ModeSet, labels: MultimodeLabels, t) -> np.ndarray:
    """Closed-form mean field of the displaced squeezed state.

    <E(t)> = 4 lam sum_i sqrt(w_i) (x_i cos w_i t + y_i sin w_i t) with
    alpha_i = x_i + i y_i; the pair-squeeze matrix never enters.
    """
    if labels.n_modes != modes.n_modes:
        raise ShapeMismatchError(
            f"{labels.n_modes} labels for {modes.n_modes} modes"
        )
    t = np.asarray(t, dtype=float)
    lam = modes.coupling_scale
    out = np.zeros(t.shape)
    for alpha, w in zip(labels.alphas, modes.omegas):
        out = out + 4.0 * lam * np.sqrt(w) * (
            alpha.real * np.cos(w * t) + alpha.imag * np.sin(w * t)
        )
    return out


def electric_field_moments(
    modes: ModeSet, state: FockVector, t
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix-element mean and variance of E(t) for the given state."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    psi = state.normalized().coeffs
    means = np.empty(t.shape)
    variances = np.empty(t.shape)
    for k, tk in enumerate(t):
        e_op = electric_field_operator(modes, float(tk)).entries
        e_psi = e_op @ psi
        mean = np.real(np.vdot(psi, e_psi))
        second = np.real(np.vdot(e_psi, e_psi))
        means[k] = mean
        variances[k] = second - mean * mean
    return means, variances
