"""Truncated Fock-space primitives.

Everything downstream is built on dense complex matrices over the number
basis {|0>, ..., |dim-1>}. A :class:`TruncationPolicy` travels with every
vector and operator so that dimension mismatches and cutoff leakage are
caught instead of silently corrupting results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm as _expm

from .errors import (
    InvalidPolicyError,
    NumericError,
    ShapeMismatchError,
    TruncationRiskError,
)

__all__ = [
    "TruncationPolicy",
    "FockVector",
    "OperatorMatrix",
    "ladder_operators",
    "number_operator",
    "number_state",
    "vacuum_state",
    "operator_exponential",
    "expectation",
    "fidelity",
]


@dataclass(frozen=True)
class TruncationPolicy:
    """Basis size and tolerance bundle for truncated-space numerics.

    dim : retained basis size (>= 2).
    tail_tol : maximum probability mass allowed in the top 10% of the basis.
    unitary_tol : maximum deviation of ``M^dag M`` from the identity for
        operators that are checked as unitary.
    """

    dim: int = 128
    tail_tol: float = 1e-10
    unitary_tol: float = 1e-9

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise InvalidPolicyError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not (self.tail_tol > 0):
            raise InvalidPolicyError(f"tail_tol must be positive, got {self.tail_tol!r}")
        if not (self.unitary_tol > 0):
            raise InvalidPolicyError(
                f"unitary_tol must be positive, got {self.unitary_tol!r}"
            )

    @property
    def tail_start(self) -> int:
        """First index of the top-10% band used for tail-mass accounting."""
        return int(np.ceil(0.9 * self.dim))


def _check_same_policy(pa: TruncationPolicy, pb: TruncationPolicy):
    if pa.dim != pb.dim:
        raise ShapeMismatchError(f"dimension mismatch: {pa.dim} vs {pb.dim}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """State vector over the truncated number basis."""

    coeffs: np.ndarray
    policy: TruncationPolicy

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.policy.dim,):
            raise ShapeMismatchError(
                f"coefficient vector of shape {c.shape}, policy dim {self.policy.dim}"
            )
        if not np.all(np.isfinite(c)):
            raise NumericError("non-finite coefficients in state vector")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def dim(self) -> int:
        return self.policy.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "FockVector":
        n = self.norm()
        if n == 0.0:
            raise NumericError("cannot normalize the zero vector")
        return FockVector(self.coeffs / n, self.policy)

    def tail_mass(self) -> float:
        """Probability mass in the top 10% of the basis (unit-norm scale)."""
        n2 = float(np.vdot(self.coeffs, self.coeffs).real)
        if n2 == 0.0:
            return 0.0
        t = self.policy.tail_start
        return float(np.vdot(self.coeffs[t:], self.coeffs[t:]).real) / n2

    def check_tail(self):
        """Raise when cutoff leakage exceeds the policy's tail tolerance."""
        tm = self.tail_mass()
        if tm > self.policy.tail_tol:
            grow = max(2 * self.policy.dim, 4)
            raise TruncationRiskError(
                f"tail mass {tm:.3e} exceeds tail_tol {self.policy.tail_tol:.1e}",
                suggested_dim=grow,
            )

    def inner(self, other: "FockVector") -> complex:
        """<self|other> with the left argument conjugated."""
        _check_same_policy(self.policy, other.policy)
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator over the truncated basis.

    ``hermitian=True`` asserts the matrix is Hermitian at construction
    (checked to 1e-12 in max norm).
    """

    entries: np.ndarray
    policy: TruncationPolicy
    hermitian: bool = field(default=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        d = self.policy.dim
        if m.shape != (d, d):
            raise ShapeMismatchError(
                f"operator of shape {m.shape}, policy dim {d}"
            )
        if not np.all(np.isfinite(m)):
            raise NumericError("non-finite entries in operator")
        if self.hermitian:
            dev = float(np.max(np.abs(m - m.conj().T)))
            if dev > 1e-12:
                raise NumericError(
                    f"operator flagged hermitian deviates by {dev:.3e}"
                )
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.policy.dim

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.policy, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same_policy(self.policy, other.policy)
            return OperatorMatrix(self.entries @ other.entries, self.policy)
        if isinstance(other, FockVector):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_policy(self.policy, other.policy)
        return OperatorMatrix(self.entries + other.entries, self.policy)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_policy(self.policy, other.policy)
        return OperatorMatrix(self.entries - other.entries, self.policy)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(self.entries * complex(scalar), self.policy)

    __rmul__ = __mul__

    def apply(self, vec: FockVector) -> FockVector:
        _check_same_policy(self.policy, vec.policy)
        return FockVector(self.entries @ vec.coeffs, self.policy)

    def unitary_defect(self) -> float:
        """Max-norm deviation of M^dag M from the identity."""
        d = self.policy.dim
        g = self.entries.conj().T @ self.entries
        return float(np.max(np.abs(g - np.eye(d))))

    def check_unitary(self):
        dev = self.unitary_defect()
        if dev > self.policy.unitary_tol:
            raise NumericError(
                f"unitarity defect {dev:.3e} exceeds {self.policy.unitary_tol:.1e}"
            )


def ladder_operators(policy: TruncationPolicy):
    """Annihilation and creation matrices (a, a_dag).

    Truncation artifact: [a, a_dag] equals the identity except for the
    (dim-1, dim-1) entry, which is 1 - dim.
    """
    a = np.diag(np.sqrt(np.arange(1, policy.dim, dtype=float)), k=1).astype(complex)
    return (
        OperatorMatrix(a, policy),
        OperatorMatrix(a.conj().T, policy),
    )


def number_operator(policy: TruncationPolicy) -> OperatorMatrix:
    return OperatorMatrix(
        np.diag(np.arange(policy.dim, dtype=float)).astype(complex),
        policy,
        hermitian=True,
    )


def number_state(n: int, policy: TruncationPolicy) -> FockVector:
    if not (0 <= n < policy.dim):
        raise ShapeMismatchError(f"number state {n} outside basis of size {policy.dim}")
    c = np.zeros(policy.dim, dtype=complex)
    c[n] = 1.0
    return FockVector(c, policy)


def vacuum_state(policy: TruncationPolicy) -> FockVector:
    return number_state(0, policy)


def operator_exponential(op: OperatorMatrix) -> OperatorMatrix:
    """Matrix exponential by scaling-and-squaring (Pade)."""
    e = _expm(np.asarray(op.entries))
    if not np.all(np.isfinite(e)):
        raise NumericError("matrix exponential produced non-finite entries")
    return OperatorMatrix(e, op.policy)


def expectation(state: FockVector, op: OperatorMatrix) -> complex:
    """<psi|M|psi> / <psi|psi>. Real to ~1e-12 for Hermitian-flagged M."""
    _check_same_policy(state.policy, op.policy)
    n2 = float(np.vdot(state.coeffs, state.coeffs).real)
    if n2 == 0.0:
        raise NumericError("expectation in the zero vector")
    return complex(np.vdot(state.coeffs, op.entries @ state.coeffs)) / n2


def fidelity(a: FockVector, b: FockVector) -> float:
    """|<a|b>|^2 for unit-normalized inputs (inputs are normalized here)."""
    an, bn = a.normalized(), b.normalized()
    return float(abs(an.inner(bn)) ** 2)
