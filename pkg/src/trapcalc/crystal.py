"""Ion-crystal potential energy surfaces and equilibrium search.

The energy is built from the collective coordinate s = sum |x_a - xbar|^2
and homogeneous pair terms:

    W = b s / 2 + 2 a sum_terms C * s^(-mu) * sum_{a != b} (d_ab^2)^(nu - 1)

with ordered pairs (each unordered pair counted twice). The analytic
gradient is the exact derivative of this expression and is cross-checked
against central finite differences by the tests, which treat the
finite-difference route as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.linalg as npl
from scipy.optimize import minimize as _minimize

from .errors import NumericError

__all__ = [
    "CrystalPotentialSpec",
    "IonConfiguration",
    "EquilibriumResult",
    "collective_variables",
    "potential_energy",
    "potential_gradient",
    "find_equilibrium",
    "hermite_zeros",
    "calogero_check",
]


@dataclass(frozen=True)
class CrystalPotentialSpec:
    """Potential parameters: harmonic strength b, pair scale a, and terms.

    Each term is (mu, nu, C): collective exponent mu >= 0, pair exponent nu,
    weight C. nu = 1/2 gives Coulomb pairs, nu = 0 inverse-square pairs.
    """

    n_ions: int
    d: int
    b: float
    a: float
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_ions < 2:
            raise ValueError("need at least two ions; a single ion is degenerate")
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.b <= 0:
            raise ValueError("harmonic coefficient b must be positive")
        terms = tuple((float(mu), float(nu), float(c)) for mu, nu, c in self.terms)
        for mu, nu, c in terms:
            if mu < 0:
                raise ValueError("collective exponent mu must be >= 0")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def coulomb(cls, n_ions: int, d: int, b: float = 1.0, a: float = 1.0,
                c: float = 1.0) -> "CrystalPotentialSpec":
        """Harmonic confinement with 1/r pair repulsion (mu=0, nu=1/2)."""
        return cls(n_ions=n_ions, d=d, b=b, a=a, terms=((0.0, 0.5, c),))

    @classmethod
    def calogero(cls, n_ions: int, g: float, b: float = 1.0, a: float = 1.0,
                 printed_form: bool = False) -> "CrystalPotentialSpec":
        """1d chain with inverse-square pair interaction (mu=0, nu=0).

        printed_form=True keeps the literature's verbatim pair exponent
        (nu=2, i.e. +(x_a - x_b)^2), under which the equilibrium loses the
        inverse-square structure entirely; it exists for comparison only.
        """
        if g <= 0:
            raise ValueError("coupling g must be positive")
        nu = 2.0 if printed_form else 0.0
        return cls(n_ions=n_ions, d=1, b=b, a=a, terms=((0.0, nu, float(g)),))


@dataclass(frozen=True)
class IonConfiguration:
    """Positions (n_ions, d) with derived collective coordinates."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] < 1:
            raise ValueError(f"positions must be (n_ions, d), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise NumericError("non-finite ion positions")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def y(self) -> np.ndarray:
        """Center-of-mass-removed coordinates."""
        return self.positions - self.positions.mean(axis=0, keepdims=True)

    @property
    def s(self) -> float:
        y = self.y
        return float(np.sum(y * y))


def collective_variables(positions) -> tuple[np.ndarray, float]:
    cfg = positions if isinstance(positions, IonConfiguration) else IonConfiguration(positions)
    return cfg.y, cfg.s


def _as_positions(spec: CrystalPotentialSpec, positions) -> np.ndarray:
    p = positions.positions if isinstance(positions, IonConfiguration) else np.asarray(
        positions, dtype=float
    )
    if p.ndim == 1:
        p = p[:, None]
    if p.shape != (spec.n_ions, spec.d):
        raise ValueError(
            f"positions shape {p.shape} does not match spec "
            f"({spec.n_ions}, {spec.d})"
        )
    return p


def _pair_d2(p: np.ndarray) -> np.ndarray:
    diff = p[:, None, :] - p[None, :, :]
    return np.sum(diff * diff, axis=2), diff


def potential_energy(spec: CrystalPotentialSpec, positions) -> float:
    p = _as_positions(spec, positions)
    y = p - p.mean(axis=0, keepdims=True)
    s = float(np.sum(y * y))
    d2, _ = _pair_d2(p)
    mask = ~np.eye(spec.n_ions, dtype=bool)
    w = 0.5 * spec.b * s
    for mu, nu, c in spec.terms:
        if nu < 1.0 and np.any(d2[mask] <= 0.0):
            raise NumericError("coincident ions make the pair term singular")
        if mu > 0.0 and s == 0.0:
            raise NumericError("collapsed configuration makes s^(-mu) singular")
        pair_sum = float(np.sum(d2[mask] ** (nu - 1.0)))
        w += 2.0 * spec.a * c * (s ** (-mu) if mu != 0.0 else 1.0) * pair_sum
    return float(w)


def potential_gradient(spec: CrystalPotentialSpec, positions) -> np.ndarray:
    """Exact gradient dW/dx, shape (n_ions, d).

    Derivative of the ordered-pair energy:
    b y + sum_terms [ -4 a C mu s^(-1) y V + 8 a C (nu-1) s^(-mu)
                      sum_{b != g} (x_g - x_b) (d_gb^2)^(nu-2) ].
    """
    p = _as_positions(spec, positions)
    n = spec.n_ions
    y = p - p.mean(axis=0, keepdims=True)
    s = float(np.sum(y * y))
    d2, diff = _pair_d2(p)
    mask = ~np.eye(n, dtype=bool)
    grad = spec.b * y.copy()
    for mu, nu, c in spec.terms:
        if nu < 1.0 and np.any(d2[mask] <= 0.0):
            raise NumericError("coincident ions make the pair term singular")
        if mu > 0.0 and s == 0.0:
            raise NumericError("collapsed configuration makes s^(-mu) singular")
        d2m = np.where(mask, d2, 1.0)
        pair_sum = float(np.sum(np.where(mask, d2m ** (nu - 1.0), 0.0)))
        s_pow = s ** (-mu) if mu != 0.0 else 1.0
        if mu != 0.0:
            v = s_pow * pair_sum
            grad += -4.0 * spec.a * c * mu * (v / s) * y
        kernel = np.where(mask, d2m ** (nu - 2.0), 0.0)
        pair_grad = np.einsum("gb,gbj->gj", kernel, diff)
        grad += 8.0 * spec.a * c * (nu - 1.0) * s_pow * pair_grad
    return grad


def _cm_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the zero-mean subspace, shape (n, n-1)."""
    full = np.eye(n) - np.full((n, n), 1.0 / n)
    vecs = npl.qr(full)[0][:, : n - 1]
    # columns orthogonal to the all-ones vector by construction of full
    return vecs


def _projected_gradient(spec, p) -> np.ndarray:
    g = potential_gradient(spec, p)
    return g - g.mean(axis=0, keepdims=True)


@dataclass(frozen=True)
class EquilibriumResult:
    configuration: IonConfiguration
    energy: float
    residual: float
    hessian_min_eig: float
    converged: bool


def _reduced_funcs(spec: CrystalPotentialSpec):
    n, d = spec.n_ions, spec.d
    basis = _cm_basis(n)

    def unpack(xi):
        return basis @ xi.reshape(n - 1, d)

    def energy(xi):
        return potential_energy(spec, unpack(xi))

    def grad(xi):
        g = potential_gradient(spec, unpack(xi))
        return (basis.T @ g).ravel()

    return unpack, energy, grad, basis


def _fd_hessian(fun_grad, xi: np.ndarray, h: float = 1e-6) -> np.ndarray:
    m = xi.size
    hess = np.empty((m, m))
    for k in range(m):
        step = np.zeros(m)
        step[k] = h * max(1.0, abs(xi[k]))
        gp = fun_grad(xi + step)
        gm = fun_grad(xi - step)
        hess[:, k] = (gp - gm) / (2.0 * step[k])
    return 0.5 * (hess + hess.T)


def find_equilibrium(
    spec: CrystalPotentialSpec,
    initial=None,
    seeds: int = 8,
    rng_seed: int = 0,
    tol: float = 1e-10,
    max_polish: int = 60,
) -> EquilibriumResult:
    """Locate a minimum of W restricted to the zero-center-of-mass subspace.

    Multi-start gradient minimization (L-BFGS with the analytic gradient)
    followed by Newton polish using a finite-difference Hessian of the
    analytic gradient. The returned residual is the max-norm of the
    CM-projected gradient in the original coordinates; the Hessian
    certificate is the smallest eigenvalue on the reduced subspace.
    convergence requires residual <= tol and min eigenvalue > -1e-8.
    """
    n, d = spec.n_ions, spec.d
    unpack, energy, grad, basis = _reduced_funcs(spec)
    rng = np.random.default_rng(rng_seed)

    pair_scale = 1.0
    for mu, nu, c in spec.terms:
        if c > 0 and nu < 1:
            pair_scale = max(
                pair_scale, (2.0 * abs(spec.a) * c / spec.b) ** (1.0 / 3.0)
            )
    scale = pair_scale * max(1.0, n ** (1.0 / 3.0))

    starts = []
    if initial is not None:
        p0 = _as_positions(spec, initial)
        starts.append((basis.T @ (p0 - p0.mean(axis=0))).ravel())
    while len(starts) < max(1, seeds):
        if spec.d == 1 and len(starts) == (0 if initial is None else 1):
            # ordered chain seed; robust for strictly repulsive 1d problems
            chain = np.linspace(-1.0, 1.0, n)[:, None] * scale
            starts.append((basis.T @ (chain - chain.mean(axis=0))).ravel())
            continue
        guess = rng.normal(scale=scale, size=(n, d))
        starts.append((basis.T @ (guess - guess.mean(axis=0))).ravel())

    best = None
    for xi0 in starts:
        try:
            res = _minimize(
                energy,
                xi0,
                jac=grad,
                method="L-BFGS-B",
                options={"maxiter": 2000, "ftol": 1e-14, "gtol": 1e-9},
            )
        except NumericError:
            continue
        xi = res.x
        try:
            for _ in range(max_polish):
                g = grad(xi)
                if npl.norm(g, np.inf) <= 0.1 * tol:
                    break
                hess = _fd_hessian(grad, xi)
                eigs = npl.eigvalsh(hess)
                shift = max(0.0, 1e-8 - float(eigs.min()))
                step = npl.solve(hess + shift * np.eye(xi.size), -g)
                limit = 0.25 * scale
                if npl.norm(step, np.inf) > limit:
                    step *= limit / npl.norm(step, np.inf)
                xi = xi + step
            e = energy(xi)
        except (NumericError, npl.LinAlgError):
            continue
        if best is None or e < best[0]:
            best = (e, xi)

    if best is None:
        # every start collapsed into a singular region
        p_fail = unpack(starts[0])
        return EquilibriumResult(
            configuration=IonConfiguration(p_fail),
            energy=float("nan"),
            residual=float("inf"),
            hessian_min_eig=float("nan"),
            converged=False,
        )

    _, xi = best
    positions = unpack(xi)
    residual = float(npl.norm(_projected_gradient(spec, positions), np.inf))
    hess = _fd_hessian(grad, xi)
    min_eig = float(npl.eigvalsh(hess).min())
    converged = bool(residual <= tol and min_eig > -1e-8)
    return EquilibriumResult(
        configuration=IonConfiguration(positions),
        energy=float(potential_energy(spec, positions)),
        residual=residual,
        hessian_min_eig=min_eig,
        converged=converged,
    )


def hermite_zeros(n: int) -> np.ndarray:
    """Zeros of the physicists' Hermite polynomial H_n.

    Eigenvalues of the symmetric Jacobi matrix with off-diagonals
    sqrt(k/2); the spectrum is symmetrized so the middle zero of odd n is
    exactly 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, n) / 2.0)
    jac = np.diag(off, 1) + np.diag(off, -1)
    z = np.sort(npl.eigvalsh(jac))
    return 0.5 * (z - z[::-1])


def calogero_check(
    g: float, b_over_ag: float, n_ions: int, rng_seed: int = 0
) -> tuple[float, EquilibriumResult]:
    """Equilibrium of the inverse-square chain against Hermite zeros.

    With W = (b/2) s + 4 a g sum_{a<b} (x_a - x_b)^{-2}, rescaling
    x = kappa xi with kappa = (4 a g / b)^{1/4} sends the equilibrium to
    the zeros of H_n. Returns (max deviation in xi units, equilibrium).
    """
    if b_over_ag <= 0:
        raise ValueError("b/(a g) must be positive")
    b = 1.0
    a = 1.0 / (g * b_over_ag)
    spec = CrystalPotentialSpec.calogero(n_ions, g=g, b=b, a=a)
    kappa = (4.0 * a * g / b) ** 0.25
    # generic ordered-chain seed; the minimum is not fed in
    chain = np.linspace(-1.0, 1.0, n_ions)[:, None] * kappa * max(
        1.0, n_ions ** 0.5
    )
    result = find_equilibrium(spec, initial=chain, seeds=3, rng_seed=rng_seed)
    xi = np.sort(result.configuration.y[:, 0]) / kappa
    deviation = float(np.max(np.abs(xi - hermite_zeros(n_ions))))
    return deviation, result
