import math

import numpy as np
import pytest

from trapcalc import (
    CrystalPotentialSpec,
    IonConfiguration,
    calogero_check,
    collective_variables,
    find_equilibrium,
    hermite_zeros,
    potential_energy,
    potential_gradient,
)
from trapcalc.errors import NumericError


def central_difference(spec, positions, h=1e-5):
    p = np.asarray(positions, dtype=float)
    grad = np.zeros_like(p)
    for idx in np.ndindex(p.shape):
        plus = p.copy()
        minus = p.copy()
        plus[idx] += h
        minus[idx] -= h
        grad[idx] = (potential_energy(spec, plus) - potential_energy(spec, minus)) / (2 * h)
    return grad


def test_spec_validation():
    with pytest.raises(ValueError):
        CrystalPotentialSpec(n_ions=1, d=1, b=1.0, a=1.0)
    with pytest.raises(ValueError):
        CrystalPotentialSpec(n_ions=3, d=4, b=1.0, a=1.0)
    with pytest.raises(ValueError):
        CrystalPotentialSpec(n_ions=3, d=1, b=0.0, a=1.0)
    with pytest.raises(ValueError):
        CrystalPotentialSpec(n_ions=3, d=1, b=1.0, a=1.0, terms=((-1.0, 0.5, 1.0),))
    with pytest.raises(ValueError):
        CrystalPotentialSpec.calogero(3, g=-2.0)


def test_preset_terms():
    cou = CrystalPotentialSpec.coulomb(4, d=3, c=2.0)
    assert cou.terms == ((0.0, 0.5, 2.0),)
    cal = CrystalPotentialSpec.calogero(4, g=1.5)
    assert cal.d == 1
    assert cal.terms == ((0.0, 0.0, 1.5),)
    printed = CrystalPotentialSpec.calogero(4, g=1.5, printed_form=True)
    assert printed.terms == ((0.0, 2.0, 1.5),)


def test_collective_variables():
    y, s = collective_variables([[1.0], [3.0]])
    np.testing.assert_allclose(y, [[-1.0], [1.0]])
    assert s == pytest.approx(2.0)
    cfg = IonConfiguration(np.array([[0.0, 0.0], [2.0, 2.0]]))
    np.testing.assert_allclose(cfg.y, [[-1.0, -1.0], [1.0, 1.0]])
    assert cfg.s == pytest.approx(4.0)


def test_two_ion_coulomb_energy_profile():
    # W(x) = b x^2 + 2 a c / x for ions at +-x (ordered pair sum)
    spec = CrystalPotentialSpec.coulomb(2, d=1, b=1.0, a=1.0, c=1.0)
    for x in (0.5, 1.0, 2.0):
        w = potential_energy(spec, [[-x], [x]])
        assert w == pytest.approx(x**2 + 2.0 / x, rel=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    specs = [
        CrystalPotentialSpec.coulomb(4, d=1),
        CrystalPotentialSpec.coulomb(3, d=2, b=1.3, a=0.8, c=1.7),
        CrystalPotentialSpec.coulomb(3, d=3),
        CrystalPotentialSpec.calogero(4, g=0.9),
        # mixed terms with a collective-coordinate prefactor
        CrystalPotentialSpec(
            n_ions=3, d=2, b=1.1, a=0.9,
            terms=((1.0, 0.5, 0.7), (0.0, 0.0, 0.3)),
        ),
    ]
    for spec in specs:
        for _ in range(4):
            p = rng.uniform(-1.0, 1.0, size=(spec.n_ions, spec.d))
            p += 1.5 * np.arange(spec.n_ions)[:, None]  # keep ions apart
            grad = potential_gradient(spec, p)
            fd = central_difference(spec, p)
            scale = max(1.0, float(np.max(np.abs(fd))))
            assert np.max(np.abs(grad - fd)) / scale < 1e-6


def test_translation_invariance():
    spec = CrystalPotentialSpec.coulomb(3, d=2)
    p = np.array([[0.0, 0.0], [1.0, 0.2], [-0.4, 1.1]])
    shifted = p + np.array([5.0, -3.0])
    assert potential_energy(spec, shifted) == pytest.approx(
        potential_energy(spec, p), rel=1e-12
    )
    np.testing.assert_allclose(
        potential_gradient(spec, shifted), potential_gradient(spec, p), atol=1e-10
    )


def test_coincident_ions_raise():
    spec = CrystalPotentialSpec.coulomb(2, d=1)
    with pytest.raises(NumericError):
        potential_energy(spec, [[1.0], [1.0]])
    with pytest.raises(NumericError):
        potential_gradient(spec, [[1.0], [1.0]])
    # the printed quadratic pair form has no singularity
    printed = CrystalPotentialSpec.calogero(2, g=1.0, printed_form=True)
    assert np.isfinite(potential_energy(printed, [[1.0], [1.0]]))


def test_two_ion_coulomb_equilibrium():
    spec = CrystalPotentialSpec.coulomb(2, d=1, b=1.5, a=2.0, c=0.9)
    res = find_equilibrium(spec, seeds=4)
    assert res.converged
    assert res.residual <= 1e-10
    assert res.hessian_min_eig > -1e-8
    xs = np.sort(res.configuration.y[:, 0])
    x_star = (2.0 * 0.9 / 1.5) ** (1.0 / 3.0)
    np.testing.assert_allclose(xs, [-x_star, x_star], atol=1e-9)


def test_three_ion_chain_symmetry():
    res = find_equilibrium(CrystalPotentialSpec.coulomb(3, d=1), seeds=4)
    assert res.converged
    xs = np.sort(res.configuration.y[:, 0])
    assert xs[1] == pytest.approx(0.0, abs=1e-9)
    assert xs[0] == pytest.approx(-xs[2], abs=1e-9)


def test_planar_triangle_equilibrium():
    res = find_equilibrium(CrystalPotentialSpec.coulomb(3, d=2), seeds=6)
    assert res.converged
    y = res.configuration.y
    dists = sorted(
        np.linalg.norm(y[i] - y[j]) for i in range(3) for j in range(i + 1, 3)
    )
    assert dists[2] - dists[0] < 1e-8  # equilateral


def test_warm_start_and_nonconvergence_flag():
    spec = CrystalPotentialSpec.coulomb(2, d=1)
    seeded = find_equilibrium(spec, initial=[[-1.1], [0.9]], seeds=1)
    assert seeded.converged
    # N=3 equilibrium coordinates are irrational, so the residual cannot
    # reach an impossible tolerance; the search flags instead of raising
    strict = find_equilibrium(CrystalPotentialSpec.coulomb(3, d=1), seeds=1, tol=0.0)
    assert not strict.converged
    assert strict.residual > 0.0


def test_hermite_zeros():
    np.testing.assert_allclose(hermite_zeros(1), [0.0], atol=1e-14)
    np.testing.assert_allclose(
        hermite_zeros(2), [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12
    )
    np.testing.assert_allclose(
        hermite_zeros(3), [-math.sqrt(1.5), 0.0, math.sqrt(1.5)], atol=1e-12
    )
    z5 = hermite_zeros(5)
    assert np.all(np.diff(z5) > 0)
    np.testing.assert_allclose(z5, -z5[::-1], atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_inverse_square_chain_sits_on_hermite_zeros(n):
    deviation, res = calogero_check(g=1.0, b_over_ag=1.0, n_ions=n)
    assert res.converged
    assert deviation < 1e-6


def test_calogero_scaling():
    # kappa = (4 a g / b)^(1/4) rescales the whole chain
    dev, res = calogero_check(g=2.0, b_over_ag=4.0, n_ions=3)
    assert dev < 1e-6
    kappa = (4.0 / 4.0) ** 0.25
    xs = np.sort(res.configuration.y[:, 0])
    np.testing.assert_allclose(xs, kappa * hermite_zeros(3), atol=1e-6)
