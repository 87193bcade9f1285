import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trapcalc import (
    CoherentLabel,
    DiskQuadrature,
    HusimiGrid,
    TruncationPolicy,
    alpha_trust_bound,
    bargmann_inner_product,
    bargmann_transform,
    check_alpha_trust,
    coherent_state,
    composition_defect,
    composition_phase,
    displacement_operator,
    fidelity,
    husimi_norm,
    husimi_q,
    identity_resolution_check,
    normal_ordered_defect,
    number_state,
    overlap,
    vacuum_state,
)
from trapcalc.errors import QuadratureError, TruncationRiskError

POL = TruncationPolicy(dim=64)


def test_coherent_coefficients_alpha_one():
    vec = coherent_state(1.0, POL)
    root = math.exp(-0.5)
    assert vec.coeffs[0] == pytest.approx(root, rel=1e-12)
    assert vec.coeffs[1] == pytest.approx(root, rel=1e-12)
    assert vec.coeffs[2] == pytest.approx(root / math.sqrt(2), rel=1e-12)
    assert vec.norm() == pytest.approx(1.0, abs=1e-12)


def test_overlap_closed_form():
    # <alpha|beta> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)
    assert overlap(1.0, 1.0j) == pytest.approx(cmath.exp(-1.0 + 1.0j), rel=1e-14)
    assert overlap(0.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert abs(overlap(0.0, 2.0)) ** 2 == pytest.approx(math.exp(-4.0), rel=1e-13)


def test_matrix_overlap_matches_closed_form():
    va = coherent_state(0.9 + 0.4j, POL)
    vb = coherent_state(-0.3 + 1.1j, POL)
    assert va.inner(vb) == pytest.approx(overlap(0.9 + 0.4j, -0.3 + 1.1j), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.tuples(
        st.floats(-1.4, 1.4), st.floats(-1.4, 1.4),
        st.floats(-1.4, 1.4), st.floats(-1.4, 1.4),
    )
)
def test_overlap_consistency_random(parts):
    ar, ai, br, bi = parts
    alpha, beta = complex(ar, ai), complex(br, bi)
    va = coherent_state(alpha, POL)
    vb = coherent_state(beta, POL)
    assert abs(va.inner(vb) - overlap(alpha, beta)) < 1e-10


def test_displacement_unitary_and_inverse():
    d = displacement_operator(1.2 - 0.7j, POL)
    assert d.unitary_defect() < 1e-10
    prod = displacement_operator(-(1.2 - 0.7j), POL) @ d
    assert np.max(np.abs(prod.entries - np.eye(POL.dim))) < 1e-10


def test_coherent_state_is_ladder_eigenstate():
    from trapcalc import ladder_operators

    alpha = 1.2j
    vec = coherent_state(alpha, POL)
    a, _ = ladder_operators(POL)
    residual = a.entries @ vec.coeffs - alpha * vec.coeffs
    assert np.linalg.norm(residual) < 1e-9


def test_composition_phase_and_defect():
    alpha, beta = 1.0, 1.0j
    expected = cmath.exp(0.5 * (alpha * np.conj(beta) - np.conj(alpha) * beta))
    assert composition_phase(alpha, beta) == pytest.approx(expected, rel=1e-14)
    # D(a) D(b) = phase * D(a+b) on the core block
    assert composition_defect(alpha, beta, POL) < 1e-9
    assert composition_defect(0.8 - 0.2j, -0.4 + 0.6j, POL) < 1e-9


def test_normal_ordered_defect():
    assert normal_ordered_defect(1.2 + 0.3j, POL) < 1e-9
    assert normal_ordered_defect(0.5j, POL) < 1e-9


def test_alpha_trust_region():
    pol = TruncationPolicy(dim=64)
    assert alpha_trust_bound(pol) == pytest.approx(0.25 * math.sqrt(64))
    check_alpha_trust(1.9, pol)
    with pytest.raises(TruncationRiskError) as exc:
        check_alpha_trust(2.5, pol)
    assert exc.value.suggested_dim is not None
    assert exc.value.suggested_dim > 64
    with pytest.raises(TruncationRiskError):
        coherent_state(2.5, pol)


def test_coherent_label_validation():
    lab = CoherentLabel(0.3 + 0.4j)
    assert lab.alpha == 0.3 + 0.4j
    with pytest.raises(ValueError):
        CoherentLabel(complex("nan"))


def test_identity_resolution_small_basis():
    residual = identity_resolution_check(
        TruncationPolicy(dim=32), radial_nodes=200, angular_nodes=200, r_max=8.0
    )
    assert residual < 1e-6


def test_identity_resolution_rejects_degenerate_rule():
    with pytest.raises(QuadratureError):
        identity_resolution_check(POL, radial_nodes=1, angular_nodes=10)
    with pytest.raises(QuadratureError):
        identity_resolution_check(POL, radial_nodes=10, angular_nodes=10, r_max=-1.0)


def test_bargmann_transform_of_coherent_state():
    alpha = 0.7
    vec = coherent_state(alpha, POL)
    zs = np.array([0.0, 0.5, 1.0 + 0.5j, -0.8j])
    values = bargmann_transform(vec, zs)
    expected = math.exp(-0.5 * abs(alpha) ** 2) * np.exp(alpha * zs)
    np.testing.assert_allclose(values, expected, atol=1e-10)


def test_bargmann_inner_product_isometry():
    # Gaussian-weighted pairing of entire representatives reproduces <.|.>
    for m, n in [(0, 0), (0, 1), (2, 2), (3, 5)]:
        val = bargmann_inner_product(number_state(m, POL), number_state(n, POL))
        assert val == pytest.approx(1.0 if m == n else 0.0, abs=1e-7)


def test_bargmann_inner_product_vacuum_coherent():
    alpha = 0.7
    val = bargmann_inner_product(vacuum_state(POL), coherent_state(alpha, POL))
    assert val == pytest.approx(math.exp(-0.5 * alpha**2), abs=1e-7)


def test_bargmann_inner_product_rejects_unresolvable_state():
    pol = TruncationPolicy(dim=128)
    with pytest.raises(QuadratureError):
        bargmann_inner_product(
            number_state(127, pol),
            number_state(127, pol),
            DiskQuadrature(40, 16, 4.0),
        )


def test_husimi_grid_spec_roundtrip():
    grid = HusimiGrid.from_spec("-3:3:61,-2:2.5:41")
    assert grid.re_min == -3.0 and grid.re_max == 3.0 and grid.n_re == 61
    assert grid.im_min == -2.0 and grid.im_max == 2.5 and grid.n_im == 41
    re, im = grid.axes
    assert re.size == 61 and im.size == 41
    for bad in ("1:2", "1:2:3", "a:b:2,0:1:2", "0:1:2,0:1", "1:0:5,0:1:5"):
        with pytest.raises(ValueError):
            HusimiGrid.from_spec(bad)


def test_husimi_vacuum_profile_and_norm():
    grid = HusimiGrid(-3.0, 3.0, 61, -3.0, 3.0, 61)
    q = husimi_q(vacuum_state(POL), grid)
    re, im = grid.mesh()
    expected = np.exp(-(re**2 + im**2)) / np.pi
    np.testing.assert_allclose(q, expected, atol=1e-12)
    assert abs(husimi_norm(grid, q) - 1.0) < 1e-4


def test_husimi_peak_tracks_the_label():
    alpha = 1.0 - 0.5j
    grid = HusimiGrid(-3.0, 3.0, 121, -3.0, 3.0, 121)
    q = husimi_q(coherent_state(alpha, POL), grid)
    i, j = np.unravel_index(np.argmax(q), q.shape)
    re, im = grid.axes
    assert re[i] == pytest.approx(alpha.real, abs=0.06)
    assert im[j] == pytest.approx(alpha.imag, abs=0.06)
    assert np.max(q) == pytest.approx(1.0 / np.pi, rel=1e-3)


def test_fidelity_between_coherent_states():
    va = coherent_state(0.6, POL)
    vb = coherent_state(-0.6, POL)
    # |<a|b>|^2 = exp(-|a-b|^2)
    assert fidelity(va, vb) == pytest.approx(math.exp(-1.44), rel=1e-10)
