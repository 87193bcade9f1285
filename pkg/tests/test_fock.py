import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trapcalc import (
    FockVector,
    OperatorMatrix,
    TruncationPolicy,
    expectation,
    fidelity,
    ladder_operators,
    number_operator,
    number_state,
    operator_exponential,
    vacuum_state,
)
from trapcalc.errors import (
    InvalidPolicyError,
    NumericError,
    ShapeMismatchError,
    TruncationRiskError,
)


def test_policy_defaults():
    pol = TruncationPolicy()
    assert pol.dim == 128
    assert pol.tail_tol == 1e-10
    assert pol.unitary_tol == 1e-9
    # top-10% band
    assert pol.tail_start == 116
    assert TruncationPolicy(dim=16).tail_start == 15
    assert TruncationPolicy(dim=10).tail_start == 9


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dim": 1},
        {"dim": 0},
        {"dim": 2.5},
        {"tail_tol": 0.0},
        {"tail_tol": -1e-3},
        {"unitary_tol": 0.0},
    ],
)
def test_policy_rejects_bad_values(kwargs):
    with pytest.raises(InvalidPolicyError):
        TruncationPolicy(**kwargs)


def test_ladder_commutator_has_single_cutoff_defect():
    pol = TruncationPolicy(dim=24)
    a, ad = ladder_operators(pol)
    comm = a.entries @ ad.entries - ad.entries @ a.entries
    expected = np.eye(24)
    expected[-1, -1] = 1.0 - 24.0
    np.testing.assert_allclose(comm, expected, atol=1e-14)


def test_number_operator_diagonal():
    pol = TruncationPolicy(dim=12)
    n_op = number_operator(pol)
    np.testing.assert_allclose(n_op.entries, np.diag(np.arange(12.0)), atol=0)
    assert n_op.hermitian


def test_number_and_vacuum_states():
    pol = TruncationPolicy(dim=8)
    for n in range(8):
        vec = number_state(n, pol)
        expected = np.zeros(8)
        expected[n] = 1.0
        np.testing.assert_array_equal(vec.coeffs, expected)
    np.testing.assert_array_equal(vacuum_state(pol).coeffs, number_state(0, pol).coeffs)
    with pytest.raises(ValueError):
        number_state(8, pol)
    with pytest.raises(ValueError):
        number_state(-1, pol)


def test_number_phase_exponential():
    # exp(i (pi/2) N) |n> = i^n |n>
    pol = TruncationPolicy(dim=16)
    n_op = number_operator(pol)
    u = operator_exponential(OperatorMatrix(0.5j * math.pi * n_op.entries, pol))
    phases = np.diag(u.entries)
    np.testing.assert_allclose(phases, 1j ** np.arange(16), atol=1e-14)
    assert u.unitary_defect() < 1e-13


def test_expectation_and_fidelity():
    pol = TruncationPolicy(dim=32)
    n_op = number_operator(pol)
    for n in (0, 3, 7):
        assert expectation(number_state(n, pol), n_op) == pytest.approx(n, abs=1e-14)
    assert fidelity(number_state(2, pol), number_state(2, pol)) == pytest.approx(1.0)
    assert fidelity(number_state(2, pol), number_state(3, pol)) == pytest.approx(0.0, abs=1e-30)


def test_fidelity_of_small_displacement():
    from trapcalc import coherent_state

    pol = TruncationPolicy(dim=32)
    f = fidelity(coherent_state(0.1, pol), vacuum_state(pol))
    assert f == pytest.approx(math.exp(-0.01), rel=1e-10)


def test_vector_validation():
    pol = TruncationPolicy(dim=4)
    with pytest.raises(ShapeMismatchError):
        FockVector(np.zeros(5), pol)
    with pytest.raises(NumericError):
        FockVector(np.array([1.0, np.nan, 0.0, 0.0]), pol)
    with pytest.raises(NumericError):
        FockVector(np.zeros(4), pol).normalized()


def test_tail_mass_and_check():
    pol = TruncationPolicy(dim=10)  # tail band is index 9
    c = np.zeros(10)
    c[9] = 1.0
    vec = FockVector(c, pol)
    assert vec.tail_mass() == pytest.approx(1.0)
    with pytest.raises(TruncationRiskError) as exc:
        vec.check_tail()
    assert exc.value.suggested_dim == 20

    safe = FockVector(np.eye(10)[0], pol)
    assert safe.tail_mass() == 0.0
    safe.check_tail()


def test_operator_validation():
    pol = TruncationPolicy(dim=3)
    with pytest.raises(ShapeMismatchError):
        OperatorMatrix(np.eye(4), pol)
    with pytest.raises(NumericError):
        OperatorMatrix(np.full((3, 3), np.inf), pol)
    m = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(NumericError):
        OperatorMatrix(m, pol, hermitian=True)


def test_operator_algebra_and_unitarity():
    pol = TruncationPolicy(dim=6)
    a, ad = ladder_operators(pol)
    prod = a @ ad
    np.testing.assert_allclose(prod.entries, a.entries @ ad.entries)
    np.testing.assert_allclose((a + ad).entries, a.entries + ad.entries)
    np.testing.assert_allclose((2.0 * a).entries, 2.0 * a.entries)
    np.testing.assert_allclose(ad.dagger().entries, a.entries)

    vec = number_state(1, pol)
    applied = a @ vec
    assert applied.coeffs[0] == pytest.approx(1.0)

    ident = OperatorMatrix(np.eye(6), pol)
    assert ident.unitary_defect() == 0.0
    ident.check_unitary()
    with pytest.raises(NumericError):
        (2.0 * ident).check_unitary()


def test_operator_accepts_noncontiguous_entries():
    pol = TruncationPolicy(dim=5)
    a, _ = ladder_operators(pol)
    # conjugate transpose is a non-contiguous view
    op = OperatorMatrix(a.entries.conj().T, pol)
    np.testing.assert_allclose(op.entries, a.dagger().entries)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=6, max_size=6))
def test_normalized_has_unit_norm(coeffs):
    pol = TruncationPolicy(dim=6)
    arr = np.asarray(coeffs, dtype=complex)
    if np.linalg.norm(arr) < 1e-12:
        return
    vec = FockVector(arr, pol).normalized()
    assert vec.norm() == pytest.approx(1.0, abs=1e-12)


def test_inner_conjugate_symmetry():
    pol = TruncationPolicy(dim=5)
    rng = np.random.default_rng(7)
    u = FockVector(rng.normal(size=5) + 1j * rng.normal(size=5), pol)
    v = FockVector(rng.normal(size=5) + 1j * rng.normal(size=5), pol)
    assert u.inner(v) == pytest.approx(np.conj(v.inner(u)))
    other = TruncationPolicy(dim=6)
    with pytest.raises(ShapeMismatchError):
        u.inner(FockVector(np.ones(6), other))
