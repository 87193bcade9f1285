import math

import numpy as np
import pytest

from trapcalc import (
    GeneralizedSqueezedLabel,
    SqueezeLabel,
    TruncationPolicy,
    check_z_trust,
    classical_moments,
    closure_evolve,
    coherent_state,
    conjugated_generators,
    expectation,
    expectation_generators,
    fidelity,
    generalized_squeezed_state,
    ladder_operators,
    moment_comparison,
    moment_oracle,
    number_state,
    quadrature_operators,
    sp2r_generators,
    squeeze_operator,
    squeeze_trust_bound,
    transformed_generators,
    two_photon_hamiltonian,
    vacuum_state,
)
from trapcalc.errors import TruncationRiskError
from trapcalc.fock import OperatorMatrix

POL = TruncationPolicy(dim=128)


def _core(mat, k):
    return mat[:k, :k]


def test_sp2r_matrix_elements():
    pol = TruncationPolicy(dim=16)
    kp, km, k0 = sp2r_generators(pol)
    # K+ |0> = |2> / sqrt(2), K0 |n> = (n + 1/2)/2 |n>
    raised = kp.entries @ number_state(0, pol).coeffs
    expected = number_state(2, pol).coeffs / math.sqrt(2)
    np.testing.assert_allclose(raised, expected, atol=1e-14)
    assert expectation(number_state(2, pol), k0) == pytest.approx(5.0 / 4.0)
    np.testing.assert_allclose(km.entries, kp.entries.conj().T, atol=1e-14)


def test_sp2r_commutators_on_core_block():
    pol = TruncationPolicy(dim=64)
    core = 32
    kp, km, k0 = sp2r_generators(pol)

    def comm(x, y):
        return x @ y - y @ x

    np.testing.assert_allclose(
        _core(comm(k0.entries, kp.entries), core), _core(kp.entries, core), atol=1e-12
    )
    np.testing.assert_allclose(
        _core(comm(k0.entries, km.entries), core), -_core(km.entries, core), atol=1e-12
    )
    np.testing.assert_allclose(
        _core(comm(km.entries, kp.entries), core), 2 * _core(k0.entries, core), atol=1e-12
    )


def test_squeeze_label_validation_and_zeta():
    with pytest.raises(ValueError):
        SqueezeLabel(1.0)
    with pytest.raises(ValueError):
        SqueezeLabel(1.2j)
    lab = SqueezeLabel(0.3 - 0.2j)
    back = SqueezeLabel.from_zeta(lab.zeta)
    assert back.z == pytest.approx(lab.z, abs=1e-14)
    tiny = SqueezeLabel(1e-10j)
    assert tiny.zeta == tiny.z


def test_generalized_label_validation():
    with pytest.raises(ValueError):
        GeneralizedSqueezedLabel(-1, 0.0, SqueezeLabel(0.0))
    lab = GeneralizedSqueezedLabel(2, 0.5, 0.1j)
    assert isinstance(lab.z, SqueezeLabel)


def test_squeeze_operator_unitary():
    u = squeeze_operator(SqueezeLabel(0.5), POL)
    assert u.unitary_defect() < 1e-9
    ident = squeeze_operator(SqueezeLabel(0.0), POL)
    np.testing.assert_allclose(ident.entries, np.eye(POL.dim), atol=1e-14)


def test_squeezed_vacuum_occupies_even_levels():
    lab = GeneralizedSqueezedLabel(0, 0.0, SqueezeLabel(0.4))
    vec = generalized_squeezed_state(lab, POL)
    odd = np.abs(vec.coeffs[1::2])
    assert np.max(odd) < 1e-12
    # c2/c0 = -zeta... for vacuum squeezing |c2/c0| = |z|/sqrt(2)
    assert abs(vec.coeffs[2] / vec.coeffs[0]) == pytest.approx(0.4 / math.sqrt(2), rel=1e-10)


def test_expectation_generators_frozen_value():
    lab = GeneralizedSqueezedLabel(0, 0.0, SqueezeLabel(0.5))
    vals = expectation_generators(lab)
    # (n + 1/2)(1 + |z|^2) / (2 (1 - |z|^2)) at n=0, z=0.5
    assert vals["K_zero"] == pytest.approx(5.0 / 12.0, rel=1e-14)
    assert vals["a"] == 0.0


@pytest.mark.parametrize(
    "label",
    [
        GeneralizedSqueezedLabel(0, 0.0, SqueezeLabel(0.5)),
        GeneralizedSqueezedLabel(2, 0.7 + 0.2j, SqueezeLabel(0.3j)),
        GeneralizedSqueezedLabel(1, -0.4 + 0.9j, SqueezeLabel(-0.25 + 0.35j)),
    ],
)
def test_expectation_generators_match_matrix_oracle(label):
    vec = generalized_squeezed_state(label, POL)
    a, ad = ladder_operators(POL)
    kp, km, k0 = sp2r_generators(POL)
    closed = expectation_generators(label)
    assert closed["a"] == pytest.approx(expectation(vec, a), abs=1e-10)
    assert closed["a_dag"] == pytest.approx(expectation(vec, ad), abs=1e-10)
    assert closed["K_plus"] == pytest.approx(expectation(vec, kp), abs=1e-10)
    assert closed["K_minus"] == pytest.approx(expectation(vec, km), abs=1e-10)
    assert closed["K_zero"] == pytest.approx(expectation(vec, k0), abs=1e-10)


def test_transformed_generators_match_conjugation_on_core():
    label = GeneralizedSqueezedLabel(1, 0.6 + 0.3j, SqueezeLabel(0.3 + 0.3j))
    closed = transformed_generators(label, POL)
    brute = conjugated_generators(label, POL)
    core = POL.dim // 8
    for key in ("a", "a_dag", "K_plus", "K_minus", "K_zero"):
        diff = np.max(np.abs(
            _core(closed[key].entries, core) - _core(brute[key].entries, core)
        ))
        assert diff < 1e-9, (key, diff)


def test_xi_eta_closed_forms():
    from trapcalc import xi_eta

    spread = xi_eta(0.5)
    assert spread.xi == pytest.approx(3.0, rel=1e-14)
    assert spread.eta == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert spread.product == pytest.approx(1.0, rel=1e-14)
    # purely imaginary labels spread both quadratures equally
    both = xi_eta(0.4j)
    assert both.xi == pytest.approx(both.eta, rel=1e-14)
    assert both.product > 1.0
    with pytest.raises(ValueError):
        xi_eta(1.0)


def test_quadrature_commutator_core():
    x, p = quadrature_operators(POL, hbar=2.0)
    comm = x.entries @ p.entries - p.entries @ x.entries
    core = POL.dim - 1
    np.testing.assert_allclose(_core(comm, core), 2.0j * np.eye(core), atol=1e-12)


def test_uncertainty_products():
    # n=0, z=0: Heisenberg floor; n=1 triples it; real z keeps the floor
    rep0 = classical_moments(GeneralizedSqueezedLabel(0, 0.3 + 0.2j, SqueezeLabel(0.0)))
    assert rep0.uncertainty_product == pytest.approx(0.5, abs=1e-12)
    rep1 = classical_moments(GeneralizedSqueezedLabel(1, 0.0, SqueezeLabel(0.0)))
    assert rep1.uncertainty_product == pytest.approx(1.5, abs=1e-12)
    repz = classical_moments(GeneralizedSqueezedLabel(0, 0.5, SqueezeLabel(0.3)))
    assert repz.uncertainty_product == pytest.approx(0.5, abs=1e-9)
    assert repz.dx2 != pytest.approx(repz.dp2, rel=1e-3)


@pytest.mark.parametrize("units", [(1.0, 1.0, 1.0), (2.0, 3.0, 0.7)])
def test_classical_moments_match_oracle(units):
    hbar, m, omega = units
    label = GeneralizedSqueezedLabel(2, 0.8 - 0.3j, SqueezeLabel(0.25j))
    rep = classical_moments(label, hbar=hbar, m=m, omega=omega, policy=POL)
    orc = moment_oracle(label, POL, hbar=hbar, m=m, omega=omega)
    assert rep.x_cl == pytest.approx(orc["x"], abs=1e-10)
    assert rep.p_cl == pytest.approx(orc["p"], abs=1e-10)
    assert rep.x2_cl == pytest.approx(orc["x2"], abs=1e-9)
    assert rep.p2_cl == pytest.approx(orc["p2"], abs=1e-9)
    assert rep.dx2 == pytest.approx(orc["x2"] - orc["x"] ** 2, abs=1e-9)
    assert rep.dp2 == pytest.approx(orc["p2"] - orc["p"] ** 2, abs=1e-9)
    assert rep.E_cl == pytest.approx(orc["Ec"] + orc["Ep"], abs=1e-9)
    assert rep.G == pytest.approx(math.sqrt(hbar / (2 * m * omega)))


def test_moment_comparison_flags_real_squeeze():
    # real squeeze component with nonzero displacement: the printed
    # kinetic/potential split and third moment disagree with the oracle
    table = moment_comparison(GeneralizedSqueezedLabel(0, 0.8, SqueezeLabel(0.3)), policy=POL)
    for key in ("x_cl", "p_cl", "x2_cl", "p2_cl", "E_cl"):
        assert not table[key]["flagged"], key
    for key in ("Ec_cl", "Ep_cl", "mu3", "pearson_CP"):
        assert table[key]["flagged"], key
    assert table["pearson_CA"]["closed"] is None
    assert not table["pearson_CA"]["flagged"]


def test_moment_comparison_imaginary_squeeze_keeps_energy_split():
    table = moment_comparison(GeneralizedSqueezedLabel(0, 0.8, SqueezeLabel(0.3j)), policy=POL)
    assert not table["Ec_cl"]["flagged"]
    assert not table["Ep_cl"]["flagged"]
    # the printed third moment still carries the wrong prefactor power
    assert table["mu3"]["flagged"]
    for key, row in table.items():
        if row["abs_diff"] is not None:
            assert row["flagged"] == (row["abs_diff"] > 1e-8), key


def test_z_trust_region():
    bound = squeeze_trust_bound(POL)
    assert bound == pytest.approx(0.85 * (1e-10) ** (1.0 / (0.9 * 128)), rel=1e-12)
    check_z_trust(0.5, POL)
    with pytest.raises(TruncationRiskError) as exc:
        check_z_trust(0.75, POL)
    assert exc.value.suggested_dim == 256
    with pytest.raises(TruncationRiskError) as exc2:
        check_z_trust(0.9, POL)
    assert exc2.value.suggested_dim is None
    assert "no finite dimension" in str(exc2.value)


def test_generalized_state_headroom_guard():
    with pytest.raises(TruncationRiskError):
        generalized_squeezed_state(
            GeneralizedSqueezedLabel(32, 0.0, SqueezeLabel(0.0)), POL
        )


def test_two_photon_hamiltonian_structure():
    pol = TruncationPolicy(dim=32)
    h = two_photon_hamiltonian(1.5, 0.05 + 0.02j, 0.1j, pol, hbar=2.0)
    assert h.hermitian
    a, ad = ladder_operators(pol)
    manual = 2.0 * 1.5 * (ad.entries @ a.entries + 0.5 * np.eye(32))
    manual += (0.05 + 0.02j) * (ad.entries @ ad.entries) + (0.05 - 0.02j) * (
        a.entries @ a.entries
    )
    manual += 0.1j * ad.entries + (-0.1j) * a.entries
    np.testing.assert_allclose(h.entries, manual, atol=1e-14)


def test_closure_free_oscillator_coherent_family():
    # a quadratic Hamiltonian keeps the family closed: a free oscillator
    # rotates the coherent label without leaving the manifold
    h = two_photon_hamiltonian(1.0, 0.0, 0.0, POL)
    start = GeneralizedSqueezedLabel(0, 0.5, SqueezeLabel(0.0))
    res = closure_evolve(h, "coherent", start, t_final=1.3, steps=80)
    assert abs(res.infidelity) < 1e-9
    assert res.label.alpha == pytest.approx(0.5 * np.exp(-1.3j), abs=1e-6)
    assert res.final_state.norm() == pytest.approx(1.0, abs=1e-12)


def test_closure_accepts_raw_vector_and_rejects_bad_family():
    h = two_photon_hamiltonian(1.0, 0.0, 0.0, POL)
    res = closure_evolve(h, "coherent", coherent_state(0.4, POL), 0.5, 40)
    assert abs(res.infidelity) < 1e-9
    with pytest.raises(ValueError):
        closure_evolve(h, "gaussian", vacuum_state(POL), 0.5, 40)
