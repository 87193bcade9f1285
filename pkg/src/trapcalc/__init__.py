"""Truncated Fock-space numerics for trapped-ion motion.

Submodules: fock (policies, vectors, operators), coherent (displacement,
Bargmann/Husimi), squeeze (generalized squeezed states and moments),
floquet (Hill/Mathieu stability, quasienergies), crystal (equilibrium
configurations), multimode (several field modes), dicke (ion-field model),
cli (the `trapcalc` command).
"""

from .errors import (
    FrameSingularityError,
    InvalidPolicyError,
    NonconvergenceError,
    NumericError,
    QuadratureError,
    ShapeMismatchError,
    TrapcalcError,
    TruncationRiskError,
    UnstableSystemError,
    UnsupportedConfigurationError,
)
from .fock import (
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
from .coherent import (
    CoherentLabel,
    DiskQuadrature,
    HusimiGrid,
    alpha_trust_bound,
    bargmann_inner_product,
    bargmann_transform,
    check_alpha_trust,
    coherent_state,
    composition_defect,
    composition_phase,
    displacement_operator,
    husimi_norm,
    husimi_q,
    identity_resolution_check,
    normal_ordered_defect,
    overlap,
)
from .squeeze import (
    ClosureResult,
    GeneralizedSqueezedLabel,
    MomentReport,
    SqueezeLabel,
    XiEta,
    check_z_trust,
    classical_moments,
    closure_evolve,
    conjugated_generators,
    expectation_generators,
    generalized_squeezed_state,
    moment_comparison,
    moment_oracle,
    quadrature_operators,
    sp2r_generators,
    squeeze_operator,
    squeeze_trust_bound,
    transformed_generators,
    two_photon_hamiltonian,
    xi_eta,
)
from .floquet import (
    EvolutionFrame,
    FloquetResult,
    HillCoefficients,
    QuasienergyLadder,
    StabilityMap,
    TrapConfig,
    constant_hill,
    coupled_radial_monodromy,
    cyclotron_frequency,
    evolution_frame,
    hill_from_trap,
    mathieu_hill,
    mathieu_parameters,
    mathieu_stability_scan,
    monodromy,
    quasienergy,
    thread_budget,
    trap_stability_scan,
)
from .crystal import (
    CrystalPotentialSpec,
    EquilibriumResult,
    IonConfiguration,
    calogero_check,
    collective_variables,
    find_equilibrium,
    hermite_zeros,
    potential_energy,
    potential_gradient,
)
from .multimode import (
    ModeSet,
    MultimodeLabels,
    electric_field_expectation,
    electric_field_moments,
    electric_field_operator,
    mode_ladder,
    mode_operator,
    mode_tail_masses,
    multimode_displacement,
    multimode_hamiltonian,
    multimode_squeeze,
    multimode_state,
    multimode_vacuum,
)
from .dicke import (
    DickeConfig,
    DrivenCoherenceResult,
    SpinOperatorSet,
    classical_label_trajectory,
    dicke_hamiltonian,
    dicke_initial_state,
    dicke_trajectory,
    driven_coherence_check,
    excitation_operator,
    semiclassical_field_hamiltonian,
    spin_operators,
)

__version__ = "0.1.0"
