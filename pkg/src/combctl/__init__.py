"""Controlled quantum operations, quantum combs and controllization."""
__version__ = "0.1.0"

from .channels import (
    ChoiMatrix,
    KrausSet,
    PauliCoefficients,
    apply_channel,
    choi_to_orthogonal_kraus,
    compose,
    kraus_to_choi,
    pauli_decompose,
    stinespring,
    validate_channel,
)
from .combs import (
    CoherenceOperatorS,
    CombChoi,
    CombKraus,
    CombShape,
    check_comb_choi,
    comb_kraus_conditions,
    controlled_comb,
    controlled_comb_two,
    identity_comb,
    link_apply,
    most_coherent_S,
)
from .controlled import (
    CoherenceOperator,
    ControlledChannel,
    axioms_check,
    classical_controlled,
    coherence_norm,
    controlled_two,
    controlled_with_K,
    most_coherent_K,
)
from .linalg import (
    HermitianSpectrum,
    devectorize,
    expm_generator,
    hermitian_eig,
    kron,
    partial_trace,
    schatten_norm,
    unitary_root,
    vectorize,
)
from .switch import switch_action_pauli, switch_vs_controlled
