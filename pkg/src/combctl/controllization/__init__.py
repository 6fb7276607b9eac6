from .neutralization import (
    antisym_state,
    eigenstate_controllization,
    invariant_subspace_check,
    multicopy_controllization,
    prepare_traceout_comb,
    prepare_traceout_kraus,
)
from .randomization import (
    CoefficientRecord,
    RandomizationSet,
    ScalingRecord,
    clifford_set,
    pauli_set,
    pauli_vs_clifford,
    randomization_step_choi,
    randomized_coefficients,
    randomized_controllization,
)
