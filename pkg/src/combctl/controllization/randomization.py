"""Basis randomization and approximate controllization of Hamiltonian dynamics."""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channels import (
    PAULIS,
    ChoiMatrix,
    choi_distance,
    compose_power,
    identity_channel,
    kraus_to_choi,
    pauli_decompose,
)
from ..combs import CombKraus, most_coherent_S, uniform_shape
from ..controlled import ControlledChannel, control_block, controlled_unitary
from ..errors import DimensionError
from ..linalg import dagger, devectorize, expm_generator, hermitian_eig, is_unitary, kron, vectorize

_S = 1 / np.sqrt(2)
_W = np.exp(1j * np.pi / 4)
# representatives of the Clifford group modulo Paulis, labelled by the
# permutation they induce on (X, Y, Z)
CLIFFORD_COSETS = {
    "id": np.eye(2, dtype=complex),
    "(1,2)": np.array([[1, 0], [0, 1j]]),
    "(2,3)": _S * np.array([[_W, np.conj(_W)], [np.conj(_W), _W]]),
    "(3,1)": _S * np.array([[1, 1], [1, -1]], dtype=complex),
    "(1,2,3)": _S * np.array([[1, 1j], [1, -1j]]),
    "(3,2,1)": _S * np.array([[1, 1], [1j, -1j]]),
}

# COMMUTATION[i][j] = +1 if sigma_i and sigma_j commute, -1 otherwise
COMMUTATION = np.array([[1 if i == 0 or j == 0 or i == j else -1 for j in range(4)] for i in range(4)])

TRIAL_CHUNK = 256


@dataclass(frozen=True, eq=False)
class RandomizationSet:
    name: str
    unitaries: tuple

    @property
    def size(self) -> int:
        return len(self.unitaries)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]


@dataclass(frozen=True)
class CoefficientRecord:
    c: tuple
    order: str = "exact"


@dataclass(frozen=True, eq=False)
class RandomizationResult:
    choi: ChoiMatrix
    error: float
    phase: float


@dataclass(frozen=True)
class ScalingRecord:
    n: int
    error: float
    phase: float = float("nan")


@dataclass
class PauliCliffordRow:
    n: int
    c0_pauli: float
    c0_clifford: float
    neutral_error_pauli: float
    neutral_error_clifford: float
    control_error_pauli: float
    control_error_clifford: float


@dataclass
class PauliCliffordReport:
    rows: list = field(default_factory=list)
    s0_residual: float = float("nan")

    @property
    def clifford_not_better(self) -> bool:
        return all(r.c0_clifford <= r.c0_pauli + 1e-12 for r in self.rows)

    @property
    def same_s0(self) -> bool:
        return self.s0_residual <= 1e-10


def pauli_set() -> RandomizationSet:
    return RandomizationSet("pauli", tuple(p.copy() for p in PAULIS))


def clifford_set() -> RandomizationSet:
    ops = [v @ p for v in CLIFFORD_COSETS.values() for p in PAULIS]
    return RandomizationSet("clifford", tuple(ops))


def randomization_set(name: str) -> RandomizationSet:
    name = name.lower()
    if name == "pauli":
        return pauli_set()
    if name == "clifford":
        return clifford_set()
    raise ValueError(f"unknown randomization set {name!r}")


def maps_paulis_to_paulis(u, tol: float = 1e-10) -> bool:
    """True if conjugation by ``u`` permutes the Paulis up to phase."""
    for p in PAULIS[1:]:
        q = u @ p @ dagger(u)
        overlaps = [abs(np.trace(dagger(s) @ q)) / 2 for s in PAULIS]
        if abs(max(overlaps) - 1) > tol:
            return False
    return is_unitary(u)


def pauli_twirl_coefficients(c) -> np.ndarray:
    """Pauli coefficients after twirling: ``c'_{ab} = c_{ab} mean_k s_{ka} s_{kb}``."""
    c = np.asarray(c)
    mix = COMMUTATION.T @ COMMUTATION / 4
    return c * mix


def randomization_comb(rset: RandomizationSet) -> CombKraus:
    """One-slot comb ``(1/|R|) sum_i |U_i>><<U_i|_{01} (x) |U_i^dag>><<U_i^dag|_{23}`` in Kraus form."""
    d = rset.dim
    w = 1 / np.sqrt(rset.size)
    vecs = [w * kron(vectorize(u), vectorize(dagger(u))) for u in rset.unitaries]
    return CombKraus(np.array(vecs), uniform_shape(1, d))


def randomization_step_choi(u, rset: RandomizationSet, controlled: bool = False) -> ChoiMatrix:
    """One use of ``u`` inside the randomization comb.

    The controlled step randomizes the |0> branch and passes ``u`` on |1>.
    """
    u = np.asarray(u, dtype=complex)
    d = rset.dim
    if u.shape != (d, d):
        raise DimensionError(f"unitary must be {d}x{d}")
    w = 1 / np.sqrt(rset.size)
    conj = [dagger(r) @ u @ r for r in rset.unitaries]
    if not controlled:
        return kraus_to_choi([w * c for c in conj])
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return kraus_to_choi([w * (np.kron(p0, c) + np.kron(p1, u)) for c in conj])


def _check_qubit(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise DimensionError("randomization sets are defined for qubits")
    hermitian_eig(h)
    return h


def ideal_controlled(h, t: float) -> ControlledChannel:
    """``|0><0| (x) I + |1><1| (x) exp(i Tr(h) t / d) exp(-i h t)``."""
    d = h.shape[0]
    theta = float(np.real(np.trace(h))) * t / d
    return controlled_unitary(expm_generator(h, t), theta)


def extract_phase(j: ChoiMatrix, u) -> float:
    """Phase of ``Tr[u^dag K]`` where ``|K>>`` is the coherence block applied to ``|I>>/d``."""
    d = j.d_in // 2
    k = devectorize(control_block(j, (1, 1), (0, 0)) @ vectorize(np.eye(d)) / d, d, d)
    return float(np.angle(np.trace(dagger(u) @ k)))


def _max_workers(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("COMBCTL_THREADS")
    return max(1, int(env)) if env else 1


def _sampled_chunk(conj, step, n, seed, start, stop):
    d = step.shape[0]
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    tail = np.kron(p1, np.linalg.matrix_power(step, n))
    acc = np.zeros((4 * d * d, 4 * d * d), dtype=complex)
    for trial in range(start, stop):
        idx = np.random.default_rng([seed, trial]).integers(len(conj), size=n)
        b = np.eye(d, dtype=complex)
        for i in idx:
            b = conj[i] @ b
        v = vectorize(np.kron(p0, b) + tail)
        acc += np.outer(v, v.conj())
    return acc


def sampled_controlled_choi(u, rset: RandomizationSet, n: int, seed: int, trials: int, workers=None) -> ChoiMatrix:
    """Monte-Carlo average over random sequences; trial ``k`` uses the stream ``(seed, k)``.

    Trials are summed in fixed-size chunks in chunk order, so the result
    does not depend on the number of workers.
    """
    conj = [dagger(r) @ u @ r for r in rset.unitaries]
    bounds = [(s, min(s + TRIAL_CHUNK, trials)) for s in range(0, trials, TRIAL_CHUNK)]
    with ThreadPoolExecutor(max_workers=_max_workers(workers)) as pool:
        parts = list(pool.map(lambda b: _sampled_chunk(conj, u, n, seed, *b), bounds))
    total = np.zeros_like(parts[0])
    for p in parts:
        total += p
    d = u.shape[0]
    return ChoiMatrix(total / trials, 2 * d, 2 * d)


def randomized_controllization(h, t: float, n: int, rset: RandomizationSet, seed: int = 0,
                               mode: str = "average", trials: int = 10000, workers=None) -> RandomizationResult:
    """Approximate controlled ``exp(-i h t)`` from ``n`` randomized uses of ``exp(-i h t / n)``."""
    h = _check_qubit(h)
    if rset.dim != 2:
        raise DimensionError("randomization sets are defined for qubits")
    if n < 1:
        raise ValueError("need at least one step")
    step = expm_generator(h, t / n)
    if mode == "average":
        j = compose_power(randomization_step_choi(step, rset, controlled=True), n)
    elif mode == "sampled":
        j = sampled_controlled_choi(step, rset, n, seed, trials, workers)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ideal = ideal_controlled(h, t)
    return RandomizationResult(j, choi_distance(j, ideal.choi), extract_phase(j, expm_generator(h, t)))


def randomized_channel(h, t: float, n: int, rset: RandomizationSet) -> ChoiMatrix:
    """The uncontrolled n-step randomized channel."""
    h = _check_qubit(h)
    step = expm_generator(h, t / n)
    return compose_power(randomization_step_choi(step, rset), n)


def randomized_coefficients(h, t: float, n: int, rset: RandomizationSet) -> CoefficientRecord:
    """Measured Pauli-diagonal coefficients of the n-step randomized channel."""
    c = pauli_decompose(randomized_channel(h, t, n, rset)).diagonal()
    return CoefficientRecord(tuple(float(x) for x in c), "exact")


def _pauli_weights(h, t):
    h = _check_qubit(h)
    return np.array([np.real(np.trace(h @ s)) ** 2 * t ** 2 / 4 for s in PAULIS[1:]])


def analytic_coefficients(h, t: float, n: int, set_name: str) -> CoefficientRecord:
    """Series predictions: ``c_0`` through ``1/n^2``, the others at ``1/n``."""
    a = _pauli_weights(h, t)
    big = a.sum()
    if set_name == "pauli":
        c0 = 1 - big / n + (big ** 2 + np.sum(a ** 2)) / (2 * n ** 2)
        rest = a / n
    elif set_name == "clifford":
        c0 = 1 - big / n + 2 * big ** 2 / (3 * n ** 2)
        rest = np.full(3, big / (3 * n))
    else:
        raise ValueError(f"unknown randomization set {set_name!r}")
    return CoefficientRecord((float(c0),) + tuple(float(x) for x in rest), "O(1/n^2)")


def pauli_vs_clifford(h, t: float, n_list) -> PauliCliffordReport:
    """Compare the two randomization sets on one Hamiltonian."""
    sets = {"pauli": pauli_set(), "clifford": clifford_set()}
    report = PauliCliffordReport()
    for n in sorted(n_list):
        vals = {}
        for name, rset in sets.items():
            ch = randomized_channel(h, t, n, rset)
            vals[name] = (
                pauli_decompose(ch).diagonal()[0],
                choi_distance(ch, identity_channel(2)),
                randomized_controllization(h, t, n, rset).error,
            )
        p, c = vals["pauli"], vals["clifford"]
        report.rows.append(PauliCliffordRow(n, *(float(x) for x in (p[0], c[0], p[1], c[1], p[2], c[2]))))
    s0p = most_coherent_S(randomization_comb(sets["pauli"])).circuit_operator
    s0c = most_coherent_S(randomization_comb(sets["clifford"])).circuit_operator
    report.s0_residual = float(np.abs(s0p - s0c).max())
    return report


def fit_loglog_slope(records) -> float:
    ns = np.log([r.n for r in records])
    es = np.log([r.error for r in records])
    return float(np.polyfit(ns, es, 1)[0])


def scaling_records(h, t: float, n_list, rset: RandomizationSet, mode: str = "average",
                    seed: int = 0, trials: int = 10000) -> list:
    out = []
    for n in sorted(n_list):
        r = randomized_controllization(h, t, n, rset, seed=seed, mode=mode, trials=trials)
        out.append(ScalingRecord(n, r.error, r.phase))
    return out


def pauli_s0() -> np.ndarray:
    """``(1/4) sum_i sigma_i (x) sigma_i``."""
    return sum(np.kron(s, s) for s in PAULIS) / 4


