"""Quantum channels as Kraus sets and Choi operators.

The Choi operator of a channel ``A`` from ``H_in`` to ``H_out`` is
``J = sum_i |K_i>><<K_i|`` on ``H_in (x) H_out`` (input factor first).
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotCPError, NotTPError
from .linalg import (
    PSD_FLOOR,
    TP_TOL,
    as_matrix,
    dagger,
    devectorize,
    hermitian_eig,
    kron,
    max_abs,
    partial_trace,
    permute_subsystems,
    schatten_norm,
    vectorize,
)

# eigenvalues at or below this are treated as exact zeros when factoring a Choi
ZERO_EIG_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)
PAULI_LABELS = ("I", "X", "Y", "Z")


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple
    d_in: int
    d_out: int

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        side = self.d_in * self.d_out
        if self.matrix.shape != (side, side):
            raise DimensionError(
                f"Choi of shape {self.matrix.shape} does not match d_in={self.d_in}, d_out={self.d_out}"
            )


@dataclass(frozen=True)
class ChannelReport:
    cp: bool
    tp: bool
    min_eigenvalue: float
    tp_residual: float

    @property
    def cptp(self) -> bool:
        return self.cp and self.tp


def kraus_set(operators: Sequence) -> KrausSet:
    ops = tuple(as_matrix(k) for k in operators)
    if not ops:
        raise DimensionError("a Kraus set needs at least one operator")
    d_out, d_in = ops[0].shape
    if any(k.shape != (d_out, d_in) for k in ops):
        raise DimensionError("Kraus operators must share one shape")
    return KrausSet(ops, d_in, d_out)


def _as_kraus(k) -> KrausSet:
    return k if isinstance(k, KrausSet) else kraus_set(k)


def choi(matrix, d_in: int, d_out: int = None) -> ChoiMatrix:
    d_out = d_in if d_out is None else d_out
    return ChoiMatrix(as_matrix(matrix), int(d_in), int(d_out))


def kraus_to_choi(k) -> ChoiMatrix:
    k = _as_kraus(k)
    vecs = np.array([vectorize(op) for op in k.operators])
    return ChoiMatrix(vecs.T @ vecs.conj(), k.d_in, k.d_out)


def unitary_channel(u) -> ChoiMatrix:
    return kraus_to_choi([u])


def identity_channel(d: int) -> ChoiMatrix:
    return unitary_channel(np.eye(d))


def pauli_channel(alpha: Sequence[float]) -> ChoiMatrix:
    """Qubit channel with Kraus operators ``alpha_i sigma_i``."""
    return kraus_to_choi(pauli_kraus(alpha))


def pauli_kraus(alpha: Sequence[float]) -> KrausSet:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (4,):
        raise DimensionError("need four Pauli weights")
    return kraus_set([a * s for a, s in zip(alpha, PAULIS)])


def depolarizing_channel() -> ChoiMatrix:
    """The fully depolarizing qubit channel, Choi ``I_4 / 2``."""
    return pauli_channel([0.5, 0.5, 0.5, 0.5])


def choi_to_orthogonal_kraus(j: ChoiMatrix) -> KrausSet:
    """Kraus operators from the spectral decomposition of the Choi operator.

    They are mutually Hilbert-Schmidt orthogonal, ordered by decreasing norm.
    """
    spec = hermitian_eig(j.matrix)
    if spec.eigenvalues[-1] < PSD_FLOOR:
        raise NotCPError(f"Choi has eigenvalue {spec.eigenvalues[-1]:.3e}")
    ops = [
        np.sqrt(lam) * devectorize(spec.eigenvectors[:, i], j.d_in, j.d_out)
        for i, lam in enumerate(spec.eigenvalues)
        if lam > ZERO_EIG_TOL
    ]
    if not ops:
        ops = [np.zeros((j.d_out, j.d_in), dtype=complex)]
    return KrausSet(tuple(ops), j.d_in, j.d_out)


def validate_channel(j: ChoiMatrix) -> ChannelReport:
    m = j.matrix
    herm = max_abs(m - dagger(m))
    min_eig = float(np.linalg.eigvalsh((m + dagger(m)) / 2)[0])
    if herm > 1e-10:
        min_eig = min(min_eig, -herm)
    tp_res = max_abs(partial_trace(m, [j.d_in, j.d_out], [0]) - np.eye(j.d_in))
    return ChannelReport(min_eig >= PSD_FLOOR, tp_res <= TP_TOL, min_eig, tp_res)


def apply_channel(j: ChoiMatrix, rho) -> np.ndarray:
    """``Tr_in[(rho^T (x) I) J]``."""
    rho = as_matrix(rho)
    if rho.shape != (j.d_in, j.d_in):
        raise DimensionError(f"state of shape {rho.shape} does not fit input dimension {j.d_in}")
    t = j.matrix.reshape(j.d_in, j.d_out, j.d_in, j.d_out)
    return np.einsum("ab,aibj->ij", rho, t)


def choi_to_superop(j: ChoiMatrix) -> np.ndarray:
    """Liouville matrix acting on row-major ``rho.reshape(-1)``."""
    t = j.matrix.reshape(j.d_in, j.d_out, j.d_in, j.d_out)
    return t.transpose(1, 3, 0, 2).reshape(j.d_out ** 2, j.d_in ** 2)


def superop_to_choi(s, d_in: int, d_out: int) -> ChoiMatrix:
    t = np.asarray(s, dtype=complex).reshape(d_out, d_out, d_in, d_in)
    return ChoiMatrix(t.transpose(2, 0, 3, 1).reshape(d_in * d_out, d_in * d_out), d_in, d_out)


def compose(first: ChoiMatrix, second: ChoiMatrix) -> ChoiMatrix:
    """Choi of ``second o first``."""
    if first.d_out != second.d_in:
        raise DimensionError(f"cannot feed dimension {first.d_out} into {second.d_in}")
    s = choi_to_superop(second) @ choi_to_superop(first)
    return superop_to_choi(s, first.d_in, second.d_out)


def compose_power(j: ChoiMatrix, n: int) -> ChoiMatrix:
    """``n``-fold sequential repetition of a channel."""
    if j.d_in != j.d_out:
        raise DimensionError("repetition needs d_in = d_out")
    s = np.linalg.matrix_power(choi_to_superop(j), n)
    return superop_to_choi(s, j.d_in, j.d_out)


def tensor_channels(a: ChoiMatrix, b: ChoiMatrix) -> ChoiMatrix:
    """Parallel composition ``a (x) b`` with factors ordered (a, b)."""
    m = permute_subsystems(kron(a.matrix, b.matrix), [a.d_in, a.d_out, b.d_in, b.d_out], [0, 2, 1, 3])
    return ChoiMatrix(m, a.d_in * b.d_in, a.d_out * b.d_out)


def stinespring(k) -> np.ndarray:
    """Unitary dilation on ``H (x) aux`` with ``dim aux = n + 1``.

    ``U|psi>|0> = sum_{i=1..n} K_i|psi>|i>``; the auxiliary index 0 is left
    unused on the specified columns and the rest of ``U`` is an arbitrary
    orthonormal completion.
    """
    k = _as_kraus(k)
    if k.d_in != k.d_out:
        raise DimensionError("dilation on a single system needs d_in = d_out")
    d, n = k.d_in, len(k)
    gram = sum(dagger(op) @ op for op in k.operators)
    if max_abs(gram - np.eye(d)) > TP_TOL:
        raise NotTPError("Kraus set is not trace preserving")
    a = n + 1
    cols = np.zeros((d, a, d), dtype=complex)
    for i, op in enumerate(k.operators, start=1):
        cols[:, i, :] = op
    v = cols.reshape(d * a, d)
    comp = scipy.linalg.null_space(dagger(v))
    u = np.zeros((d * a, d * a), dtype=complex)
    fixed = [p * a for p in range(d)]
    free = [c for c in range(d * a) if c not in fixed]
    u[:, fixed] = v
    u[:, free] = comp
    return u


def dilation_channel(u, d: int) -> ChoiMatrix:
    """Reduced dynamics ``Tr_aux[U (rho (x) |0><0|) U^dag]`` as a Choi operator."""
    a = u.shape[0] // d
    iso = u[:, [p * a for p in range(d)]]
    ops = [iso.reshape(d, a, d)[:, i, :] for i in range(a)]
    return kraus_to_choi(ops)


@dataclass(frozen=True, eq=False)
class PauliCoefficients:
    c: np.ndarray

    def reconstruct(self) -> np.ndarray:
        vecs = np.array([vectorize(s) for s in PAULIS])
        return vecs.T @ self.c @ vecs.conj()

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.c)).copy()


def pauli_decompose(j: ChoiMatrix) -> PauliCoefficients:
    """``c[a, b] = <<sigma_a| J |sigma_b>> / 4``."""
    if (j.d_in, j.d_out) != (2, 2):
        raise DimensionError("Pauli decomposition is defined for qubit channels")
    vecs = np.array([vectorize(s) for s in PAULIS])
    return PauliCoefficients(vecs.conj() @ j.matrix @ vecs.T / 4)


def choi_distance(a: ChoiMatrix, b: ChoiMatrix) -> float:
    """Half the trace norm of the Choi difference, normalized by ``d_in``."""
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise DimensionError("channels act on different spaces")
    return 0.5 * schatten_norm(a.matrix - b.matrix, 1) / a.d_in


def choi_equal(a: ChoiMatrix, b: ChoiMatrix, tol: float = 1e-10) -> bool:
    return (a.d_in, a.d_out) == (b.d_in, b.d_out) and max_abs(a.matrix - b.matrix) <= tol
